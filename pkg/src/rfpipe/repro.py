"""Pinned-seed reproduction pipelines for the signal-level demonstrations.

Each ``run_*`` function simulates the fixed pair of plane-wave acquisitions
(the same diffuse phantom with and without a 40 dB point target, under one
shared aberration profile), beamforms them into pre-envelope RF images, and
compares the normalized images: the quantity under study is the RF data of
the image, so normalization and the middle-column traces operate on the
beamformed RF. All seeds and parameters are pinned per preset, so repeated
runs emit byte-identical CSV/PGM/JSON artifacts.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from . import analysis, beamform, normalize
from .configs import ProbeGeometry, default_phantom, zero_aberration
from .errors import SchemaError
from .frame import RFFrame
from .sim import (
    PulseModel,
    default_time_span,
    gen_aberration,
    plane_wave_tx,
    sample_phantom,
    simulate_fsa,
    synth_planewave,
)


@dataclass(frozen=True)
class PairConfig:
    """Pinned parameters for the two-frame demonstration pipeline."""

    n_elements: int = 64
    pitch_m: float = 0.3e-3
    density: float = 6.0
    gain_db: float = 40.0
    scatterer_seed: int = 11
    aberration_seed: int = 7
    rms_ns: float = 50.0
    corr_len_elements: float = 2.0
    f0: float = 5.208e6
    frac_bw: float = 0.6
    fs: float = 20.832e6
    c: float = 1540.0
    f_number: float = 1.5


PRESETS = {
    "desk": PairConfig(),
    "tiny": PairConfig(n_elements=16, density=1.0),
}


@dataclass(frozen=True)
class SimulatedPair:
    """Aberrated image pair plus references and analysis geometry."""

    cfg: PairConfig
    probe: ProbeGeometry
    pulse: PulseModel
    pw_no_target: RFFrame
    pw_with_target: RFFrame
    img_no_target: RFFrame
    img_with_target: RFFrame
    img_ref_no_target: RFFrame
    img_ref_with_target: RFFrame
    grid: beamform.DasParams
    target_x: float
    target_z: float


def default_bmode_grid(f_number: float = 1.5) -> beamform.DasParams:
    """Display grid covering the default phantom at half/quarter wavelength."""
    wavelength = 1540.0 / 5.208e6
    return beamform.centered_grid(
        width_m=0.040,
        z_min=0.006,
        z_max=0.040,
        dx=wavelength / 2.0,
        dz=wavelength / 4.0,
        f_number=f_number,
    )


def build_pair(cfg: PairConfig, threads: int = 1) -> SimulatedPair:
    """Simulate and beamform the fixed-seed pair.

    The diffuse speckle realization and the aberration screen are shared;
    the only difference between the two acquisitions is the point target.
    """
    probe = ProbeGeometry(n_elements=cfg.n_elements, pitch_m=cfg.pitch_m)
    pulse = PulseModel(f0=cfg.f0, frac_bw=cfg.frac_bw)
    phantom = default_phantom(seed=cfg.scatterer_seed, density=cfg.density, gain_db=cfg.gain_db)
    t_span = default_time_span(phantom, probe, pulse, cfg.c)
    cloud_plain = sample_phantom(phantom.without_target())
    cloud_target = sample_phantom(phantom)
    fsa_plain = simulate_fsa(cloud_plain, probe, pulse, cfg.fs, t_span, c=cfg.c, threads=threads)
    fsa_target = simulate_fsa(cloud_target, probe, pulse, cfg.fs, t_span, c=cfg.c, threads=threads)
    ab = gen_aberration(cfg.n_elements, cfg.rms_ns, cfg.corr_len_elements, cfg.aberration_seed)
    tx = plane_wave_tx(probe, 0.0, cfg.c)
    target = phantom.point_target

    pw_no_target = synth_planewave(fsa_plain, tx, ab)
    pw_with_target = synth_planewave(fsa_target, tx, ab)
    flat = zero_aberration(cfg.n_elements)
    grid = default_bmode_grid(cfg.f_number)

    def image(pw: RFFrame) -> RFFrame:
        return beamform.das(pw, probe, grid, threads=threads)

    return SimulatedPair(
        cfg=cfg,
        probe=probe,
        pulse=pulse,
        pw_no_target=pw_no_target,
        pw_with_target=pw_with_target,
        img_no_target=image(pw_no_target),
        img_with_target=image(pw_with_target),
        img_ref_no_target=image(synth_planewave(fsa_plain, tx, flat)),
        img_ref_with_target=image(synth_planewave(fsa_target, tx, flat)),
        grid=grid,
        target_x=target.x_m,
        target_z=target.z_m,
    )


def spike_mask(pair: SimulatedPair, frame: RFFrame) -> analysis.RegionMask:
    """Non-spike comparison mask for the middle column of an image frame."""
    col = frame.n1 // 2
    x_col = float(pair.grid.x_axis()[col])
    return analysis.spike_exclusion_mask(
        frame, pair.target_x, pair.target_z, x_col, pair.pulse.fwhm_t, column="middle"
    )


def _bmode_pgm(img: RFFrame, path) -> None:
    bmode = beamform.log_compress(beamform.envelope(img), 50.0)
    beamform.export_pgm(bmode, path)


def _write_mask(path, mask: analysis.RegionMask) -> None:
    with open(path, "w") as f:
        json.dump(mask.to_dict(), f, indent=2, sort_keys=True)
        f.write("\n")


def _pair_for(preset: str, threads: int, pair: SimulatedPair | None) -> SimulatedPair:
    if pair is not None:
        return pair
    try:
        cfg = PRESETS[preset]
    except KeyError:
        raise SchemaError(f"unknown preset '{preset}'; choose from {sorted(PRESETS)}") from None
    return build_pair(cfg, threads=threads)


def run_fig2(out_dir, preset: str = "desk", threads: int = 1, pair: SimulatedPair | None = None) -> dict:
    """B-mode pair plus max-abs-normalized middle-column image RF traces.

    Emits the two B-mode PGMs, two trace CSVs, the non-spike mask, and the
    bulk amplitude ratio (no-target over with-target) as metrics JSON.
    """
    pair = _pair_for(preset, threads, pair)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    _bmode_pgm(pair.img_ref_no_target, out / "bmode_ref_no_target.pgm")
    _bmode_pgm(pair.img_ref_with_target, out / "bmode_ref_with_target.pgm")
    _bmode_pgm(pair.img_no_target, out / "bmode_no_target.pgm")
    _bmode_pgm(pair.img_with_target, out / "bmode_with_target.pgm")

    norm_a = normalize.max_abs(pair.img_no_target)
    norm_b = normalize.max_abs(pair.img_with_target)
    trace_a = analysis.middle_column(norm_a)
    trace_b = analysis.middle_column(norm_b)
    analysis.write_column_csv(out / "trace_maxabs_no_target.csv", trace_a, norm_a.fs, norm_a.t0)
    analysis.write_column_csv(out / "trace_maxabs_with_target.csv", trace_b, norm_b.fs, norm_b.t0)

    mask = spike_mask(pair, norm_a)
    _write_mask(out / "mask.json", mask)
    metrics = {"amplitude_ratio_maxabs": analysis.amplitude_ratio(trace_a, trace_b, mask)}
    analysis.write_metrics_json(out / "metrics.json", metrics)
    return metrics


def run_fig3(out_dir, preset: str = "desk", threads: int = 1, pair: SimulatedPair | None = None) -> dict:
    """Overlap comparison: max-abs vs robust traces over the non-spike mask."""
    pair = _pair_for(preset, threads, pair)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    traces = {}
    for label, fn in (("maxabs", normalize.max_abs), ("robust", normalize.robust)):
        na, nb = fn(pair.img_no_target), fn(pair.img_with_target)
        traces[label] = (analysis.middle_column(na), analysis.middle_column(nb))
        analysis.write_column_csv(out / f"trace_{label}_no_target.csv", traces[label][0], na.fs, na.t0)
        analysis.write_column_csv(out / f"trace_{label}_with_target.csv", traces[label][1], nb.fs, nb.t0)
    mask = spike_mask(pair, pair.img_no_target)
    _write_mask(out / "mask.json", mask)
    metrics = {
        "overlap_error_maxabs": analysis.overlap_error(*traces["maxabs"], mask),
        "overlap_error_robust": analysis.overlap_error(*traces["robust"], mask),
    }
    analysis.write_metrics_json(out / "metrics.json", metrics)
    return metrics


def run_fig4(
    out_dir,
    preset: str = "desk",
    threads: int = 1,
    n_bins: int = 201,
    pair: SimulatedPair | None = None,
) -> dict:
    """Histograms of both image RF frames under both normalizations."""
    pair = _pair_for(preset, threads, pair)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    frames = {"no_target": pair.img_no_target, "with_target": pair.img_with_target}
    hists = {}
    for norm_label, fn in (("maxabs", normalize.max_abs), ("robust", normalize.robust)):
        for frame_label, frame in frames.items():
            normed = fn(frame)
            hist = analysis.histogram(normed, n_bins, analysis.symmetric_range(normed))
            hists[(norm_label, frame_label)] = hist
            analysis.write_histogram_csv(out / f"hist_{norm_label}_{frame_label}.csv", hist)
    metrics = {
        "maxabs_with_target_mass_within_0p2": hists[("maxabs", "with_target")].mass_within(0.2),
        "robust_with_target_binned_std": hists[("robust", "with_target")].binned_std(),
        "robust_no_target_binned_std": hists[("robust", "no_target")].binned_std(),
    }
    analysis.write_metrics_json(out / "metrics.json", metrics)
    return metrics

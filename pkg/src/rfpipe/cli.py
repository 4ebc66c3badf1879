"""Command-line entry point for the full pipeline.

Exit codes: 0 success, 1 domain error (one ``CODE: message`` line on
stderr), 2 usage error. Every subcommand is deterministic given identical
flags and seeds. Thread count comes from ``--threads`` or the
``RFPIPE_THREADS`` environment variable and never changes output bytes.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import analysis, beamform, dataset, normalize, repro, sim, usrf
from .configs import (
    DEFAULT_FRAC_BW,
    DEFAULT_SOUND_SPEED,
    ProbeGeometry,
    aberration_from_dict,
    aberration_to_dict,
    parse_phantom,
    probe_from_dict,
    zero_aberration,
)
from .errors import RFPipeError, SchemaError
from .frame import FrameKind


def resolve_threads(value: int | None) -> int:
    if value is not None:
        return max(1, value)
    env = os.environ.get("RFPIPE_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise SchemaError(f"RFPIPE_THREADS must be an integer, got {env!r}") from None
    return 1


def _add_probe_flags(p: argparse.ArgumentParser):
    p.add_argument(
        "--probe",
        default=None,
        help="'default' (128 elements, 0.3 mm pitch) or a probe JSON file",
    )
    p.add_argument("--elements", type=int, default=128, help="element count (default 128)")
    p.add_argument("--pitch", type=float, default=0.3e-3, help="element pitch in m (default 0.3 mm)")


def _probe_from_args(args) -> ProbeGeometry:
    if args.probe in (None, "default"):
        return ProbeGeometry(n_elements=args.elements, pitch_m=args.pitch)
    return probe_from_dict(_load_json(args.probe))


def _load_phantom(path: str):
    return parse_phantom(Path(path).read_text())


def _load_json(path: str) -> dict:
    try:
        with open(path) as f:
            return json.load(f)
    except json.JSONDecodeError as e:
        raise SchemaError(f"{path}: invalid JSON: {e}") from None


def _load_aberration(path: str):
    return aberration_from_dict(_load_json(path))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rfpipe",
        description="Simulate, normalize, beamform, and analyze plane-wave ultrasound RF data.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate-fsa", help="simulate a full-synthetic-aperture tensor")
    p.add_argument("--phantom", required=True, help="phantom JSON file")
    _add_probe_flags(p)
    p.add_argument("--fs", type=float, default=20.832e6, help="sampling frequency in Hz")
    p.add_argument("--f0", type=float, default=5.208e6, help="center frequency in Hz")
    p.add_argument("--frac-bw", type=float, default=DEFAULT_FRAC_BW, help="-6 dB fractional bandwidth")
    p.add_argument("--c", type=float, default=DEFAULT_SOUND_SPEED, help="sound speed in m/s")
    p.add_argument("--t-end", type=float, default=None, help="span end in s (default: auto cover)")
    p.add_argument("--support-sigmas", type=float, default=6.0, help="pulse support half-width")
    p.add_argument("--threads", type=int, default=None)
    p.add_argument("--out", required=True, help="output USRF file")

    p = sub.add_parser("gen-aberration", help="generate a near-field delay screen")
    p.add_argument("--elements", type=int, required=True)
    p.add_argument("--rms-ns", type=float, required=True)
    p.add_argument("--corr-len", type=float, default=6.0, help="correlation length in elements")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True, help="output JSON file")

    p = sub.add_parser("synth-pw", help="synthesize an aberrated plane-wave frame from an FSA tensor")
    p.add_argument("--fsa", required=True, help="FSA USRF file")
    p.add_argument("--aberration", default=None, help="aberration JSON (omit for none)")
    p.add_argument("--angle", type=float, default=0.0, help="steering angle in rad")
    p.add_argument("--no-tx-aberration", action="store_true", help="skip the transmit screen")
    p.add_argument("--no-rx-aberration", action="store_true", help="skip the receive screen")
    p.add_argument("--out", required=True)

    p = sub.add_parser("downsample", help="low-pass and decimate the axial axis")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--factor", type=int, required=True)
    p.add_argument("--frac-bw", type=float, default=DEFAULT_FRAC_BW)
    p.add_argument("--out", required=True)

    p = sub.add_parser("normalize", help="normalize a frame")
    p.add_argument("--method", required=True, choices=["maxabs", "robust", "minmax01", "minmax11", "standardize"])
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--stats", default=None, help="stats JSON (required for standardize)")
    p.add_argument("--out", required=True)

    p = sub.add_parser("dataset-stats", help="pooled mean/std over frames")
    p.add_argument("--out", required=True, help="output stats JSON")
    p.add_argument("inputs", nargs="+", help="USRF files")

    p = sub.add_parser("beamform", help="delay-and-sum a plane-wave frame")
    p.add_argument("--in", dest="infile", required=True)
    _add_probe_flags(p)
    p.add_argument("--x0", type=float, default=None, help="grid left edge in m (default centered)")
    p.add_argument("--width", type=float, default=0.040, help="lateral span in m")
    p.add_argument("--z0", type=float, default=0.004, help="grid top in m")
    p.add_argument("--z1", type=float, default=0.038, help="grid bottom in m")
    p.add_argument("--dx", type=float, default=None, help="pixel width in m (default lambda/2)")
    p.add_argument("--dz", type=float, default=None, help="pixel height in m (default lambda/4)")
    p.add_argument("--f-number", type=float, default=1.0)
    p.add_argument("--apodization", choices=list(beamform.APODIZATIONS), default="hann")
    p.add_argument("--threads", type=int, default=None)
    p.add_argument("--out", default=None, help="pre-envelope RF image USRF")
    p.add_argument("--bmode-out", default=None, help="log-compressed B-mode USRF")
    p.add_argument("--pgm-out", default=None, help="B-mode PGM image")
    p.add_argument("--dynamic-range", type=float, default=50.0)

    p = sub.add_parser("analyze", help="signal diagnostics")
    asub = p.add_subparsers(dest="analyze_command", required=True)

    pa = asub.add_parser("column", help="extract an axial trace as CSV")
    pa.add_argument("--in", dest="infile", required=True)
    pa.add_argument("--col", default="middle", help="column index or 'middle'")
    pa.add_argument("--out", required=True)

    pa = asub.add_parser("histogram", help="histogram of all samples as CSV")
    pa.add_argument("--in", dest="infile", required=True)
    pa.add_argument("--bins", type=int, default=201)
    pa.add_argument("--range", type=float, nargs=2, default=None, metavar=("LO", "HI"))
    pa.add_argument("--symmetric", action="store_true", help="use a zero-centered range")
    pa.add_argument("--out", required=True)

    pa = asub.add_parser("compare", help="amplitude ratio and overlap error of two frames")
    pa.add_argument("--a", required=True)
    pa.add_argument("--b", required=True)
    pa.add_argument("--mask", required=True, help="mask JSON file")
    pa.add_argument("--metrics", required=True, help="output metrics JSON")

    pa = asub.add_parser("contrast", help="cyst contrast of a B-mode USRF image")
    pa.add_argument("--bmode", required=True, help="B-mode USRF (dB values)")
    pa.add_argument("--cyst", required=True, nargs=3, type=float, metavar=("X", "Z", "R"))
    pa.add_argument(
        "--background", required=True, nargs=4, type=float, metavar=("X", "Z", "R_IN", "R_OUT")
    )
    pa.add_argument("--x0", type=float, default=None, help="grid left edge (default centered)")
    pa.add_argument("--metrics", required=True)

    p = sub.add_parser("dataset", help="corpus operations")
    dsub = p.add_subparsers(dest="dataset_command", required=True)
    pd = dsub.add_parser("generate", help="generate the aberrated corpus and manifest")
    pd.add_argument("--phantom", required=True, help="phantom JSON (must include point_target)")
    _add_probe_flags(pd)
    pd.add_argument("--versions", type=int, default=20)
    pd.add_argument("--rms-ns", type=float, default=50.0)
    pd.add_argument("--corr-len", type=float, default=6.0)
    pd.add_argument("--fs", type=float, default=20.832e6)
    pd.add_argument("--f0", type=float, default=5.208e6)
    pd.add_argument("--frac-bw", type=float, default=DEFAULT_FRAC_BW)
    pd.add_argument("--c", type=float, default=DEFAULT_SOUND_SPEED)
    pd.add_argument("--seed", type=int, required=True)
    pd.add_argument("--epochs", type=int, default=100, help="pairing schedule length")
    pd.add_argument("--threads", type=int, default=None)
    pd.add_argument("--out-dir", required=True)

    p = sub.add_parser("repro", help="pinned-seed figure reproductions")
    p.add_argument("figure", choices=["fig2", "fig3", "fig4"])
    p.add_argument("--preset", choices=sorted(repro.PRESETS), default="desk")
    p.add_argument("--threads", type=int, default=None)
    p.add_argument("--out-dir", required=True)

    return parser


def _cmd_simulate_fsa(args) -> int:
    phantom = _load_phantom(args.phantom)
    probe = _probe_from_args(args)
    pulse = sim.PulseModel(f0=args.f0, frac_bw=args.frac_bw)
    if args.t_end is None:
        t_span = sim.default_time_span(phantom, probe, pulse, args.c)
    else:
        t_span = (0.0, args.t_end)
    cloud = sim.sample_phantom(phantom)
    frame = sim.simulate_fsa(
        cloud,
        probe,
        pulse,
        args.fs,
        t_span,
        c=args.c,
        support_sigmas=args.support_sigmas,
        threads=resolve_threads(args.threads),
    )
    usrf.write_frame(frame, args.out)
    print(f"wrote {args.out} ({frame.n0}x{frame.n1}x{frame.n2})")
    return 0


def _cmd_gen_aberration(args) -> int:
    ab = sim.gen_aberration(args.elements, args.rms_ns, args.corr_len, args.seed)
    with open(args.out, "w") as f:
        json.dump(aberration_to_dict(ab), f, indent=2, sort_keys=True)
        f.write("\n")
    print(f"wrote {args.out}")
    return 0


def _cmd_synth_pw(args) -> int:
    fsa = usrf.read_frame(args.fsa)
    n_elements = fsa.n1
    ab = _load_aberration(args.aberration) if args.aberration else zero_aberration(n_elements)
    probe = ProbeGeometry(n_elements=n_elements, pitch_m=fsa.pitch if fsa.pitch > 0 else 0.3e-3)
    tx = sim.plane_wave_tx(probe, args.angle, fsa.c)
    pw = sim.synth_planewave(
        fsa, tx, ab, apply_tx=not args.no_tx_aberration, apply_rx=not args.no_rx_aberration
    )
    usrf.write_frame(pw, args.out)
    print(f"wrote {args.out} ({pw.n0}x{pw.n1})")
    return 0


def _cmd_downsample(args) -> int:
    frame = usrf.read_frame(args.infile)
    out = sim.downsample(frame, args.factor, frac_bw=args.frac_bw)
    usrf.write_frame(out, args.out)
    print(f"wrote {args.out} (fs {out.fs:.6g} Hz)")
    return 0


def _cmd_normalize(args) -> int:
    frame = usrf.read_frame(args.infile)
    stats = None
    if args.method == "standardize":
        if not args.stats:
            raise SchemaError("--stats is required for method standardize")
        stats = normalize.DatasetStats.from_dict(_load_json(args.stats))
    out = normalize.apply_method(frame, args.method, stats)
    usrf.write_frame(out, args.out)
    print(f"wrote {args.out}")
    return 0


def _cmd_dataset_stats(args) -> int:
    frames = (usrf.read_frame(p) for p in args.inputs)
    stats = normalize.dataset_stats(frames)
    with open(args.out, "w") as f:
        json.dump(stats.to_dict(), f, indent=2, sort_keys=True)
        f.write("\n")
    print(f"wrote {args.out} (mean {stats.mean:.6g}, std {stats.std:.6g})")
    return 0


def _cmd_beamform(args) -> int:
    frame = usrf.read_frame(args.infile)
    probe = _probe_from_args(args)
    wavelength = frame.c / frame.f0
    dx = args.dx if args.dx is not None else wavelength / 2.0
    dz = args.dz if args.dz is not None else wavelength / 4.0
    if args.x0 is None:
        params = beamform.centered_grid(
            args.width, args.z0, args.z1, dx, dz, f_number=args.f_number, apodization=args.apodization
        )
    else:
        n_x = int(math.floor(args.width / dx)) + 1
        n_z = int(math.floor((args.z1 - args.z0) / dz)) + 1
        params = beamform.DasParams(
            x0=args.x0,
            z0=args.z0,
            dx=dx,
            dz=dz,
            n_x=n_x,
            n_z=n_z,
            f_number=args.f_number,
            apodization=args.apodization,
        )
    threads = resolve_threads(args.threads)
    img = beamform.das(frame, probe, params, threads=threads)
    wrote = []
    if args.out:
        usrf.write_frame(img, args.out)
        wrote.append(args.out)
    if args.bmode_out or args.pgm_out:
        bmode = beamform.log_compress(beamform.envelope(img), args.dynamic_range)
        if args.bmode_out:
            bmode_frame = img.with_samples(bmode.grid[:, :, None])
            usrf.write_frame(bmode_frame, args.bmode_out)
            wrote.append(args.bmode_out)
        if args.pgm_out:
            beamform.export_pgm(bmode, args.pgm_out)
            wrote.append(args.pgm_out)
    if not wrote:
        raise SchemaError("beamform: choose at least one of --out/--bmode-out/--pgm-out")
    print(f"wrote {', '.join(wrote)}")
    return 0


def _cmd_analyze(args) -> int:
    if args.analyze_command == "column":
        frame = usrf.read_frame(args.infile)
        if args.col != "middle":
            try:
                args.col = int(args.col)
            except ValueError:
                raise SchemaError(f"--col must be an integer or 'middle', got {args.col!r}") from None
        col = analysis.resolve_column(frame, args.col)
        values = analysis.extract_column(frame, col)
        analysis.write_column_csv(args.out, values, frame.fs, frame.t0)
        print(f"wrote {args.out} (column {col})")
        return 0
    if args.analyze_command == "histogram":
        frame = usrf.read_frame(args.infile)
        if args.symmetric and args.range:
            raise SchemaError("--symmetric and --range are mutually exclusive")
        rng = analysis.symmetric_range(frame) if args.symmetric else args.range
        hist = analysis.histogram(frame, args.bins, tuple(rng) if rng else None)
        analysis.write_histogram_csv(args.out, hist)
        print(f"wrote {args.out} ({hist.total} samples)")
        return 0
    if args.analyze_command == "compare":
        frame_a = usrf.read_frame(args.a)
        frame_b = usrf.read_frame(args.b)
        mask = analysis.RegionMask.from_dict(_load_json(args.mask))
        col_a = analysis.resolve_column(frame_a, mask.column)
        a = analysis.extract_column(frame_a, col_a)
        b = analysis.extract_column(frame_b, analysis.resolve_column(frame_b, mask.column))
        metrics = {
            "amplitude_ratio": analysis.amplitude_ratio(a, b, mask),
            "overlap_error": analysis.overlap_error(a, b, mask),
        }
        analysis.write_metrics_json(args.metrics, metrics)
        print(json.dumps(metrics, sort_keys=True))
        return 0
    if args.analyze_command == "contrast":
        frame = usrf.read_frame(args.bmode)
        if frame.kind is not FrameKind.IMAGE:
            raise SchemaError("contrast expects an image frame")
        grid = np.asarray(frame.samples[:, :, 0], dtype=np.float64)
        bmode = _bmode_from_grid(grid, frame)
        cyst = analysis.CircleRegion(*args.cyst)
        background = analysis.AnnulusRegion(*args.background)
        z0 = frame.c * frame.t0 / 2.0
        value = analysis.contrast(bmode, cyst, background, x0=args.x0, z0=z0)
        metrics = {"contrast_db": value}
        analysis.write_metrics_json(args.metrics, metrics)
        print(json.dumps(metrics, sort_keys=True))
        return 0
    raise SchemaError(f"unknown analyze subcommand {args.analyze_command}")


def _bmode_from_grid(grid: np.ndarray, frame):
    from .frame import BModeImage

    dr = max(50.0, float(-grid.min()))
    return BModeImage(grid=grid, dx=frame.dx, dz=frame.dz, dynamic_range_db=dr)


def _cmd_dataset(args) -> int:
    if args.dataset_command == "generate":
        phantom = _load_phantom(args.phantom)
        probe = _probe_from_args(args)
        pulse = sim.PulseModel(f0=args.f0, frac_bw=args.frac_bw)
        manifest = dataset.generate(
            phantom,
            probe,
            pulse,
            args.fs,
            args.versions,
            args.rms_ns,
            args.corr_len,
            args.out_dir,
            args.seed,
            c=args.c,
            n_epochs=args.epochs,
            threads=resolve_threads(args.threads),
        )
        print(
            f"wrote {args.out_dir}/manifest.json "
            f"({manifest.n_versions} versions, train {len(manifest.split_train)})"
        )
        return 0
    raise SchemaError(f"unknown dataset subcommand {args.dataset_command}")


def _cmd_repro(args) -> int:
    threads = resolve_threads(args.threads)
    runner = {"fig2": repro.run_fig2, "fig3": repro.run_fig3, "fig4": repro.run_fig4}[args.figure]
    metrics = runner(args.out_dir, preset=args.preset, threads=threads)
    print(json.dumps(metrics, sort_keys=True))
    return 0


_COMMANDS = {
    "simulate-fsa": _cmd_simulate_fsa,
    "gen-aberration": _cmd_gen_aberration,
    "synth-pw": _cmd_synth_pw,
    "downsample": _cmd_downsample,
    "normalize": _cmd_normalize,
    "dataset-stats": _cmd_dataset_stats,
    "beamform": _cmd_beamform,
    "analyze": _cmd_analyze,
    "dataset": _cmd_dataset,
    "repro": _cmd_repro,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except RFPipeError as e:
        print(f"{e.code}: {e}", file=sys.stderr)
        return 1
    except OSError as e:
        print(f"E_IO: {e}", file=sys.stderr)
        return 1


def entrypoint():
    raise SystemExit(main())


if __name__ == "__main__":
    entrypoint()

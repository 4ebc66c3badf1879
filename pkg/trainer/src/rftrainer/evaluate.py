"""Inference on the held-out pair plus image-quality scoring.

The corrected frames (inverse of the sigmoid-range affine map applied, so
they live in the standardized-RF domain) are written as USRF and handed to
the ``rfpipe`` CLI for beamforming and cyst-contrast measurement: the
trainer talks to the core toolkit only through files and its command line.
"""

from __future__ import annotations

import json
import math
import shutil
import subprocess
import sys
from pathlib import Path

import numpy as np
import torch

from .manifest import Manifest
from .normalize import NormalizationMismatch, normalize_frame
from .train import load_checkpoint
from .usrf import Frame, read_frame, write_frame

DISK_R = 0.0012
ANNULUS_IN = 0.0028


def rfpipe_command() -> list[str]:
    exe = shutil.which("rfpipe")
    if exe:
        return [exe]
    return [sys.executable, "-m", "rfpipe.cli"]


def _run(args: list[str]) -> None:
    proc = subprocess.run(args, capture_output=True, text=True)
    if proc.returncode != 0:
        raise RuntimeError(f"{' '.join(args)} failed: {proc.stderr.strip()}")


def correct_frame(model, ckpt: dict, frame: Frame) -> Frame:
    """Normalize, standardize, map, run the network, and unmap.

    The output frame covers the checkpoint's crop window; t0 is advanced
    accordingly so downstream beamforming sees the right geometry.
    """
    start, length = ckpt["crop"]["start"], ckpt["crop"]["length"]
    stats = ckpt["stats"]
    normed = normalize_frame(frame.samples[start : start + length, :, 0], ckpt["normalization"])
    k = stats["affine_sigmas"]
    mapped = ((normed - stats["mean"]) / stats["std"] + k) / (2.0 * k)
    mapped = np.clip(mapped, 0.0, 1.0)
    with torch.no_grad():
        out = model(torch.from_numpy(mapped.astype(np.float32))[None, None])
    unmapped = out[0, 0].numpy().astype(np.float64) * (2.0 * k) - k
    return frame.with_samples(
        unmapped[:, :, None].astype(np.float32), t0=frame.t0 + start / frame.fs
    )


def beamform_and_contrast(manifest: Manifest, rf_path: Path, out_stem: Path) -> float:
    """Beamform one frame via the CLI and return the mean cyst contrast."""
    bmode = out_stem.with_suffix(".bmode.usrf")
    pgm = out_stem.with_suffix(".pgm")
    _run(
        rfpipe_command()
        + [
            "beamform",
            "--in",
            str(rf_path),
            "--elements",
            str(manifest.n_elements),
            "--pitch",
            repr(manifest.pitch_m),
            "--bmode-out",
            str(bmode),
            "--pgm-out",
            str(pgm),
        ]
    )
    values = []
    for i, (cx, cz, _r) in enumerate(manifest.cysts):
        metrics = out_stem.with_suffix(f".contrast{i}.json")
        ann_out = math.sqrt(ANNULUS_IN**2 + DISK_R**2)
        _run(
            rfpipe_command()
            + [
                "analyze",
                "contrast",
                "--bmode",
                str(bmode),
                "--cyst",
                repr(cx),
                repr(cz),
                repr(DISK_R),
                "--background",
                repr(cx),
                repr(cz),
                repr(ANNULUS_IN),
                repr(ann_out),
                "--metrics",
                str(metrics),
            ]
        )
        values.append(json.loads(metrics.read_text())["contrast_db"])
    return float(np.mean(values))


def evaluate(checkpoint_path, manifest: Manifest, out_dir, normalization: str | None = None) -> dict:
    """Correct the held-out pair, beamform everything, score contrast.

    ``normalization``, when given, must match the checkpoint's method;
    evaluating with a mismatched method is an error, not a silent pass.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    if not manifest.cysts:
        raise RuntimeError("manifest phantom has no cysts; contrast is undefined")
    model, ckpt = load_checkpoint(checkpoint_path)
    if normalization is not None and normalization != ckpt["normalization"]:
        raise NormalizationMismatch(
            f"checkpoint trained with '{ckpt['normalization']}', requested '{normalization}'"
        )

    inputs = {
        "no_target": manifest.held_out_file(),
        "with_target": manifest.path(manifest.test_with_target_file),
    }
    refs = {
        "no_target": manifest.path(manifest.ref_no_target_file),
        "with_target": manifest.path(manifest.ref_with_target_file),
    }

    contrasts = {}
    for label, path in inputs.items():
        frame = read_frame(path)
        corrected = correct_frame(model, ckpt, frame)
        corrected_path = out_dir / f"corrected_{label}.usrf"
        write_frame(corrected, corrected_path)
        contrasts[f"output_{label}"] = beamform_and_contrast(
            manifest, corrected_path, out_dir / f"output_{label}"
        )
        contrasts[f"input_{label}"] = beamform_and_contrast(
            manifest, path, out_dir / f"input_{label}"
        )
    for label, path in refs.items():
        contrasts[f"reference_{label}"] = beamform_and_contrast(
            manifest, path, out_dir / f"reference_{label}"
        )

    result = {
        "normalization": ckpt["normalization"],
        "loss_substitute": ckpt["loss_substitute"],
        "contrast_db": contrasts,
        "improvement_no_target_db": contrasts["output_no_target"] - contrasts["input_no_target"],
        "target_degradation_db": contrasts["output_with_target"] - contrasts["output_no_target"],
    }
    with open(out_dir / "metrics.json", "w") as f:
        json.dump(result, f, indent=2, sort_keys=True)
        f.write("\n")
    return result

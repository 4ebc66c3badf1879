"""Command line: train one model, evaluate a checkpoint, or run the
two-normalization comparison end to end."""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict
from pathlib import Path

from .evaluate import evaluate
from .manifest import ManifestError, load_manifest
from .normalize import METHODS, NormalizationMismatch
from .train import TrainConfig, train


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rftrainer")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="train one model on the corpus")
    p.add_argument("--manifest", required=True)
    p.add_argument("--normalization", choices=list(METHODS), required=True)
    p.add_argument("--epochs", type=int, default=60)
    p.add_argument("--batch-size", type=int, default=32)
    p.add_argument("--lr", type=float, default=1e-3)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--depth", type=int, default=3)
    p.add_argument("--width", type=int, default=8)
    p.add_argument("--crop-start", type=int, default=0)
    p.add_argument("--crop-length", type=int, default=None)
    p.add_argument("--out-dir", required=True)

    p = sub.add_parser("evaluate", help="run a checkpoint on the held-out pair")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--manifest", required=True)
    p.add_argument("--normalization", choices=list(METHODS), default=None,
                   help="must match the checkpoint when given")
    p.add_argument("--out-dir", required=True)

    p = sub.add_parser("compare", help="train and evaluate both normalizations")
    p.add_argument("--manifest", required=True)
    p.add_argument("--epochs", type=int, default=60)
    p.add_argument("--batch-size", type=int, default=32)
    p.add_argument("--lr", type=float, default=1e-3)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--depth", type=int, default=3)
    p.add_argument("--width", type=int, default=8)
    p.add_argument("--crop-start", type=int, default=0)
    p.add_argument("--crop-length", type=int, default=None)
    p.add_argument("--out-dir", required=True)
    return parser


def run_compare(manifest, args, out_dir: Path) -> dict:
    """Identical settings, two normalizations, one report."""
    results = {}
    configs = {}
    for method in METHODS:
        config = TrainConfig(
            normalization=method,
            epochs=args.epochs,
            batch_size=args.batch_size,
            lr=args.lr,
            seed=args.seed,
            depth=args.depth,
            base_width=args.width,
            crop_start=args.crop_start,
            crop_length=args.crop_length,
        )
        configs[method] = asdict(config)
        ckpt = train(manifest, config, out_dir / method)
        results[method] = evaluate(ckpt, manifest, out_dir / method / "eval")

    diff = sorted(
        key for key in configs["conventional"]
        if configs["conventional"][key] != configs["robust"][key]
    )
    conv, rob = results["conventional"], results["robust"]
    report = {
        "config_diff": diff,
        "configs": configs,
        "conventional": conv,
        "robust": rob,
        "claims": {
            "both_improve_no_target": (
                conv["improvement_no_target_db"] < 0 and rob["improvement_no_target_db"] < 0
            ),
            "robust_degrades_less": (
                rob["target_degradation_db"] < conv["target_degradation_db"]
            ),
        },
    }
    with open(out_dir / "report.json", "w") as f:
        json.dump(report, f, indent=2, sort_keys=True)
        f.write("\n")
    return report


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "train":
            manifest = load_manifest(args.manifest)
            config = TrainConfig(
                normalization=args.normalization,
                epochs=args.epochs,
                batch_size=args.batch_size,
                lr=args.lr,
                seed=args.seed,
                depth=args.depth,
                base_width=args.width,
                crop_start=args.crop_start,
                crop_length=args.crop_length,
            )
            path = train(manifest, config, args.out_dir)
            print(f"wrote {path}")
            return 0
        if args.command == "evaluate":
            manifest = load_manifest(args.manifest)
            result = evaluate(args.checkpoint, manifest, args.out_dir, args.normalization)
            print(json.dumps(result["contrast_db"], sort_keys=True))
            return 0
        if args.command == "compare":
            manifest = load_manifest(args.manifest)
            report = run_compare(manifest, args, Path(args.out_dir))
            print(json.dumps(report["claims"], sort_keys=True))
            return 0
        raise AssertionError(args.command)
    except (ManifestError, NormalizationMismatch, ValueError, RuntimeError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


def entrypoint():
    raise SystemExit(main())


if __name__ == "__main__":
    entrypoint()

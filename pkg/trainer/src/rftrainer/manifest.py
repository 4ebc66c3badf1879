"""Dataset manifest loading and the bits of it the trainer consumes."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path


class ManifestError(Exception):
    pass


@dataclass(frozen=True)
class Manifest:
    directory: Path
    n_elements: int
    pitch_m: float
    fs: float
    f0: float
    c: float
    version_files: tuple[str, ...]
    split_train: tuple[int, ...]
    held_out: int
    test_with_target_file: str
    ref_no_target_file: str
    ref_with_target_file: str
    pairing: tuple[tuple[int, ...], ...]
    cysts: tuple[tuple[float, float, float], ...]

    def train_files(self) -> list[Path]:
        return [self.directory / self.version_files[i] for i in self.split_train]

    def held_out_file(self) -> Path:
        return self.directory / self.version_files[self.held_out]

    def path(self, name: str) -> Path:
        return self.directory / name


def load_manifest(path) -> Manifest:
    path = Path(path)
    try:
        obj = json.loads(path.read_text())
    except (OSError, json.JSONDecodeError) as e:
        raise ManifestError(f"cannot read manifest: {e}") from None
    try:
        if obj.get("format") != "rfpipe-dataset":
            raise ManifestError("not an rfpipe dataset manifest")
        probe = obj["probe"]
        cysts = tuple(
            (float(c["x_m"]), float(c["z_m"]), float(c["r_m"]))
            for c in obj["phantom"].get("cysts", [])
        )
        manifest = Manifest(
            directory=path.parent,
            n_elements=int(probe["n_elements"]),
            pitch_m=float(probe["pitch_m"]),
            fs=float(obj["fs_hz"]),
            f0=float(obj["pulse"]["f0_hz"]),
            c=float(obj["c_m_s"]),
            version_files=tuple(obj["files"]["versions"]),
            split_train=tuple(int(i) for i in obj["split"]["train"]),
            held_out=int(obj["held_out"]),
            test_with_target_file=obj["files"]["test_with_target"],
            ref_no_target_file=obj["files"]["ref_no_target"],
            ref_with_target_file=obj["files"]["ref_with_target"],
            pairing=tuple(tuple(int(i) for i in row) for row in obj["pairing"]["epochs"]),
            cysts=cysts,
        )
    except (KeyError, TypeError, ValueError) as e:
        raise ManifestError(f"bad manifest: {e}") from None
    if not manifest.pairing:
        raise ManifestError("manifest has no pairing tables")
    train = set(manifest.split_train)
    for row in manifest.pairing:
        if set(row) != train:
            raise ManifestError("pairing row is not a permutation of the train split")
        if any(a == b for a, b in zip(manifest.split_train, row)):
            raise ManifestError("pairing row has a fixed point")
    return manifest

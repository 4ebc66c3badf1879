"""Corpus generation: one scatterer realization, N aberrated plane-wave
versions, a held-out pair with and without the point target, unaberrated
references, the train/test split, and per-epoch pairing derangements.

The with-target frames reuse the no-target phantom's diffuse realization
and the held-out version's exact aberration profile, so the held-out pair
differs only by the point target.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .configs import (
    Phantom,
    ProbeGeometry,
    aberration_to_dict,
    phantom_from_dict,
    phantom_to_dict,
    probe_from_dict,
    probe_to_dict,
    zero_aberration,
)
from .errors import ManifestError, SchemaError
from .sim import (
    PulseModel,
    default_time_span,
    gen_aberration,
    plane_wave_tx,
    sample_phantom,
    simulate_fsa,
    synth_planewave,
)
from .usrf import write_frame


def pairing_schedule(train_ids, n_epochs: int, seed: int) -> list[list[int]]:
    """One derangement of the train ids per epoch.

    Row ``e`` maps ``train_ids[k]`` to ``tables[e][k]``; no id ever maps to
    itself and every row is a permutation of the ids.
    """
    ids = [int(i) for i in train_ids]
    if len(ids) < 2:
        raise SchemaError("need at least 2 train ids to pair")
    if n_epochs < 1:
        raise SchemaError("n_epochs must be >= 1")
    rng = np.random.default_rng(seed)
    n = len(ids)
    lanes = np.arange(n)
    tables = []
    for _ in range(n_epochs):
        while True:
            perm = rng.permutation(n)
            if not np.any(perm == lanes):
                break
        tables.append([ids[p] for p in perm])
    return tables


@dataclass(frozen=True)
class DatasetManifest:
    """Corpus description persisted as ``manifest.json`` next to the files."""

    phantom: Phantom
    probe: ProbeGeometry
    f0: float
    frac_bw: float
    fs: float
    c: float
    n_versions: int
    rms_ns: float
    corr_len_elements: float
    seed: int
    version_files: tuple[str, ...]
    version_ab_seeds: tuple[int, ...]
    split_train: tuple[int, ...]
    split_test: tuple[int, ...]
    held_out: int
    test_with_target_file: str
    ref_no_target_file: str
    ref_with_target_file: str
    pairing_seed: int
    pairing: tuple[tuple[int, ...], ...]
    checksums: dict

    def to_dict(self) -> dict:
        return {
            "format": "rfpipe-dataset",
            "version": 1,
            "phantom": phantom_to_dict(self.phantom),
            "probe": probe_to_dict(self.probe),
            "pulse": {"f0_hz": self.f0, "frac_bw": self.frac_bw},
            "fs_hz": self.fs,
            "c_m_s": self.c,
            "n_versions": self.n_versions,
            "aberration": {
                "rms_ns": self.rms_ns,
                "corr_len_elements": self.corr_len_elements,
                "seeds": list(self.version_ab_seeds),
            },
            "seed": self.seed,
            "files": {
                "versions": list(self.version_files),
                "test_with_target": self.test_with_target_file,
                "ref_no_target": self.ref_no_target_file,
                "ref_with_target": self.ref_with_target_file,
            },
            "split": {"train": list(self.split_train), "test": list(self.split_test)},
            "held_out": self.held_out,
            "pairing": {"seed": self.pairing_seed, "epochs": [list(row) for row in self.pairing]},
            "checksums": dict(sorted(self.checksums.items())),
        }

    @classmethod
    def from_dict(cls, obj: dict) -> "DatasetManifest":
        try:
            if obj.get("format") != "rfpipe-dataset" or obj.get("version") != 1:
                raise ManifestError("not an rfpipe dataset manifest")
            return cls(
                phantom=phantom_from_dict(obj["phantom"]),
                probe=probe_from_dict(obj["probe"]),
                f0=float(obj["pulse"]["f0_hz"]),
                frac_bw=float(obj["pulse"]["frac_bw"]),
                fs=float(obj["fs_hz"]),
                c=float(obj["c_m_s"]),
                n_versions=int(obj["n_versions"]),
                rms_ns=float(obj["aberration"]["rms_ns"]),
                corr_len_elements=float(obj["aberration"]["corr_len_elements"]),
                seed=int(obj["seed"]),
                version_files=tuple(obj["files"]["versions"]),
                version_ab_seeds=tuple(int(s) for s in obj["aberration"]["seeds"]),
                split_train=tuple(int(i) for i in obj["split"]["train"]),
                split_test=tuple(int(i) for i in obj["split"]["test"]),
                held_out=int(obj["held_out"]),
                test_with_target_file=obj["files"]["test_with_target"],
                ref_no_target_file=obj["files"]["ref_no_target"],
                ref_with_target_file=obj["files"]["ref_with_target"],
                pairing_seed=int(obj["pairing"]["seed"]),
                pairing=tuple(tuple(int(i) for i in row) for row in obj["pairing"]["epochs"]),
                checksums=dict(obj["checksums"]),
            )
        except (KeyError, TypeError, ValueError) as e:
            raise ManifestError(f"bad manifest: {e}") from None

    def save(self, path) -> None:
        with open(path, "w") as f:
            json.dump(self.to_dict(), f, indent=2, sort_keys=True)
            f.write("\n")

    @classmethod
    def load(cls, path) -> "DatasetManifest":
        with open(path) as f:
            return cls.from_dict(json.load(f))


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def verify_manifest(manifest: DatasetManifest, directory) -> None:
    """Raise :class:`ManifestError` if any file hash mismatches."""
    directory = Path(directory)
    for name, digest in manifest.checksums.items():
        actual = _sha256(directory / name)
        if actual != digest:
            raise ManifestError(f"checksum mismatch for {name}")


def generate(
    phantom: Phantom,
    probe: ProbeGeometry,
    pulse: PulseModel,
    fs: float,
    n_versions: int,
    rms_ns: float,
    corr_len_elements: float,
    out_dir,
    seed: int,
    c: float = 1540.0,
    n_epochs: int = 100,
    support_sigmas: float = 6.0,
    threads: int = 1,
) -> DatasetManifest:
    """Simulate and write the full corpus; deterministic for a fixed seed.

    ``phantom`` must carry a point target: the target-free variant drives
    the ``n_versions`` training/held-out frames, and the with-target
    variant is synthesized once with the held-out version's aberration.
    Two unaberrated references (with/without target) are also written.
    """
    if n_versions < 2:
        raise SchemaError("n_versions must be >= 2")
    if phantom.point_target is None:
        raise SchemaError("phantom must configure a point target for the test pair")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    rng = np.random.default_rng(seed)
    ab_seeds = [int(s) for s in rng.integers(0, 2**62, size=n_versions)]
    pairing_seed = int(rng.integers(0, 2**62))

    plain = phantom.without_target()
    cloud_plain = sample_phantom(plain)
    cloud_target = sample_phantom(phantom)
    t_span = default_time_span(phantom, probe, pulse, c)
    fsa_plain = simulate_fsa(
        cloud_plain, probe, pulse, fs, t_span, c=c, support_sigmas=support_sigmas, threads=threads
    )
    fsa_target = simulate_fsa(
        cloud_target, probe, pulse, fs, t_span, c=c, support_sigmas=support_sigmas, threads=threads
    )
    tx = plane_wave_tx(probe, 0.0, c)

    held_out = n_versions - 1
    version_files = []
    profiles = []
    for v in range(n_versions):
        ab = gen_aberration(probe.n_elements, rms_ns, corr_len_elements, ab_seeds[v])
        profiles.append(ab)
        pw = synth_planewave(fsa_plain, tx, ab)
        name = f"version_{v:03d}.usrf"
        write_frame(pw, out_dir / name)
        version_files.append(name)

    test_target = synth_planewave(fsa_target, tx, profiles[held_out])
    ref_plain = synth_planewave(fsa_plain, tx, zero_aberration(probe.n_elements))
    ref_target = synth_planewave(fsa_target, tx, zero_aberration(probe.n_elements))
    names = {
        "test_with_target": "test_with_target.usrf",
        "ref_no_target": "ref_no_target.usrf",
        "ref_with_target": "ref_with_target.usrf",
    }
    write_frame(test_target, out_dir / names["test_with_target"])
    write_frame(ref_plain, out_dir / names["ref_no_target"])
    write_frame(ref_target, out_dir / names["ref_with_target"])

    for v, ab in enumerate(profiles):
        with open(out_dir / f"aberration_{v:03d}.json", "w") as f:
            json.dump(aberration_to_dict(ab), f, indent=2, sort_keys=True)
            f.write("\n")

    train_ids = list(range(n_versions - 1))
    # A single train id admits no derangement; the minimal 2-version corpus
    # carries an empty pairing table.
    pairing = pairing_schedule(train_ids, n_epochs, pairing_seed) if len(train_ids) >= 2 else []

    all_files = version_files + list(names.values())
    checksums = {name: _sha256(out_dir / name) for name in all_files}
    manifest = DatasetManifest(
        phantom=phantom,
        probe=probe,
        f0=pulse.f0,
        frac_bw=pulse.frac_bw,
        fs=fs,
        c=c,
        n_versions=n_versions,
        rms_ns=rms_ns,
        corr_len_elements=corr_len_elements,
        seed=seed,
        version_files=tuple(version_files),
        version_ab_seeds=tuple(ab_seeds),
        split_train=tuple(train_ids),
        split_test=(held_out,),
        held_out=held_out,
        test_with_target_file=names["test_with_target"],
        ref_no_target_file=names["ref_no_target"],
        ref_with_target_file=names["ref_with_target"],
        pairing_seed=pairing_seed,
        pairing=tuple(tuple(row) for row in pairing),
        checksums=checksums,
    )
    manifest.save(out_dir / "manifest.json")
    return manifest

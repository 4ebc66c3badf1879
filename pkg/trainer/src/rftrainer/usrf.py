"""Minimal reader/writer for the USRF container.

Independent implementation against the published byte layout (80-byte
little-endian header: magic "USRF", u16 version=1, u16 flags=0, u8 kind,
3 reserved bytes, three u32 dims, seven f64 fields fs/f0/c/t0/pitch/dx/dz,
then a float32 payload with the axial index varying fastest). Only what
the trainer needs: no streaming, no partial reads.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

MAGIC = b"USRF"
HEADER_FMT = "<4sHHB3sIIIddddddd"
HEADER_SIZE = struct.calcsize(HEADER_FMT)


class USRFError(Exception):
    pass


@dataclass(frozen=True)
class Frame:
    """Samples (n0, n1, n2) float32/float64 plus acquisition metadata."""

    kind: int
    samples: np.ndarray
    fs: float
    f0: float
    c: float
    t0: float = 0.0
    pitch: float = 0.0
    dx: float = 0.0
    dz: float = 0.0

    @property
    def n0(self) -> int:
        return self.samples.shape[0]

    @property
    def n1(self) -> int:
        return self.samples.shape[1]

    def with_samples(self, samples: np.ndarray, t0: float | None = None) -> "Frame":
        out = replace(self, samples=samples)
        if t0 is not None:
            out = replace(out, t0=t0)
        return out


def read_frame(path) -> Frame:
    data = Path(path).read_bytes()
    if data[:4] != MAGIC:
        raise USRFError(f"{path}: bad magic")
    if len(data) < HEADER_SIZE:
        raise USRFError(f"{path}: truncated header")
    (_, version, flags, kind, _res, n0, n1, n2, fs, f0, c, t0, pitch, dx, dz) = struct.unpack(
        HEADER_FMT, data[:HEADER_SIZE]
    )
    if version != 1 or flags != 0:
        raise USRFError(f"{path}: unsupported version/flags {version}/{flags}")
    expected = 4 * n0 * n1 * n2
    payload = data[HEADER_SIZE:]
    if len(payload) != expected:
        raise USRFError(f"{path}: payload size {len(payload)} != {expected}")
    samples = np.frombuffer(payload, dtype="<f4").astype(np.float32).reshape((n0, n1, n2), order="F")
    if not np.isfinite(samples).all():
        raise USRFError(f"{path}: non-finite samples")
    return Frame(kind=kind, samples=samples, fs=fs, f0=f0, c=c, t0=t0, pitch=pitch, dx=dx, dz=dz)


def write_frame(frame: Frame, path) -> None:
    payload = np.ravel(frame.samples, order="F").astype("<f4")
    if not np.isfinite(payload).all():
        raise USRFError("non-finite samples")
    n0, n1, n2 = frame.samples.shape
    header = struct.pack(
        HEADER_FMT,
        MAGIC,
        1,
        0,
        int(frame.kind),
        b"\x00\x00\x00",
        n0,
        n1,
        n2,
        frame.fs,
        frame.f0,
        frame.c,
        frame.t0,
        frame.pitch,
        frame.dx,
        frame.dz,
    )
    Path(path).write_bytes(header + payload.tobytes())

"""Reader and writer for the USRF binary container.

Layout (all little-endian):

====== ====== =======================================================
bytes  type   field
====== ====== =======================================================
0-3    4s     magic ``USRF``
4-5    u16    version (1)
6-7    u16    flags (0)
8      u8     kind: 0 channel data, 1 FSA tensor, 2 image
9-11   3s     reserved, zero
12-23  3xu32  dims n0, n1, n2
24-79  7xf64  fs, f0, c, t0, pitch, dx, dz
80-    f32    payload, n0 fastest-varying
====== ====== =======================================================

The header is exactly 80 bytes; the payload is exactly ``4*n0*n1*n2``
bytes. Reading a written frame reproduces it bitwise when the samples are
already 32-bit; 64-bit samples are rounded to 32-bit on write.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from .errors import (
    BadMagicError,
    InvalidFrameError,
    NonFiniteDataError,
    TruncatedPayloadError,
    UnsupportedVersionError,
)
from .frame import FrameKind, RFFrame

MAGIC = b"USRF"
VERSION = 1
HEADER_FMT = "<4sHHB3sIIIddddddd"
HEADER_SIZE = struct.calcsize(HEADER_FMT)

assert HEADER_SIZE == 80


def write_frame(frame: RFFrame, path) -> None:
    """Serialize ``frame`` to ``path``; deterministic byte-for-byte."""
    with np.errstate(over="ignore"):
        payload = np.ravel(frame.samples, order="F").astype("<f4")
    if not np.isfinite(payload).all():
        raise NonFiniteDataError("samples not representable as finite float32")
    header = struct.pack(
        HEADER_FMT,
        MAGIC,
        VERSION,
        0,
        int(frame.kind),
        b"\x00\x00\x00",
        frame.n0,
        frame.n1,
        frame.n2,
        frame.fs,
        frame.f0,
        frame.c,
        frame.t0,
        frame.pitch,
        frame.dx,
        frame.dz,
    )
    Path(path).write_bytes(header + payload.tobytes())


def read_frame(path) -> RFFrame:
    """Parse a USRF file into an :class:`RFFrame` with float32 samples."""
    data = Path(path).read_bytes()
    if data[:4] != MAGIC:
        raise BadMagicError(f"expected magic {MAGIC!r}", offset=0)
    if len(data) < HEADER_SIZE:
        raise TruncatedPayloadError(
            f"header needs {HEADER_SIZE} bytes, file has {len(data)}", offset=len(data)
        )
    (_, version, flags, kind, reserved, n0, n1, n2, fs, f0, c, t0, pitch, dx, dz) = struct.unpack(
        HEADER_FMT, data[:HEADER_SIZE]
    )
    if version != VERSION:
        raise UnsupportedVersionError(f"version {version} not supported", offset=4)
    if flags != 0:
        raise UnsupportedVersionError(f"flags {flags:#x} not supported", offset=6)
    try:
        kind = FrameKind(kind)
    except ValueError:
        raise InvalidFrameError(f"unknown frame kind {kind}", offset=8) from None
    if reserved != b"\x00\x00\x00":
        raise InvalidFrameError("reserved bytes must be zero", offset=9)
    if min(n0, n1, n2) == 0:
        raise InvalidFrameError(f"dims must be >= 1, got {(n0, n1, n2)}", offset=12)

    expected = 4 * n0 * n1 * n2
    payload = data[HEADER_SIZE:]
    if len(payload) < expected:
        raise TruncatedPayloadError(
            f"payload needs {expected} bytes, file has {len(payload)}",
            offset=HEADER_SIZE + len(payload),
        )
    if len(payload) > expected:
        raise InvalidFrameError(
            f"{len(payload) - expected} trailing bytes after payload",
            offset=HEADER_SIZE + expected,
        )
    flat = np.frombuffer(payload, dtype="<f4").astype(np.float32)
    finite = np.isfinite(flat)
    if not finite.all():
        bad = int(np.argmin(finite))
        raise NonFiniteDataError(
            f"non-finite sample at flat index {bad}", offset=HEADER_SIZE + 4 * bad
        )
    samples = flat.reshape((n0, n1, n2), order="F")
    return RFFrame(kind=kind, samples=samples, fs=fs, f0=f0, c=c, t0=t0, pitch=pitch, dx=dx, dz=dz)

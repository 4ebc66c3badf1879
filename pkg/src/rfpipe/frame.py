"""RF data containers: the sample tensor with acquisition metadata.

An :class:`RFFrame` holds a 3-D tensor ``(n0, n1, n2)`` where the axial
sample index ``n0`` varies fastest in storage order, ``n1`` is the
channel/column index, and ``n2`` is the transmit index (1 for anything that
is not a full-synthetic-aperture tensor). Frames are immutable after
construction; the constructor takes ownership of the array and locks it.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, replace

import numpy as np

from .errors import InvalidFrameError, NonFiniteDataError


class FrameKind(enum.IntEnum):
    CHANNEL_DATA = 0
    FSA_TENSOR = 1
    IMAGE = 2


@dataclass(frozen=True)
class RFFrame:
    """Sample tensor plus acquisition metadata.

    Parameters
    ----------
    kind : FrameKind
        What the tensor represents (channel data, FSA tensor, or image).
    samples : np.ndarray
        1-, 2-, or 3-D float array; reshaped to ``(n0, n1, n2)``.
    fs : float
        Sampling frequency in Hz (axial sample rate for images).
    f0 : float
        Transducer center frequency in Hz.
    c : float
        Sound speed in m/s.
    t0 : float
        Time of the first axial sample in seconds.
    pitch : float
        Element pitch in meters (0 when not applicable).
    dx, dz : float
        Pixel spacing in meters; 0 when the frame is not an image.
    """

    kind: FrameKind
    samples: np.ndarray
    fs: float
    f0: float
    c: float
    t0: float = 0.0
    pitch: float = 0.0
    dx: float = 0.0
    dz: float = 0.0

    def __post_init__(self):
        arr = np.asarray(self.samples)
        if arr.dtype not in (np.float32, np.float64):
            arr = arr.astype(np.float64)
        if arr.ndim == 1:
            arr = arr.reshape(-1, 1, 1)
        elif arr.ndim == 2:
            arr = arr.reshape(*arr.shape, 1)
        elif arr.ndim != 3:
            raise InvalidFrameError(f"samples must be 1-, 2-, or 3-D, got {arr.ndim}-D")
        if arr.size == 0:
            raise InvalidFrameError("all dims must be >= 1")
        if not isinstance(self.kind, FrameKind):
            raise InvalidFrameError(f"bad frame kind {self.kind!r}")
        for name in ("fs", "f0", "c"):
            v = getattr(self, name)
            if not np.isfinite(v) or v <= 0:
                raise InvalidFrameError(f"{name} must be finite and > 0, got {v}")
        for name in ("pitch", "dx", "dz"):
            v = getattr(self, name)
            if not np.isfinite(v) or v < 0:
                raise InvalidFrameError(f"{name} must be finite and >= 0, got {v}")
        if not np.isfinite(self.t0):
            raise InvalidFrameError(f"t0 must be finite, got {self.t0}")
        if not np.isfinite(arr).all():
            raise NonFiniteDataError("samples contain NaN or Inf")
        arr.setflags(write=False)
        object.__setattr__(self, "samples", arr)

    @property
    def n0(self) -> int:
        return self.samples.shape[0]

    @property
    def n1(self) -> int:
        return self.samples.shape[1]

    @property
    def n2(self) -> int:
        return self.samples.shape[2]

    @property
    def n_samples(self) -> int:
        return self.samples.size

    def times(self) -> np.ndarray:
        """Time axis of the axial dimension in seconds."""
        return self.t0 + np.arange(self.n0) / self.fs

    def with_samples(self, samples: np.ndarray, kind: FrameKind | None = None) -> "RFFrame":
        """New frame with the same metadata but different samples."""
        out = replace(self, samples=samples)
        if kind is not None:
            out = replace(out, kind=kind)
        return out


@dataclass(frozen=True)
class BModeImage:
    """Log-compressed envelope image in dB, peak pinned at exactly 0 dB."""

    grid: np.ndarray
    dx: float
    dz: float
    dynamic_range_db: float = 50.0

    def __post_init__(self):
        grid = np.asarray(self.grid, dtype=np.float64)
        if grid.ndim != 2 or grid.size == 0:
            raise InvalidFrameError("b-mode grid must be 2-D and non-empty")
        if not np.isfinite(grid).all():
            raise NonFiniteDataError("b-mode grid contains NaN or Inf")
        if self.dynamic_range_db <= 0:
            raise InvalidFrameError("dynamic range must be > 0 dB")
        if self.dx <= 0 or self.dz <= 0:
            raise InvalidFrameError("pixel spacing must be > 0")
        if grid.max() != 0.0:
            raise InvalidFrameError(f"b-mode max must be exactly 0 dB, got {grid.max()}")
        if grid.min() < -self.dynamic_range_db:
            raise InvalidFrameError("b-mode values below -dynamic_range_db")
        grid.setflags(write=False)
        object.__setattr__(self, "grid", grid)

    @property
    def n_z(self) -> int:
        return self.grid.shape[0]

    @property
    def n_x(self) -> int:
        return self.grid.shape[1]

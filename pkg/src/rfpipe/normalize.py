"""RF amplitude normalization schemes.

``max_abs`` pins each frame into [-1, 1] by dividing by its peak magnitude.
``robust`` follows that with a division by the standard deviation of the
range-pinned data, so frames that differ only by the presence of a bright
reflector end up with comparable amplitude scales (possibly beyond [-1, 1]).
Min-max variants map the value range onto a fixed interval, and
``standardize`` applies corpus-wide statistics from :func:`dataset_stats`.

All operations compute in float64, return frames with float64 samples and
unchanged metadata, and reject degenerate inputs (all-zero or constant
frames) instead of passing them through.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    AllZeroFrameError,
    ConstantDatasetError,
    ConstantFrameError,
    EmptyDatasetError,
    SchemaError,
)
from .frame import RFFrame


@dataclass(frozen=True)
class DatasetStats:
    """Pooled mean and population standard deviation over a frame corpus."""

    mean: float
    std: float
    n_samples: int

    def __post_init__(self):
        if self.n_samples <= 0:
            raise SchemaError("n_samples must be > 0")
        if not (math.isfinite(self.mean) and math.isfinite(self.std)) or self.std <= 0:
            raise SchemaError("stats must be finite with std > 0")

    def to_dict(self) -> dict:
        return {"mean": self.mean, "std": self.std, "n_samples": self.n_samples}

    @classmethod
    def from_dict(cls, obj: dict) -> "DatasetStats":
        try:
            return cls(float(obj["mean"]), float(obj["std"]), int(obj["n_samples"]))
        except (KeyError, TypeError, ValueError) as e:
            raise SchemaError(f"bad stats object: {e}") from None


def _samples64(frame: RFFrame) -> np.ndarray:
    return np.asarray(frame.samples, dtype=np.float64)


def population_std(x: np.ndarray) -> float:
    """Standard deviation about the mean with divisor N (not N-1)."""
    return float(np.std(x))


def max_abs(frame: RFFrame) -> RFFrame:
    """Divide by the peak absolute value, pinning the frame into [-1, 1]."""
    x = _samples64(frame)
    peak = float(np.max(np.abs(x)))
    if peak == 0.0:
        raise AllZeroFrameError("max-abs normalization of an all-zero frame")
    return frame.with_samples(x / peak)


def robust(frame: RFFrame) -> RFFrame:
    """Max-abs then divide by the standard deviation of the result.

    The output has population standard deviation exactly 1 up to rounding;
    its range typically extends beyond [-1, 1]. The frame mean is not
    subtracted: the data is only rescaled.
    """
    y = _samples64(max_abs(frame))
    sigma = population_std(y)
    if sigma == 0.0:
        raise ConstantFrameError("robust normalization of a constant frame")
    return frame.with_samples(y / sigma)


def minmax01(frame: RFFrame) -> RFFrame:
    """Affine map of [min, max] onto [0, 1], endpoints attained exactly."""
    x = _samples64(frame)
    lo, hi = float(x.min()), float(x.max())
    if hi == lo:
        raise ConstantFrameError("min-max normalization of a constant frame")
    return frame.with_samples((x - lo) / (hi - lo))


def minmax11(frame: RFFrame) -> RFFrame:
    """Affine map of [min, max] onto [-1, 1], endpoints attained exactly."""
    x = _samples64(frame)
    lo, hi = float(x.min()), float(x.max())
    if hi == lo:
        raise ConstantFrameError("min-max normalization of a constant frame")
    return frame.with_samples(2.0 * (x - lo) / (hi - lo) - 1.0)


def dataset_stats(frames: Iterable[RFFrame]) -> DatasetStats:
    """Pooled mean and population std over all samples of all frames.

    Per-frame partial sums are combined with exact summation, so the result
    is bitwise independent of frame order (and of any parallel frame
    partitioning that preserves per-frame sums).
    """
    frames = list(frames)
    if not frames:
        raise EmptyDatasetError("no frames")
    n = sum(f.n_samples for f in frames)
    if n < 2:
        raise ConstantDatasetError("need at least 2 samples overall")
    total = math.fsum(float(np.sum(_samples64(f))) for f in frames)
    mean = total / n
    ssq = math.fsum(float(np.sum((_samples64(f) - mean) ** 2)) for f in frames)
    if ssq == 0.0:
        raise ConstantDatasetError("all samples identical")
    return DatasetStats(mean=mean, std=math.sqrt(ssq / n), n_samples=n)


def standardize(frame: RFFrame, stats: DatasetStats) -> RFFrame:
    """Subtract the dataset mean and divide by the dataset std."""
    return frame.with_samples((_samples64(frame) - stats.mean) / stats.std)


_METHODS = {
    "maxabs": max_abs,
    "robust": robust,
    "minmax01": minmax01,
    "minmax11": minmax11,
}


def apply_method(frame: RFFrame, method: str, stats: DatasetStats | None = None) -> RFFrame:
    """Dispatch by method name; ``standardize`` requires ``stats``."""
    if method == "standardize":
        if stats is None:
            raise SchemaError("standardize requires dataset stats")
        return standardize(frame, stats)
    try:
        fn = _METHODS[method]
    except KeyError:
        raise SchemaError(f"unknown normalization method '{method}'") from None
    return fn(frame)

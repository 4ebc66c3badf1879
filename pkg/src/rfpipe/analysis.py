"""Signal-level diagnostics: column traces, histograms, and region metrics.

These implement the comparisons behind the demonstration figures: the
middle-column RF traces with the bright-reflector support excluded, the
amplitude histograms under each normalization, and the cyst-contrast metric
on B-mode images.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    DimensionMismatchError,
    IndexOutOfRangeError,
    RegionError,
    SchemaError,
    ZeroDenominatorError,
)
from .frame import BModeImage, RFFrame


@dataclass(frozen=True)
class Histogram:
    """Bin edges (ascending, n_bins+1) and nonnegative integer counts."""

    edges: np.ndarray
    counts: np.ndarray

    def __post_init__(self):
        edges = np.asarray(self.edges, dtype=np.float64)
        counts = np.asarray(self.counts, dtype=np.int64)
        if edges.ndim != 1 or counts.ndim != 1 or edges.size != counts.size + 1:
            raise SchemaError("need n_bins+1 edges for n_bins counts")
        if not np.all(np.diff(edges) > 0):
            raise SchemaError("edges must be strictly increasing")
        if counts.min() < 0:
            raise SchemaError("counts must be nonnegative")
        edges.setflags(write=False)
        counts.setflags(write=False)
        object.__setattr__(self, "edges", edges)
        object.__setattr__(self, "counts", counts)

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    def centers(self) -> np.ndarray:
        return 0.5 * (self.edges[:-1] + self.edges[1:])

    def mass_within(self, bound: float) -> float:
        """Fraction of counts in bins whose center lies within [-bound, bound]."""
        inside = np.abs(self.centers()) <= bound
        return float(self.counts[inside].sum()) / self.total

    def binned_std(self) -> float:
        """Standard deviation of the binned distribution (bin centers)."""
        c = self.centers()
        w = self.counts / self.total
        mean = float(np.sum(w * c))
        return math.sqrt(float(np.sum(w * (c - mean) ** 2)))


@dataclass(frozen=True)
class RegionMask:
    """Axial comparison region: included [start, end) sample intervals.

    ``column`` records which column the mask was built for ("middle" or an
    integer); it is used by the CLI to extract the trace before applying
    the intervals.
    """

    intervals: tuple[tuple[int, int], ...]
    column: int | str = "middle"

    def __post_init__(self):
        ivs = tuple((int(a), int(b)) for a, b in self.intervals)
        if not ivs:
            raise RegionError("mask has no intervals")
        for a, b in ivs:
            if a < 0 or b <= a:
                raise RegionError(f"bad interval [{a}, {b})")
        object.__setattr__(self, "intervals", ivs)

    def to_boolean(self, n: int) -> np.ndarray:
        mask = np.zeros(n, dtype=bool)
        for a, b in self.intervals:
            if a >= n:
                raise RegionError(f"interval [{a}, {b}) outside vector of length {n}")
            mask[a : min(b, n)] = True
        if not mask.any():
            raise RegionError("mask selects no samples")
        return mask

    def to_dict(self) -> dict:
        return {"column": self.column, "include_sample_intervals": [list(iv) for iv in self.intervals]}

    @classmethod
    def from_dict(cls, obj: dict) -> "RegionMask":
        try:
            ivs = [(int(a), int(b)) for a, b in obj["include_sample_intervals"]]
            return cls(intervals=tuple(ivs), column=obj.get("column", "middle"))
        except (KeyError, TypeError, ValueError) as e:
            raise SchemaError(f"bad mask object: {e}") from None


def full_mask(n: int, column: int | str = "middle") -> RegionMask:
    return RegionMask(intervals=((0, n),), column=column)


def exclusion_mask(n: int, exclude: tuple[int, int], column: int | str = "middle") -> RegionMask:
    """Everything except [exclude_start, exclude_end), clamped to [0, n)."""
    lo = max(0, exclude[0])
    hi = min(n, exclude[1])
    intervals = []
    if lo > 0:
        intervals.append((0, lo))
    if hi < n:
        intervals.append((hi, n))
    if not intervals:
        raise RegionError("exclusion covers the whole vector")
    return RegionMask(intervals=tuple(intervals), column=column)


def point_arrival_time(x_t: float, z_t: float, x_elem: float, c: float) -> float:
    """Two-way plane-wave (0 deg) arrival of a point at an element."""
    return (z_t + math.hypot(x_t - x_elem, z_t)) / c


def spike_exclusion_mask(
    frame: RFFrame,
    x_t: float,
    z_t: float,
    x_elem: float,
    pulse_fwhm_s: float,
    n_pulse_lengths: float = 3.0,
    column: int | str = "middle",
) -> RegionMask:
    """Mask excluding +-``n_pulse_lengths`` pulse lengths around the spike.

    The spike is the point target's two-way arrival at the analyzed
    element; the pulse length unit is the -6 dB envelope duration.
    """
    arrival = point_arrival_time(x_t, z_t, x_elem, frame.c)
    half = n_pulse_lengths * pulse_fwhm_s
    lo = int(math.floor((arrival - half - frame.t0) * frame.fs))
    hi = int(math.ceil((arrival + half - frame.t0) * frame.fs)) + 1
    return exclusion_mask(frame.n0, (lo, hi), column=column)


def extract_column(frame: RFFrame, col: int) -> np.ndarray:
    """Axial vector at a column; the middle column is floor(n1/2)."""
    if frame.n2 != 1:
        raise DimensionMismatchError("column extraction expects a single-transmit frame")
    if not 0 <= col < frame.n1:
        raise IndexOutOfRangeError(f"column {col} outside [0, {frame.n1})")
    return np.asarray(frame.samples[:, col, 0], dtype=np.float64)


def middle_column(frame: RFFrame) -> np.ndarray:
    return extract_column(frame, frame.n1 // 2)


def resolve_column(frame: RFFrame, column: int | str) -> int:
    if column == "middle":
        return frame.n1 // 2
    return int(column)


def histogram(frame: RFFrame, n_bins: int, value_range: tuple[float, float] | None = None) -> Histogram:
    """Histogram of all samples; values outside the range land in end bins."""
    if n_bins < 1:
        raise SchemaError(f"n_bins must be >= 1, got {n_bins}")
    data = np.asarray(frame.samples, dtype=np.float64).ravel()
    if value_range is None:
        lo, hi = float(data.min()), float(data.max())
    else:
        lo, hi = float(value_range[0]), float(value_range[1])
        if not hi > lo:
            raise SchemaError(f"empty histogram range ({lo}, {hi})")
    if hi == lo:
        lo, hi = lo - 0.5, hi + 0.5
    counts, edges = np.histogram(np.clip(data, lo, hi), bins=n_bins, range=(lo, hi))
    return Histogram(edges=edges, counts=counts)


def symmetric_range(frame: RFFrame) -> tuple[float, float]:
    """Zero-centered range covering the frame's peak magnitude."""
    m = float(np.max(np.abs(frame.samples)))
    if m == 0.0:
        m = 0.5
    return (-m, m)


def _rms(v: np.ndarray) -> float:
    return math.sqrt(float(np.mean(v * v)))


def amplitude_ratio(a: np.ndarray, b: np.ndarray, mask: RegionMask) -> float:
    """RMS(a)/RMS(b) over the masked samples."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape or a.ndim != 1:
        raise DimensionMismatchError("vectors must be 1-D with equal length")
    m = mask.to_boolean(a.size)
    denom = _rms(b[m])
    if denom == 0.0:
        raise ZeroDenominatorError("RMS of denominator vector is zero over the mask")
    return _rms(a[m]) / denom


def overlap_error(a: np.ndarray, b: np.ndarray, mask: RegionMask) -> float:
    """Relative RMSE over the mask: RMS(a-b)/RMS(a)."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape or a.ndim != 1:
        raise DimensionMismatchError("vectors must be 1-D with equal length")
    m = mask.to_boolean(a.size)
    denom = _rms(a[m])
    if denom == 0.0:
        raise ZeroDenominatorError("RMS of reference vector is zero over the mask")
    return _rms(a[m] - b[m]) / denom


@dataclass(frozen=True)
class CircleRegion:
    """Disk in image coordinates (meters)."""

    x_m: float
    z_m: float
    r_m: float

    def mask(self, x_axis: np.ndarray, z_axis: np.ndarray) -> np.ndarray:
        dx2 = (x_axis[None, :] - self.x_m) ** 2
        dz2 = (z_axis[:, None] - self.z_m) ** 2
        return dx2 + dz2 <= self.r_m**2


@dataclass(frozen=True)
class AnnulusRegion:
    """Ring in image coordinates (meters)."""

    x_m: float
    z_m: float
    r_in_m: float
    r_out_m: float

    def mask(self, x_axis: np.ndarray, z_axis: np.ndarray) -> np.ndarray:
        d2 = (x_axis[None, :] - self.x_m) ** 2 + (z_axis[:, None] - self.z_m) ** 2
        return (d2 >= self.r_in_m**2) & (d2 <= self.r_out_m**2)


def bmode_axes(bmode: BModeImage, x0: float | None = None, z0: float = 0.0):
    """Pixel-center axes; lateral axis is centered on 0 unless x0 is given."""
    if x0 is None:
        x0 = -(bmode.n_x - 1) / 2.0 * bmode.dx
    x_axis = x0 + np.arange(bmode.n_x) * bmode.dx
    z_axis = z0 + np.arange(bmode.n_z) * bmode.dz
    return x_axis, z_axis


def contrast(
    bmode: BModeImage,
    cyst,
    background,
    x0: float | None = None,
    z0: float = 0.0,
) -> float:
    """Mean dB inside the cyst region minus mean dB in the background.

    More negative is better (darker cyst); regions must be disjoint,
    nonempty, and within the grid.
    """
    x_axis, z_axis = bmode_axes(bmode, x0=x0, z0=z0)
    cyst_mask = cyst.mask(x_axis, z_axis)
    bg_mask = background.mask(x_axis, z_axis)
    if not cyst_mask.any() or not bg_mask.any():
        raise RegionError("contrast regions select no pixels")
    if (cyst_mask & bg_mask).any():
        raise RegionError("contrast regions overlap")
    return float(bmode.grid[cyst_mask].mean() - bmode.grid[bg_mask].mean())


def write_column_csv(path, values: np.ndarray, fs: float, t0: float) -> None:
    """CSV trace with columns sample_index, time_s, value."""
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["sample_index", "time_s", "value"])
        for i, v in enumerate(np.asarray(values, dtype=np.float64)):
            writer.writerow([i, repr(t0 + i / fs), repr(float(v))])


def write_histogram_csv(path, hist: Histogram) -> None:
    """CSV with columns bin_left, bin_right, count."""
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["bin_left", "bin_right", "count"])
        for left, right, count in zip(hist.edges[:-1], hist.edges[1:], hist.counts):
            writer.writerow([repr(float(left)), repr(float(right)), int(count)])


def write_metrics_json(path, metrics: dict) -> None:
    with open(path, "w") as f:
        json.dump(metrics, f, indent=2, sort_keys=True)
        f.write("\n")

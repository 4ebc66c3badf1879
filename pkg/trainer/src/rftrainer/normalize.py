"""Per-frame normalization used at train and inference time.

``conventional`` divides by the frame's peak magnitude; ``robust`` divides
the peak-normalized frame by its own population standard deviation. The
method is part of the checkpoint and mismatched evaluation is rejected.
"""

from __future__ import annotations

import numpy as np

METHODS = ("conventional", "robust")


class NormalizationMismatch(Exception):
    pass


def normalize_frame(samples: np.ndarray, method: str) -> np.ndarray:
    x = np.asarray(samples, dtype=np.float64)
    peak = float(np.max(np.abs(x)))
    if peak == 0.0:
        raise ValueError("all-zero frame")
    y = x / peak
    if method == "conventional":
        return y
    if method == "robust":
        sigma = float(np.std(y))
        if sigma == 0.0:
            raise ValueError("constant frame")
        return y / sigma
    raise NormalizationMismatch(f"unknown normalization '{method}'")

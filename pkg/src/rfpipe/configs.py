"""Probe, phantom, and aberration configuration types with JSON parsing.

All JSON parsing is strict: unknown keys and wrongly typed fields raise
:class:`SchemaError`; geometric inconsistencies raise :class:`GeometryError`.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import GeometryError, SchemaError

# L11-5v-like linear array and tissue defaults; see README for provenance.
DEFAULT_N_ELEMENTS = 128
DEFAULT_PITCH_M = 0.3e-3
DEFAULT_SOUND_SPEED = 1540.0
DEFAULT_F0_HZ = 5.208e6
DEFAULT_FS_HZ = 20.832e6
DEFAULT_FRAC_BW = 0.6


@dataclass(frozen=True)
class ProbeGeometry:
    """Linear array at z = 0, element x-positions centered on 0."""

    n_elements: int = DEFAULT_N_ELEMENTS
    pitch_m: float = DEFAULT_PITCH_M

    def __post_init__(self):
        if self.n_elements < 2:
            raise SchemaError(f"n_elements must be >= 2, got {self.n_elements}")
        if not self.pitch_m > 0:
            raise SchemaError(f"pitch_m must be > 0, got {self.pitch_m}")

    def element_x(self) -> np.ndarray:
        """Strictly increasing x-positions in meters, symmetric about 0."""
        n = self.n_elements
        return (np.arange(n) - (n - 1) / 2.0) * self.pitch_m

    @property
    def aperture_m(self) -> float:
        return (self.n_elements - 1) * self.pitch_m


@dataclass(frozen=True)
class Cyst:
    x_m: float
    z_m: float
    r_m: float

    def __post_init__(self):
        if not self.r_m > 0:
            raise GeometryError(f"cyst radius must be > 0, got {self.r_m}")


@dataclass(frozen=True)
class PointTarget:
    x_m: float
    z_m: float
    gain_db: float = 40.0


@dataclass(frozen=True)
class Phantom:
    """Scatterer cloud specification.

    ``scatterer_density`` is in scatterers per mm^2; the extent spans
    x in [-width_m/2, width_m/2] and z in [z_min_m, z_min_m + depth_m].
    Cyst and target coordinates are absolute. ``gain_db`` of the point
    target is relative to the RMS amplitude of the diffuse scatterers.

    The axial offset keeps scatterers off the transducer face, where the
    point-source model produces unphysical wide-angle echoes.
    """

    width_m: float = 0.045
    depth_m: float = 0.040
    z_min_m: float = 0.005
    scatterer_density: float = 6.0
    amp_sigma: float = 1.0
    cysts: tuple[Cyst, ...] = ()
    point_target: PointTarget | None = None
    seed: int = 0

    def __post_init__(self):
        if not (self.width_m > 0 and self.depth_m > 0):
            raise GeometryError("phantom extent must be positive")
        if self.z_min_m < 0:
            raise GeometryError("z_min_m must be >= 0")
        if self.scatterer_density < 0:
            raise GeometryError("scatterer density must be >= 0")
        if not self.amp_sigma > 0:
            raise GeometryError("amp_sigma must be > 0")
        object.__setattr__(self, "cysts", tuple(self.cysts))
        half_w = self.width_m / 2
        z_lo, z_hi = self.z_min_m, self.z_min_m + self.depth_m
        for cyst in self.cysts:
            if (
                abs(cyst.x_m) + cyst.r_m > half_w
                or cyst.z_m - cyst.r_m < z_lo
                or cyst.z_m + cyst.r_m > z_hi
            ):
                raise GeometryError(
                    f"cyst at ({cyst.x_m}, {cyst.z_m}) r={cyst.r_m} extends outside the phantom"
                )
        t = self.point_target
        if t is not None:
            if abs(t.x_m) > half_w or not z_lo <= t.z_m <= z_hi:
                raise GeometryError(f"point target at ({t.x_m}, {t.z_m}) outside the phantom")
            for cyst in self.cysts:
                if math.hypot(t.x_m - cyst.x_m, t.z_m - cyst.z_m) <= cyst.r_m:
                    raise GeometryError("point target inside a cyst")

    @property
    def z_max_m(self) -> float:
        return self.z_min_m + self.depth_m

    def without_target(self) -> "Phantom":
        return replace(self, point_target=None)


DEFAULT_CYST_X = 0.005
DEFAULT_CYST_Z = 0.020
DEFAULT_CYST_R = 0.002


def default_phantom(seed: int = 0, density: float = 6.0, gain_db: float | None = 40.0) -> Phantom:
    """Two anechoic cysts at (+-5 mm, 20 mm) plus an optional point target.

    The cysts sit inside the lateral strip a 64-element plane wave actually
    insonifies, so their contrast is measurable at desk scale.
    """
    target = None if gain_db is None else PointTarget(0.0, 0.027, gain_db)
    return Phantom(
        scatterer_density=density,
        cysts=(
            Cyst(-DEFAULT_CYST_X, DEFAULT_CYST_Z, DEFAULT_CYST_R),
            Cyst(DEFAULT_CYST_X, DEFAULT_CYST_Z, DEFAULT_CYST_R),
        ),
        point_target=target,
        seed=seed,
    )


_MISSING = object()


def _require(obj: dict, key: str, types, default=_MISSING):
    if key in obj:
        v = obj[key]
    elif default is not _MISSING:
        return default
    else:
        raise SchemaError(f"missing required field '{key}'")
    if isinstance(v, bool) or not isinstance(v, types):
        raise SchemaError(f"field '{key}' has wrong type {type(v).__name__}")
    return v


def _check_keys(obj: dict, allowed: set, what: str):
    if not isinstance(obj, dict):
        raise SchemaError(f"{what} must be a JSON object")
    unknown = set(obj) - allowed
    if unknown:
        raise SchemaError(f"unknown {what} field(s): {', '.join(sorted(unknown))}")


def phantom_from_dict(obj: dict) -> Phantom:
    _check_keys(
        obj,
        {
            "width_m",
            "depth_m",
            "z_min_m",
            "scatterer_density",
            "amp_sigma",
            "cysts",
            "point_target",
            "seed",
        },
        "phantom",
    )
    cysts = []
    raw_cysts = _require(obj, "cysts", list, default=[])
    for i, c in enumerate(raw_cysts):
        _check_keys(c, {"x_m", "z_m", "r_m"}, f"cyst[{i}]")
        cysts.append(
            Cyst(
                _require(c, "x_m", (int, float)),
                _require(c, "z_m", (int, float)),
                _require(c, "r_m", (int, float)),
            )
        )
    target = None
    raw_target = obj.get("point_target")
    if raw_target is not None:
        _check_keys(raw_target, {"x_m", "z_m", "gain_db"}, "point_target")
        target = PointTarget(
            _require(raw_target, "x_m", (int, float)),
            _require(raw_target, "z_m", (int, float)),
            _require(raw_target, "gain_db", (int, float), default=40.0),
        )
    return Phantom(
        width_m=_require(obj, "width_m", (int, float), default=0.045),
        depth_m=_require(obj, "depth_m", (int, float), default=0.040),
        z_min_m=_require(obj, "z_min_m", (int, float), default=0.005),
        scatterer_density=_require(obj, "scatterer_density", (int, float), default=6.0),
        amp_sigma=_require(obj, "amp_sigma", (int, float), default=1.0),
        cysts=tuple(cysts),
        point_target=target,
        seed=_require(obj, "seed", int, default=0),
    )


def parse_phantom(text: str) -> Phantom:
    """Parse and validate a phantom JSON document."""
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as e:
        raise SchemaError(f"invalid JSON: {e}") from None
    return phantom_from_dict(obj)


def phantom_to_dict(p: Phantom) -> dict:
    out = {
        "width_m": p.width_m,
        "depth_m": p.depth_m,
        "z_min_m": p.z_min_m,
        "scatterer_density": p.scatterer_density,
        "amp_sigma": p.amp_sigma,
        "cysts": [{"x_m": c.x_m, "z_m": c.z_m, "r_m": c.r_m} for c in p.cysts],
        "seed": p.seed,
    }
    if p.point_target is not None:
        t = p.point_target
        out["point_target"] = {"x_m": t.x_m, "z_m": t.z_m, "gain_db": t.gain_db}
    return out


def probe_from_dict(obj: dict) -> ProbeGeometry:
    _check_keys(obj, {"n_elements", "pitch_m"}, "probe")
    return ProbeGeometry(
        n_elements=_require(obj, "n_elements", int, default=DEFAULT_N_ELEMENTS),
        pitch_m=_require(obj, "pitch_m", (int, float), default=DEFAULT_PITCH_M),
    )


def probe_to_dict(p: ProbeGeometry) -> dict:
    return {"n_elements": p.n_elements, "pitch_m": p.pitch_m}


@dataclass(frozen=True)
class AberrationProfile:
    """Near-field phase screen: one two-way delay per element, in seconds."""

    delays_s: np.ndarray
    rms_ns: float
    corr_len_elements: float
    seed: int = 0

    def __post_init__(self):
        d = np.asarray(self.delays_s, dtype=np.float64)
        if d.ndim != 1 or d.size == 0:
            raise SchemaError("delays_s must be a non-empty 1-D array")
        if not np.isfinite(d).all():
            raise SchemaError("delays_s contains NaN or Inf")
        rms = float(np.sqrt(np.mean(d * d)))
        target = self.rms_ns * 1e-9
        if target == 0:
            if rms != 0:
                raise SchemaError("rms_ns is 0 but delays are nonzero")
        elif abs(rms - target) > 1e-3 * target:
            raise SchemaError(f"delay RMS {rms} differs from requested {target} by > 0.1%")
        d.setflags(write=False)
        object.__setattr__(self, "delays_s", d)

    @property
    def n_elements(self) -> int:
        return self.delays_s.size


def zero_aberration(n_elements: int) -> AberrationProfile:
    return AberrationProfile(np.zeros(n_elements), rms_ns=0.0, corr_len_elements=1.0, seed=0)


def aberration_to_dict(ab: AberrationProfile) -> dict:
    return {
        "delays_s": [float(v) for v in ab.delays_s],
        "rms_ns": ab.rms_ns,
        "corr_len_elements": ab.corr_len_elements,
        "seed": ab.seed,
    }


def aberration_from_dict(obj: dict) -> AberrationProfile:
    _check_keys(obj, {"delays_s", "rms_ns", "corr_len_elements", "seed"}, "aberration")
    delays = _require(obj, "delays_s", list)
    return AberrationProfile(
        delays_s=np.asarray(delays, dtype=np.float64),
        rms_ns=_require(obj, "rms_ns", (int, float)),
        corr_len_elements=_require(obj, "corr_len_elements", (int, float)),
        seed=_require(obj, "seed", int, default=0),
    )

"""Plane-wave delay-and-sum reconstruction, envelope detection, and display.

The DAS delay model for a 0-degree plane wave is transmit z/c plus the
receive path sqrt((x - x_j)^2 + z^2)/c per element j; channels are sampled
by linear interpolation, weighted by a growing-aperture window (aperture
width z/f_number), summed, and divided by the summed weights so speckle
brightness stays depth-uniform. The envelope is the magnitude of the
per-column FFT analytic signal, and log compression pins the image peak to
exactly 0 dB.

Image frames follow the convention that the lateral grid is centered on
x = 0 and t0 encodes the depth of the first row (t0 = 2*z0/c).
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .configs import ProbeGeometry
from .errors import (
    AllZeroFrameError,
    DimensionMismatchError,
    GridOutOfRangeError,
    InvalidFrameError,
    SchemaError,
)
from .frame import BModeImage, FrameKind, RFFrame

APODIZATIONS = ("hann", "rect")


@dataclass(frozen=True)
class DasParams:
    """Reconstruction grid and aperture controls.

    The grid has ``n_z`` rows spaced ``dz`` starting at ``z0`` and ``n_x``
    columns spaced ``dx`` starting at ``x0`` (use :func:`centered_grid` for
    a grid symmetric about x = 0). ``f_number`` is depth over aperture.
    """

    x0: float
    z0: float
    dx: float
    dz: float
    n_x: int
    n_z: int
    f_number: float = 1.5
    apodization: str = "hann"
    angle_rad: float = 0.0

    def __post_init__(self):
        if self.n_x < 1 or self.n_z < 1:
            raise SchemaError("grid must have at least one pixel per axis")
        if not (self.dx > 0 and self.dz > 0):
            raise SchemaError("pixel spacing must be > 0")
        if not self.f_number > 0:
            raise SchemaError("f_number must be > 0")
        if self.z0 < 0:
            raise SchemaError("z0 must be >= 0")
        if self.apodization not in APODIZATIONS:
            raise SchemaError(f"apodization must be one of {APODIZATIONS}")

    def x_axis(self) -> np.ndarray:
        return self.x0 + np.arange(self.n_x) * self.dx

    def z_axis(self) -> np.ndarray:
        return self.z0 + np.arange(self.n_z) * self.dz


def centered_grid(
    width_m: float,
    z_min: float,
    z_max: float,
    dx: float,
    dz: float,
    f_number: float = 1.5,
    apodization: str = "hann",
) -> DasParams:
    """Grid symmetric about x = 0 spanning the given extent."""
    n_x = int(math.floor(width_m / dx)) + 1
    x0 = -(n_x - 1) / 2.0 * dx
    n_z = int(math.floor((z_max - z_min) / dz)) + 1
    return DasParams(
        x0=x0, z0=z_min, dx=dx, dz=dz, n_x=n_x, n_z=n_z, f_number=f_number, apodization=apodization
    )


def das(
    frame: RFFrame, probe: ProbeGeometry, params: DasParams, threads: int = 1
) -> RFFrame:
    """Delay-and-sum a plane-wave channel frame onto the grid.

    Returns a pre-envelope RF image (kind Image) whose axial sample rate is
    the RF-equivalent c/(2*dz). Rows are independent, so the result is
    bitwise identical for any ``threads``.
    """
    if frame.kind is not FrameKind.CHANNEL_DATA:
        raise DimensionMismatchError(f"need channel data, got {frame.kind.name}")
    if frame.n1 != probe.n_elements:
        raise DimensionMismatchError(
            f"frame has {frame.n1} channels, probe has {probe.n_elements} elements"
        )
    if frame.n2 != 1:
        raise DimensionMismatchError("channel frame must have a single transmit")

    ch = np.asarray(frame.samples[:, :, 0], dtype=np.float64)
    n0 = ch.shape[0]
    elem_x = probe.element_x()
    x_px = params.x_axis()
    z_px = params.z_axis()
    c, fs, t0 = frame.c, frame.fs, frame.t0
    cos_a, sin_a = math.cos(params.angle_rad), math.sin(params.angle_rad)
    image = np.zeros((params.n_z, params.n_x), dtype=np.float64)
    any_in_range = np.zeros(params.n_z, dtype=bool)

    def fill_row(r: int):
        z = z_px[r]
        if z <= 0:
            return
        tau = (z * cos_a + x_px * sin_a)[:, None] / c + (
            np.hypot(x_px[:, None] - elem_x[None, :], z) / c
        )
        p = (tau - t0) * fs
        valid = (p >= 0.0) & (p <= n0 - 1)
        p0 = np.clip(np.floor(p), 0, n0 - 2).astype(np.int64)
        w = p - p0
        cols = np.arange(probe.n_elements)[None, :]
        vals = (1.0 - w) * ch[p0, cols] + w * ch[p0 + 1, cols]
        vals = np.where(valid, vals, 0.0)
        aperture = z / params.f_number
        u = (elem_x[None, :] - x_px[:, None]) / aperture
        inside = np.abs(u) <= 0.5
        if params.apodization == "hann":
            weights = np.where(inside, np.cos(math.pi * u) ** 2, 0.0)
        else:
            weights = inside.astype(np.float64)
        # Floor the weight sum at one full element: pixels whose aperture
        # is starved (outside the array footprint) must attenuate, not
        # amplify, or edge artifacts dominate the image peak.
        norm = np.maximum(weights.sum(axis=1), 1.0)
        image[r] = np.sum(vals * weights, axis=1) / norm
        any_in_range[r] = bool((valid & inside).any())

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(fill_row, range(params.n_z)))
    else:
        for r in range(params.n_z):
            fill_row(r)

    if not any_in_range.any():
        raise GridOutOfRangeError("no grid pixel maps into the recorded channel data")
    return RFFrame(
        kind=FrameKind.IMAGE,
        samples=image[:, :, None],
        fs=c / (2.0 * params.dz),
        f0=frame.f0,
        c=c,
        t0=2.0 * params.z0 / c,
        pitch=frame.pitch,
        dx=params.dx,
        dz=params.dz,
    )


def envelope(frame: RFFrame) -> RFFrame:
    """Magnitude of the per-column analytic signal.

    Computed by FFT along the axial axis: negative frequencies zeroed,
    positive doubled, DC and Nyquist kept.
    """
    if frame.n0 < 4:
        raise InvalidFrameError("envelope needs at least 4 axial samples")
    x = np.asarray(frame.samples, dtype=np.float64)
    n0 = x.shape[0]
    h = np.zeros(n0)
    h[0] = 1.0
    if n0 % 2 == 0:
        h[1 : n0 // 2] = 2.0
        h[n0 // 2] = 1.0
    else:
        h[1 : (n0 + 1) // 2] = 2.0
    analytic = np.fft.ifft(np.fft.fft(x, axis=0) * h[:, None, None], axis=0)
    return frame.with_samples(np.abs(analytic))


def log_compress(env: RFFrame, dynamic_range_db: float = 50.0) -> BModeImage:
    """Log-compress a nonnegative envelope image to dB below its peak."""
    if env.n2 != 1:
        raise DimensionMismatchError("log compression expects a single-transmit image")
    grid = np.asarray(env.samples[:, :, 0], dtype=np.float64)
    if grid.min() < 0:
        raise InvalidFrameError("envelope values must be nonnegative")
    peak = grid.max()
    if peak == 0.0:
        raise AllZeroFrameError("log compression of an all-zero envelope")
    with np.errstate(divide="ignore"):
        db = 20.0 * np.log10(grid / peak)
    db = np.clip(db, -dynamic_range_db, 0.0)
    return BModeImage(grid=db, dx=env.dx, dz=env.dz, dynamic_range_db=dynamic_range_db)


def export_pgm(bmode: BModeImage, path) -> None:
    """Write an 8-bit binary PGM; [-DR, 0] dB maps linearly to [0, 255].

    Rows are written top-to-bottom with row 0 (the shallowest depth) first.
    """
    dr = bmode.dynamic_range_db
    pix = np.rint((bmode.grid + dr) / dr * 255.0)
    pix = np.clip(pix, 0, 255).astype(np.uint8)
    header = f"P5\n{bmode.n_x} {bmode.n_z}\n255\n".encode("ascii")
    with open(path, "wb") as f:
        f.write(header)
        f.write(pix.tobytes())

"""Plane-wave ultrasound RF toolkit: simulation, normalization, beamforming."""

from .configs import (
    AberrationProfile,
    Cyst,
    Phantom,
    PointTarget,
    ProbeGeometry,
    default_phantom,
    parse_phantom,
    zero_aberration,
)
from .frame import BModeImage, FrameKind, RFFrame
from .normalize import DatasetStats, dataset_stats, max_abs, minmax01, minmax11, robust, standardize
from .sim import (
    PlaneWaveTx,
    PulseModel,
    ScattererCloud,
    downsample,
    gen_aberration,
    plane_wave_tx,
    pulse_eval,
    sample_phantom,
    simulate_fsa,
    synth_planewave,
)
from .usrf import read_frame, write_frame

__version__ = "0.1.0"

__all__ = [
    "AberrationProfile",
    "BModeImage",
    "Cyst",
    "DatasetStats",
    "FrameKind",
    "Phantom",
    "PlaneWaveTx",
    "PointTarget",
    "ProbeGeometry",
    "PulseModel",
    "RFFrame",
    "ScattererCloud",
    "dataset_stats",
    "default_phantom",
    "downsample",
    "gen_aberration",
    "max_abs",
    "minmax01",
    "minmax11",
    "parse_phantom",
    "plane_wave_tx",
    "pulse_eval",
    "read_frame",
    "robust",
    "sample_phantom",
    "simulate_fsa",
    "standardize",
    "synth_planewave",
    "write_frame",
    "zero_aberration",
]

"""Toy aberration-correction trainer comparing RF normalization schemes."""

from .evaluate import evaluate
from .manifest import Manifest, ManifestError, load_manifest
from .normalize import METHODS, NormalizationMismatch, normalize_frame
from .train import TrainConfig, load_checkpoint, train
from .unet import UNet

__version__ = "0.1.0"

__all__ = [
    "METHODS",
    "Manifest",
    "ManifestError",
    "NormalizationMismatch",
    "TrainConfig",
    "UNet",
    "evaluate",
    "load_checkpoint",
    "load_manifest",
    "normalize_frame",
    "train",
]

"""Training loop: aberration-to-aberration mapping on the corpus.

Each epoch pairs every training frame with a different aberrated version of
the same speckle realization according to the manifest's derangement table
for that epoch. Frames are normalized per the configured method, then
standardized with corpus-wide statistics, then mapped affinely into [0, 1]
to match the sigmoid output layer; the map is recorded in the checkpoint.
The loss is L1 (stand-in for the adaptive mixed loss used at full scale)
and the optimizer is Adam with zero weight decay, learning rate halved at
the epoch midpoint.
"""

from __future__ import annotations

import csv
import math
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np
import torch

from .manifest import Manifest
from .normalize import METHODS, NormalizationMismatch, normalize_frame
from .unet import UNet
from .usrf import read_frame

AFFINE_SIGMAS = 4.0


@dataclass(frozen=True)
class TrainConfig:
    normalization: str = "robust"
    epochs: int = 100
    batch_size: int = 32
    lr: float = 1e-3
    seed: int = 0
    depth: int = 3
    base_width: int = 8
    crop_start: int = 0
    crop_length: int | None = None  # None: largest multiple of 2**depth

    def __post_init__(self):
        if self.normalization not in METHODS:
            raise NormalizationMismatch(f"normalization must be one of {METHODS}")
        if self.epochs < 1 or self.batch_size < 1:
            raise ValueError("epochs and batch_size must be >= 1")
        if self.crop_start < 0:
            raise ValueError("crop_start must be >= 0")


def _crop_window(n0: int, config: TrainConfig) -> tuple[int, int]:
    d = 2**config.depth
    start = min(config.crop_start, n0 - d)
    length = config.crop_length or ((n0 - start) // d) * d
    if length % d != 0 or start + length > n0 or length < d:
        raise ValueError(f"bad crop window ({start}, {length}) for n0={n0}, depth={config.depth}")
    return start, length


def prepare_training_tensors(manifest: Manifest, config: TrainConfig):
    """Load, crop, normalize, standardize, and [0,1]-map the training frames.

    Returns (tensor [n, 1, L, n_ch], stats dict, crop window).
    """
    frames = [read_frame(p) for p in manifest.train_files()]
    start, length = _crop_window(frames[0].n0, config)
    normed = [
        normalize_frame(f.samples[start : start + length, :, 0], config.normalization)
        for f in frames
    ]
    stacked = np.stack(normed)
    mean = float(stacked.mean())
    std = float(stacked.std())
    if std == 0.0:
        raise ValueError("degenerate corpus: zero variance")
    mapped = ((stacked - mean) / std + AFFINE_SIGMAS) / (2.0 * AFFINE_SIGMAS)
    mapped = np.clip(mapped, 0.0, 1.0)
    tensor = torch.from_numpy(mapped.astype(np.float32)).unsqueeze(1)
    stats = {"mean": mean, "std": std, "affine_sigmas": AFFINE_SIGMAS}
    return tensor, stats, (start, length)


def train(manifest: Manifest, config: TrainConfig, out_dir) -> Path:
    """Train one model; writes checkpoint.pt and loss.csv, returns the
    checkpoint path."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    torch.manual_seed(config.seed)

    tensors, stats, crop = prepare_training_tensors(manifest, config)
    id_to_row = {vid: k for k, vid in enumerate(manifest.split_train)}
    n_train = tensors.shape[0]

    model = UNet(depth=config.depth, base_width=config.base_width)
    optimizer = torch.optim.Adam(model.parameters(), lr=config.lr, weight_decay=0.0)
    scheduler = torch.optim.lr_scheduler.MultiStepLR(
        optimizer, milestones=[max(1, config.epochs // 2)], gamma=0.5
    )
    loss_fn = torch.nn.L1Loss()

    history = []
    model.train()
    for epoch in range(config.epochs):
        row = manifest.pairing[epoch % len(manifest.pairing)]
        target_idx = torch.tensor([id_to_row[t] for t in row], dtype=torch.long)
        perm = torch.arange(n_train)
        epoch_loss = 0.0
        for start in range(0, n_train, config.batch_size):
            batch = perm[start : start + config.batch_size]
            inputs = tensors[batch]
            targets = tensors[target_idx[batch]]
            optimizer.zero_grad()
            loss = loss_fn(model(inputs), targets)
            loss.backward()
            optimizer.step()
            epoch_loss += float(loss.detach()) * batch.numel()
        history.append((epoch, epoch_loss / n_train, optimizer.param_groups[0]["lr"]))
        scheduler.step()

    with open(out_dir / "loss.csv", "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["epoch", "loss", "lr"])
        for epoch, loss, lr in history:
            writer.writerow([epoch, repr(loss), repr(lr)])

    checkpoint_path = out_dir / "checkpoint.pt"
    torch.save(
        {
            "model": model.state_dict(),
            "arch": {"depth": config.depth, "base_width": config.base_width},
            "normalization": config.normalization,
            "stats": stats,
            "crop": {"start": crop[0], "length": crop[1]},
            "config": asdict(config),
            "loss_substitute": "l1",
            "final_loss": history[-1][1],
        },
        checkpoint_path,
    )
    return checkpoint_path


def load_checkpoint(path):
    ckpt = torch.load(path, map_location="cpu", weights_only=False)
    model = UNet(depth=ckpt["arch"]["depth"], base_width=ckpt["arch"]["base_width"])
    model.load_state_dict(ckpt["model"])
    model.eval()
    return model, ckpt

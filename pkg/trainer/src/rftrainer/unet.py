"""Small image-to-image U-Net with a sigmoid output layer."""

from __future__ import annotations

import torch
from torch import nn


def _block(c_in: int, c_out: int) -> nn.Sequential:
    return nn.Sequential(
        nn.Conv2d(c_in, c_out, 3, padding=1),
        nn.ReLU(inplace=True),
        nn.Conv2d(c_out, c_out, 3, padding=1),
        nn.ReLU(inplace=True),
    )


class UNet(nn.Module):
    """Encoder-decoder with skip connections; input dims must be divisible
    by 2**depth. Output passes through a sigmoid, so targets live in [0, 1].
    """

    def __init__(self, depth: int = 3, base_width: int = 12):
        super().__init__()
        self.depth = depth
        widths = [base_width * 2**k for k in range(depth + 1)]
        self.down = nn.ModuleList()
        c_prev = 1
        for w in widths[:-1]:
            self.down.append(_block(c_prev, w))
            c_prev = w
        self.pool = nn.MaxPool2d(2)
        self.bottom = _block(widths[-2], widths[-1])
        self.up = nn.ModuleList()
        self.up_conv = nn.ModuleList()
        for w_skip, w_in in zip(reversed(widths[:-1]), reversed(widths[1:])):
            self.up.append(nn.ConvTranspose2d(w_in, w_skip, 2, stride=2))
            self.up_conv.append(_block(2 * w_skip, w_skip))
        self.head = nn.Conv2d(widths[0], 1, 1)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        skips = []
        for block in self.down:
            x = block(x)
            skips.append(x)
            x = self.pool(x)
        x = self.bottom(x)
        for up, conv, skip in zip(self.up, self.up_conv, reversed(skips)):
            x = up(x)
            x = conv(torch.cat([skip, x], dim=1))
        return torch.sigmoid(self.head(x))

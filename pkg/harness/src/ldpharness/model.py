"""Classifier architectures for desk-scale and full-scale runs."""

from __future__ import annotations

import torch
from torch import nn


class DeskClassifier(nn.Module):
    """Two convolutional blocks and a pooled linear head.

    Small enough to train on CPU in seconds, strong enough to separate the
    synthetic classes at beta = 0.
    """

    def __init__(self, n_classes: int = 2):
        super().__init__()
        self.features = nn.Sequential(
            nn.Conv2d(1, 8, kernel_size=3, padding=1),
            nn.ReLU(),
            nn.MaxPool2d(4),
            nn.Conv2d(8, 16, kernel_size=3, padding=1),
            nn.ReLU(),
            nn.MaxPool2d(4),
            nn.AdaptiveAvgPool2d((4, 4)),
        )
        self.head = nn.Linear(16 * 4 * 4, n_classes)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        return self.head(torch.flatten(self.features(x), 1))


class _GrayToRgb(nn.Module):
    def forward(self, x: torch.Tensor) -> torch.Tensor:
        return x.repeat(1, 3, 1, 1)


def build_model(mode: str, pretrained: bool = True) -> nn.Module:
    """desk -> DeskClassifier; full -> 18-layer residual network (3-channel stem)."""
    if mode == "desk":
        return DeskClassifier()
    if mode == "full":
        import torchvision.models as tvm  # deferred: full mode only

        weights = tvm.ResNet18_Weights.DEFAULT if pretrained else None
        resnet = tvm.resnet18(weights=weights)
        resnet.fc = nn.Linear(resnet.fc.in_features, 2)
        return nn.Sequential(_GrayToRgb(), resnet)
    raise ValueError(f"mode must be 'desk' or 'full', got {mode!r}")

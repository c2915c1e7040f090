"""Training loop and metrics emission.

The metrics file follows the benchmark orchestrator's contract: per-epoch
train/test accuracies with best values equal to the series maxima.  The
checkpoint-selection epoch (highest validation accuracy) is recorded in the
provenance block; optimizer constants live there too since they are fixed
choices, not tuned per run.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import torch
from torch import nn

from .data import SplitArrays, load_dataset
from .model import build_model


class TrainingDiverged(RuntimeError):
    """The loss became non-finite."""


@dataclass
class HarnessConfig:
    dataset_dir: Path
    epochs: int
    seed: int
    metrics_out: Path
    mode: str = "desk"
    learning_rate: float = 3e-3
    batch_size: int = 8
    pretrained: bool = True

    def __post_init__(self):
        self.dataset_dir = Path(self.dataset_dir)
        self.metrics_out = Path(self.metrics_out)
        if self.epochs < 1:
            raise ValueError(f"epochs must be >= 1, got {self.epochs}")
        if self.batch_size < 1:
            raise ValueError(f"batch_size must be >= 1, got {self.batch_size}")
        if self.mode not in ("desk", "full"):
            raise ValueError(f"mode must be 'desk' or 'full', got {self.mode!r}")


@dataclass
class EpochRecord:
    epoch: int
    train_accuracy: float
    val_accuracy: float
    test_accuracy: float
    loss: float


def _accuracy(model: nn.Module, split: SplitArrays, mean: float, std: float) -> float:
    model.eval()
    with torch.no_grad():
        x = torch.from_numpy((split.images - mean) / std)
        logits = model(x)
        predicted = logits.argmax(dim=1).numpy()
    return float((predicted == split.labels).mean())


def train_and_evaluate(config: HarnessConfig) -> dict:
    """Train on the train split, track accuracies per epoch, write the metrics JSON."""
    splits = load_dataset(config.dataset_dir)
    train = splits["train"]

    # Standardize with train-split statistics so perturbed datasets with very
    # different dynamic ranges all train in a stable regime.
    mean = float(train.images.mean())
    std = float(train.images.std())
    if std < 1e-6:
        std = 1.0

    torch.manual_seed(config.seed)
    model = build_model(config.mode, pretrained=config.pretrained)
    optimizer = torch.optim.Adam(model.parameters(), lr=config.learning_rate)
    loss_fn = nn.CrossEntropyLoss()
    order_rng = torch.Generator().manual_seed(config.seed)

    x_train = torch.from_numpy((train.images - mean) / std)
    y_train = torch.from_numpy(train.labels)

    records: list[EpochRecord] = []
    for epoch in range(1, config.epochs + 1):
        model.train()
        epoch_loss = 0.0
        order = torch.randperm(len(train), generator=order_rng)
        for start in range(0, len(train), config.batch_size):
            batch = order[start : start + config.batch_size]
            optimizer.zero_grad()
            loss = loss_fn(model(x_train[batch]), y_train[batch])
            if not torch.isfinite(loss):
                raise TrainingDiverged(f"non-finite loss at epoch {epoch}")
            loss.backward()
            optimizer.step()
            epoch_loss += float(loss.detach()) * len(batch)
        records.append(
            EpochRecord(
                epoch=epoch,
                train_accuracy=_accuracy(model, splits["train"], mean, std),
                val_accuracy=_accuracy(model, splits["val"], mean, std),
                test_accuracy=_accuracy(model, splits["test"], mean, std),
                loss=epoch_loss / len(train),
            )
        )

    best_train = max(r.train_accuracy for r in records)
    best_test = max(r.test_accuracy for r in records)
    best_epoch = next(r.epoch for r in records if r.test_accuracy == best_test)
    best_val_epoch = max(records, key=lambda r: (r.val_accuracy, -r.epoch)).epoch

    metrics = {
        "epochs": config.epochs,
        "per_epoch": [
            {
                "epoch": r.epoch,
                "train_accuracy": r.train_accuracy,
                "val_accuracy": r.val_accuracy,
                "test_accuracy": r.test_accuracy,
            }
            for r in records
        ],
        "best_train_accuracy": best_train,
        "best_test_accuracy": best_test,
        "best_epoch": best_epoch,
        "provenance": {
            "mode": config.mode,
            "seed": config.seed,
            "optimizer": "adam",
            "learning_rate": config.learning_rate,
            "batch_size": config.batch_size,
            "input_mean": mean,
            "input_std": std,
            "selection": {"best_val_epoch": best_val_epoch},
        },
    }
    config.metrics_out.parent.mkdir(parents=True, exist_ok=True)
    config.metrics_out.write_text(json.dumps(metrics, indent=2) + "\n")
    return metrics

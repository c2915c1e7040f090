"""Command line: ``ldp-harness train --dataset D --epochs E --seed S --metrics-out M``."""

from __future__ import annotations

import argparse
import sys

from .data import DatasetError
from .train import HarnessConfig, TrainingDiverged, train_and_evaluate


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ldp-harness")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="train one classifier and emit the metrics JSON")
    p.add_argument("--dataset", required=True, help="dataset directory with manifest.json")
    p.add_argument("--epochs", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--metrics-out", required=True)
    p.add_argument("--mode", choices=("desk", "full"), default="desk")
    p.add_argument("--lr", type=float, default=3e-3)
    p.add_argument("--batch-size", type=int, default=8)
    p.add_argument("--pretrained", action=argparse.BooleanOptionalAction, default=True,
                   help="full mode only: start from pretrained weights")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    config = HarnessConfig(
        dataset_dir=args.dataset,
        epochs=args.epochs,
        seed=args.seed,
        metrics_out=args.metrics_out,
        mode=args.mode,
        learning_rate=args.lr,
        batch_size=args.batch_size,
        pretrained=args.pretrained,
    )
    try:
        metrics = train_and_evaluate(config)
    except DatasetError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except TrainingDiverged as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    print(
        f"best_test_accuracy={metrics['best_test_accuracy']:.4f} "
        f"best_epoch={metrics['best_epoch']} -> {args.metrics_out}"
    )
    return 0


if __name__ == "__main__":
    sys.exit(main())

"""Benchmark orchestration: sweep a beta grid, drive the training harness, report.

The harness is an external command with a file contract: the orchestrator
substitutes {DATASET_DIR}, {EPOCHS}, {SEED} and {METRICS_OUT} into the
command template, the harness exits 0 and writes the metrics JSON::

    {"epochs": N,
     "per_epoch": [{"epoch": i, "train_accuracy": x, "test_accuracy": y}, ...],
     "best_train_accuracy": x, "best_test_accuracy": y, "best_epoch": i}

Accuracies lie in [0, 1], epochs run consecutively from 1 and the best values
equal the series maxima.  The orchestrator never computes accuracies itself;
everything in a BenchResult traces back to a metrics file on disk.
"""

from __future__ import annotations

import csv
import json
import math
import subprocess
from dataclasses import dataclass, field
from pathlib import Path

from .datasets import DatasetManifest, MANIFEST_NAME, materialize_perturbed, PROVENANCE_NAME
from .errors import HarnessFailureError, InvalidParameterError, MetricsContractError

DEFAULT_BETA_GRID = (0.0, 1.0, 2.0, 4.0)

BENCH_RESULT_NAME = "bench_result.json"
METRICS_NAME = "metrics.json"


def format_beta(beta: float) -> str:
    return format(float(beta), "g")


@dataclass(frozen=True)
class EpochMetrics:
    epoch: int
    train_accuracy: float
    test_accuracy: float


@dataclass(frozen=True)
class BetaRunMetrics:
    per_epoch: tuple[EpochMetrics, ...]
    best_train_accuracy: float
    best_test_accuracy: float
    best_epoch: int


@dataclass
class BenchConfig:
    """One sweep: which dataset, which scales, and how to invoke the harness."""

    dataset_root: Path
    beta_grid: tuple[float, ...]
    master_seed: int
    epochs: int
    harness_command: tuple[str, ...]
    work_dir: Path
    export_format: str = "f32raw"
    clamp: bool = False
    image_size: int = 64

    def __post_init__(self):
        self.dataset_root = Path(self.dataset_root)
        self.work_dir = Path(self.work_dir)
        self.beta_grid = tuple(float(b) for b in self.beta_grid)
        self.harness_command = tuple(str(t) for t in self.harness_command)
        if not self.beta_grid:
            raise InvalidParameterError("beta_grid must not be empty")
        if any(not math.isfinite(b) or b < 0 for b in self.beta_grid):
            raise InvalidParameterError(f"beta grid values must be finite and >= 0: {self.beta_grid}")
        if any(b2 <= b1 for b1, b2 in zip(self.beta_grid, self.beta_grid[1:])):
            raise InvalidParameterError(
                f"beta_grid must be strictly ascending with distinct values: {self.beta_grid}"
            )
        if self.epochs < 1:
            raise InvalidParameterError(f"epochs must be >= 1, got {self.epochs}")
        if not self.harness_command:
            raise InvalidParameterError("harness_command must not be empty")
        if self.export_format not in ("png8", "f32raw"):
            raise InvalidParameterError(f"export_format must be png8 or f32raw, got {self.export_format!r}")


@dataclass
class BenchResult:
    """Per-beta accuracy series and best-model summaries."""

    per_beta: dict[float, BetaRunMetrics] = field(default_factory=dict)
    complete: bool = True

    def to_dict(self) -> dict:
        return {
            "complete": self.complete,
            "per_beta": {
                format_beta(beta): {
                    "per_epoch": [
                        {
                            "epoch": m.epoch,
                            "train_accuracy": m.train_accuracy,
                            "test_accuracy": m.test_accuracy,
                        }
                        for m in run.per_epoch
                    ],
                    "best_train_accuracy": run.best_train_accuracy,
                    "best_test_accuracy": run.best_test_accuracy,
                    "best_epoch": run.best_epoch,
                }
                for beta, run in sorted(self.per_beta.items())
            },
        }

    def save(self, path) -> Path:
        path = Path(path)
        path.write_text(json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n")
        return path

    @classmethod
    def from_dict(cls, data: dict) -> "BenchResult":
        per_beta = {}
        for key, run in data["per_beta"].items():
            per_epoch = tuple(
                EpochMetrics(int(m["epoch"]), float(m["train_accuracy"]), float(m["test_accuracy"]))
                for m in run["per_epoch"]
            )
            per_beta[float(key)] = BetaRunMetrics(
                per_epoch=per_epoch,
                best_train_accuracy=float(run["best_train_accuracy"]),
                best_test_accuracy=float(run["best_test_accuracy"]),
                best_epoch=int(run["best_epoch"]),
            )
        return cls(per_beta=per_beta, complete=bool(data.get("complete", True)))

    @classmethod
    def load(cls, path) -> "BenchResult":
        return cls.from_dict(json.loads(Path(path).read_text()))


def parse_metrics_file(path, expected_epochs: int | None = None) -> BetaRunMetrics:
    """Validate a harness metrics file against the contract and parse it."""
    path = Path(path)
    try:
        data = json.loads(path.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise MetricsContractError(f"unreadable metrics file {path}: {exc}") from exc
    try:
        declared_epochs = int(data["epochs"])
        rows = data["per_epoch"]
        best_train = float(data["best_train_accuracy"])
        best_test = float(data["best_test_accuracy"])
        best_epoch = int(data["best_epoch"])
    except (KeyError, TypeError, ValueError) as exc:
        raise MetricsContractError(f"metrics file {path} is missing contract fields: {exc}") from exc
    if not isinstance(rows, list) or len(rows) != declared_epochs or declared_epochs < 1:
        raise MetricsContractError(
            f"metrics file {path}: per_epoch length {len(rows) if isinstance(rows, list) else '?'} "
            f"does not match epochs={declared_epochs}"
        )
    if expected_epochs is not None and declared_epochs != expected_epochs:
        raise MetricsContractError(
            f"metrics file {path}: harness ran {declared_epochs} epochs, expected {expected_epochs}"
        )
    per_epoch = []
    for i, row in enumerate(rows, start=1):
        try:
            epoch = int(row["epoch"])
            train_acc = float(row["train_accuracy"])
            test_acc = float(row["test_accuracy"])
        except (KeyError, TypeError, ValueError) as exc:
            raise MetricsContractError(f"metrics file {path}: malformed per_epoch row {i}: {exc}") from exc
        if epoch != i:
            raise MetricsContractError(
                f"metrics file {path}: epochs must be consecutive from 1, row {i} has epoch {epoch}"
            )
        for name, value in (("train_accuracy", train_acc), ("test_accuracy", test_acc)):
            if not 0.0 <= value <= 1.0:
                raise MetricsContractError(f"metrics file {path}: {name} {value} outside [0, 1]")
        per_epoch.append(EpochMetrics(epoch, train_acc, test_acc))
    max_train = max(m.train_accuracy for m in per_epoch)
    max_test = max(m.test_accuracy for m in per_epoch)
    if best_train != max_train or best_test != max_test:
        raise MetricsContractError(
            f"metrics file {path}: best accuracies ({best_train}, {best_test}) do not equal "
            f"series maxima ({max_train}, {max_test})"
        )
    if not 1 <= best_epoch <= declared_epochs or per_epoch[best_epoch - 1].test_accuracy != best_test:
        raise MetricsContractError(
            f"metrics file {path}: best_epoch {best_epoch} does not attain best_test_accuracy"
        )
    return BetaRunMetrics(
        per_epoch=tuple(per_epoch),
        best_train_accuracy=best_train,
        best_test_accuracy=best_test,
        best_epoch=best_epoch,
    )


def _substitute(template: tuple[str, ...], mapping: dict[str, str]) -> list[str]:
    out = []
    for token in template:
        for key, value in mapping.items():
            token = token.replace("{" + key + "}", value)
        out.append(token)
    return out


def run_benchmark(config: BenchConfig, force: bool = False) -> BenchResult:
    """Sweep the beta grid in order: materialize, train via the harness, collect.

    A beta directory whose metrics file parses counts as complete and is
    skipped unless ``force`` is set.  Any failure saves the partial result
    (marked incomplete) before the error propagates.
    """
    manifest = DatasetManifest.load(config.dataset_root / MANIFEST_NAME)
    config.work_dir.mkdir(parents=True, exist_ok=True)
    result = BenchResult(per_beta={}, complete=False)
    result_path = config.work_dir / BENCH_RESULT_NAME
    for beta in config.beta_grid:
        beta_dir = config.work_dir / f"beta_{format_beta(beta)}"
        metrics_path = beta_dir / METRICS_NAME
        try:
            if not force and metrics_path.exists():
                try:
                    result.per_beta[beta] = parse_metrics_file(metrics_path, config.epochs)
                    continue
                except MetricsContractError:
                    pass  # stale or partial run; redo it
            beta_dir.mkdir(parents=True, exist_ok=True)
            dataset_dir = beta_dir / "dataset"
            if force or not (dataset_dir / PROVENANCE_NAME).exists():
                materialize_perturbed(
                    manifest,
                    beta=beta,
                    master_seed=config.master_seed,
                    clamp=config.clamp,
                    fmt=config.export_format,
                    out_dir=dataset_dir,
                    target_size=config.image_size,
                )
            command = _substitute(
                config.harness_command,
                {
                    "DATASET_DIR": str(dataset_dir),
                    "EPOCHS": str(config.epochs),
                    "SEED": str(config.master_seed),
                    "METRICS_OUT": str(metrics_path),
                },
            )
            proc = subprocess.run(command, capture_output=True, text=True)
            if proc.returncode != 0:
                raise HarnessFailureError(
                    f"harness exited {proc.returncode} for beta={format_beta(beta)}: "
                    f"{' '.join(command)}\nstdout:\n{proc.stdout}\nstderr:\n{proc.stderr}",
                    stdout=proc.stdout,
                    stderr=proc.stderr,
                )
            result.per_beta[beta] = parse_metrics_file(metrics_path, config.epochs)
        except Exception:
            result.complete = False
            result.save(result_path)
            raise
    result.complete = True
    result.save(result_path)
    return result


def emit_report(result: BenchResult, out_dir) -> None:
    """Write summary.csv, curves.csv and curves.svg; byte-deterministic."""
    if not result.per_beta:
        raise InvalidParameterError("cannot report an empty benchmark result")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    betas = sorted(result.per_beta)

    with open(out_dir / "summary.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["beta", "best_train_accuracy", "best_test_accuracy", "best_epoch"])
        for beta in betas:
            run = result.per_beta[beta]
            writer.writerow(
                [
                    format_beta(beta),
                    repr(run.best_train_accuracy),
                    repr(run.best_test_accuracy),
                    run.best_epoch,
                ]
            )

    with open(out_dir / "curves.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["beta", "epoch", "split", "accuracy"])
        for beta in betas:
            for m in result.per_beta[beta].per_epoch:
                writer.writerow([format_beta(beta), m.epoch, "train", repr(m.train_accuracy)])
                writer.writerow([format_beta(beta), m.epoch, "test", repr(m.test_accuracy)])

    (out_dir / "curves.svg").write_text(render_curves_svg(result))


_PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf")


def _svg_coord(x: float) -> str:
    return f"{x:.2f}"


def render_curves_svg(result: BenchResult) -> str:
    """Test-accuracy-vs-epoch polylines, one series per beta, with a legend."""
    if not result.per_beta:
        raise InvalidParameterError("cannot plot an empty benchmark result")
    betas = sorted(result.per_beta)
    width, height = 640.0, 440.0
    left, right, top, bottom = 70.0, 470.0, 40.0, 390.0

    max_epoch = max(m.epoch for beta in betas for m in result.per_beta[beta].per_epoch)
    x_lo, x_hi = (0.5, 1.5) if max_epoch == 1 else (1.0, float(max_epoch))

    def sx(epoch: float) -> float:
        return left + (epoch - x_lo) / (x_hi - x_lo) * (right - left)

    def sy(acc: float) -> float:
        return bottom - acc * (bottom - top)

    lines = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0f}" height="{height:.0f}" '
        f'viewBox="0 0 {width:.0f} {height:.0f}">',
        f'<rect x="0" y="0" width="{width:.0f}" height="{height:.0f}" fill="white"/>',
        '<text x="270" y="24" font-family="sans-serif" font-size="16" text-anchor="middle">'
        "Test accuracy vs training epoch</text>",
        f'<line x1="{left}" y1="{bottom}" x2="{right}" y2="{bottom}" stroke="black"/>',
        f'<line x1="{left}" y1="{top}" x2="{left}" y2="{bottom}" stroke="black"/>',
        f'<text x="{(left + right) / 2:.2f}" y="{height - 12:.2f}" font-family="sans-serif" '
        'font-size="13" text-anchor="middle">epoch</text>',
        f'<text x="20" y="{(top + bottom) / 2:.2f}" font-family="sans-serif" font-size="13" '
        f'text-anchor="middle" transform="rotate(-90 20 {(top + bottom) / 2:.2f})">test accuracy</text>',
    ]

    for frac in (0.0, 0.25, 0.5, 0.75, 1.0):
        y = sy(frac)
        lines.append(
            f'<line x1="{left - 4:.2f}" y1="{_svg_coord(y)}" x2="{left:.2f}" y2="{_svg_coord(y)}" stroke="black"/>'
        )
        lines.append(
            f'<text x="{left - 8:.2f}" y="{y + 4:.2f}" font-family="sans-serif" font-size="11" '
            f'text-anchor="end">{frac:.2f}</text>'
        )
    x_step = max(1, int(math.ceil(max_epoch / 10)))
    for epoch in range(1, max_epoch + 1, x_step):
        x = sx(epoch)
        lines.append(
            f'<line x1="{_svg_coord(x)}" y1="{bottom:.2f}" x2="{_svg_coord(x)}" y2="{bottom + 4:.2f}" stroke="black"/>'
        )
        lines.append(
            f'<text x="{_svg_coord(x)}" y="{bottom + 18:.2f}" font-family="sans-serif" font-size="11" '
            f'text-anchor="middle">{epoch}</text>'
        )

    for series_index, beta in enumerate(betas):
        color = _PALETTE[series_index % len(_PALETTE)]
        run = result.per_beta[beta]
        points = " ".join(
            f"{_svg_coord(sx(m.epoch))},{_svg_coord(sy(m.test_accuracy))}" for m in run.per_epoch
        )
        if len(run.per_epoch) > 1:
            lines.append(f'<polyline points="{points}" fill="none" stroke="{color}" stroke-width="1.5"/>')
        for m in run.per_epoch:
            lines.append(
                f'<circle cx="{_svg_coord(sx(m.epoch))}" cy="{_svg_coord(sy(m.test_accuracy))}" '
                f'r="3" fill="{color}"/>'
            )
        ly = top + 20.0 * series_index
        epsilon = "∞" if beta == 0 else format(1.0 / beta, "g")
        lines.append(
            f'<line x1="{right + 16:.2f}" y1="{ly + 10:.2f}" x2="{right + 40:.2f}" y2="{ly + 10:.2f}" '
            f'stroke="{color}" stroke-width="2"/>'
        )
        lines.append(
            f'<text x="{right + 46:.2f}" y="{ly + 14:.2f}" font-family="sans-serif" font-size="12">'
            f"β={format_beta(beta)} (ε={epsilon})</text>"
        )

    lines.append("</svg>")
    return "\n".join(lines) + "\n"

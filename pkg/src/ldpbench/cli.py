"""Command-line interface: gen-synth, perturb, verify, bench, report."""

from __future__ import annotations

import argparse
import json
import shlex
import sys
from pathlib import Path

import numpy as np

from .bench import BenchConfig, BenchResult, emit_report, run_benchmark
from .datasets import (
    DEFAULT_SPLIT_RATIOS,
    DatasetManifest,
    MANIFEST_NAME,
    PerturbationProvenance,
    generate_synthetic,
    materialize_perturbed,
    scan_dataset,
    split_dataset,
)
from .errors import HarnessFailureError
from .images import read_tensor
from .laplace import LaplaceParams
from .mechanism import beta_for_epsilon
from .verify import (
    DEFAULT_CONFIG,
    VerificationReport,
    ks_test_laplace,
    moment_check,
    standard_sampler_checks,
)


def _parse_ratios(text: str) -> tuple[float, float, float]:
    parts = [float(x) for x in text.split(",")]
    if len(parts) != 3:
        raise argparse.ArgumentTypeError("ratios must be three comma-separated numbers")
    return tuple(parts)  # type: ignore[return-value]


def _parse_betas(text: str) -> tuple[float, ...]:
    values = sorted({float(x) for x in text.split(",") if x.strip() != ""})
    return tuple(values)


def _resolve_beta(args) -> float:
    if args.beta is not None:
        return args.beta
    return beta_for_epsilon(args.epsilon, 1.0)


def _add_noise_scale_flags(parser: argparse.ArgumentParser, required: bool = True) -> None:
    group = parser.add_mutually_exclusive_group(required=required)
    group.add_argument("--beta", type=float, help="Laplace noise scale (0 = unperturbed baseline)")
    group.add_argument(
        "--epsilon", type=float, help="per-pixel privacy budget; converted to beta with sensitivity 1"
    )


def _load_or_scan_manifest(dataset_dir: Path) -> DatasetManifest:
    manifest_path = dataset_dir / MANIFEST_NAME
    if manifest_path.exists():
        return DatasetManifest.load(manifest_path)
    print(f"note: no {MANIFEST_NAME} in {dataset_dir}; scanning the directory tree", file=sys.stderr)
    return scan_dataset(dataset_dir)


def _print_reports(reports: list[VerificationReport]) -> bool:
    all_passed = True
    for report in reports:
        status = "PASS" if report.passed else "FAIL"
        print(
            f"{status} {report.test_name}: statistic={report.statistic:.6g} "
            f"threshold={report.threshold:.6g} n={report.sample_count}"
        )
        all_passed &= report.passed
    return all_passed


def _cmd_gen_synth(args) -> int:
    manifest = generate_synthetic(args.n_per_class, args.size, args.seed, args.out)
    manifest = split_dataset(manifest, args.ratios, args.seed)
    manifest.save()
    counts = {split: len(manifest.entries_for_split(split)) for split in ("train", "val", "test")}
    print(f"wrote {len(manifest.entries)} images to {args.out} (splits: {counts})")
    return 0


def _cmd_perturb(args) -> int:
    beta = _resolve_beta(args)
    manifest = _load_or_scan_manifest(Path(args.dataset))
    out_manifest, provenance = materialize_perturbed(
        manifest,
        beta=beta,
        master_seed=args.seed,
        clamp=args.clamp,
        fmt=args.format,
        out_dir=args.out,
        target_size=args.target_size,
        workers=args.workers,
    )
    eps = provenance.epsilon_per_pixel
    print(
        f"materialized {len(out_manifest.entries)} images at beta={beta:g} "
        f"(epsilon/pixel={'inf' if eps == float('inf') else format(eps, 'g')}) into {args.out}"
    )
    return 0


def _residual_reports(perturbed_dir: Path, source_dir: Path) -> list[VerificationReport]:
    """Pooled per-pixel residual checks for a materialized tree against its source."""
    provenance = PerturbationProvenance.load(perturbed_dir)
    if provenance.beta == 0:
        raise SystemExit("the perturbed tree is a beta=0 baseline; nothing to verify")
    if provenance.clamp:
        print(
            "warning: tree was clamped; residuals are censored and checks may fail",
            file=sys.stderr,
        )
    out_manifest = DatasetManifest.load(perturbed_dir / MANIFEST_NAME)
    src_manifest = _load_or_scan_manifest(source_dir)
    if out_manifest.source.split("from sha256:")[-1] != src_manifest.digest()[:16]:
        print("warning: source manifest digest does not match the tree's provenance", file=sys.stderr)
    from .images import load_and_preprocess  # local import keeps CLI startup light

    residuals = []
    for index, entry in enumerate(out_manifest.entries):
        out_tensor = read_tensor(perturbed_dir / entry.path)
        src_entry = src_manifest.entries[index]
        src_tensor = load_and_preprocess(source_dir / src_entry.path, out_tensor.height)
        residuals.append(
            out_tensor.values.astype(np.float64).ravel() - src_tensor.values.astype(np.float64).ravel()
        )
    pooled = np.concatenate(residuals)
    params = LaplaceParams(0.0, provenance.beta)
    return [
        moment_check(pooled, params, DEFAULT_CONFIG.mean_tol, DEFAULT_CONFIG.var_tol),
        ks_test_laplace(pooled, params, DEFAULT_CONFIG.ks_alpha),
    ]


def _cmd_verify(args) -> int:
    if args.dataset is not None:
        if args.source is None:
            raise SystemExit("--dataset requires --source (the unperturbed original tree)")
        reports = _residual_reports(Path(args.dataset), Path(args.source))
    else:
        beta = _resolve_beta(args)
        if beta <= 0:
            raise SystemExit("sampler verification needs beta > 0")
        reports = standard_sampler_checks(beta, args.seed)
    all_passed = _print_reports(reports)
    if args.out:
        Path(args.out).write_text(
            json.dumps([r.to_dict() for r in reports], indent=2, sort_keys=True) + "\n"
        )
    return 0 if all_passed else 1


def _cmd_bench(args) -> int:
    config = BenchConfig(
        dataset_root=Path(args.dataset),
        beta_grid=args.betas,
        master_seed=args.seed,
        epochs=args.epochs,
        harness_command=tuple(shlex.split(args.harness)),
        work_dir=Path(args.work_dir),
        export_format=args.format,
        clamp=args.clamp,
        image_size=args.image_size,
    )
    try:
        result = run_benchmark(config, force=args.force)
    except HarnessFailureError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    report_dir = Path(args.report_dir) if args.report_dir else config.work_dir / "report"
    emit_report(result, report_dir)
    for beta in sorted(result.per_beta):
        run = result.per_beta[beta]
        print(
            f"beta={beta:g}: best_test={run.best_test_accuracy:.4f} "
            f"best_train={run.best_train_accuracy:.4f} best_epoch={run.best_epoch}"
        )
    print(f"report written to {report_dir}")
    return 0


def _cmd_report(args) -> int:
    result = BenchResult.load(args.result)
    emit_report(result, args.out)
    print(f"report written to {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ldpbench",
        description="Locally differentially private image datasets via the Laplace mechanism",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-synth", help="generate the synthetic two-class dataset")
    p.add_argument("--out", required=True, help="output dataset directory")
    p.add_argument("--n-per-class", type=int, default=50)
    p.add_argument("--size", type=int, default=64, help="square image size in pixels")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument(
        "--ratios",
        type=_parse_ratios,
        default=DEFAULT_SPLIT_RATIOS,
        help="train,val,test ratios (default 0.7,0.15,0.15)",
    )
    p.set_defaults(func=_cmd_gen_synth)

    p = sub.add_parser("perturb", help="materialize a perturbed copy of a dataset")
    p.add_argument("--dataset", required=True, help="source dataset directory")
    p.add_argument("--out", required=True, help="output directory for the perturbed copy")
    _add_noise_scale_flags(p)
    p.add_argument("--seed", type=int, default=0, help="master seed for the noise streams")
    p.add_argument("--clamp", action=argparse.BooleanOptionalAction, default=False)
    p.add_argument("--format", choices=("png8", "f32raw"), default="f32raw")
    p.add_argument("--target-size", type=int, default=256, help="preprocessing resolution")
    p.add_argument("--workers", type=int, default=None)
    p.set_defaults(func=_cmd_perturb)

    p = sub.add_parser("verify", help="run the empirical distribution and LDP checks")
    _add_noise_scale_flags(p, required=False)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--dataset", help="perturbed tree to verify (residual mode)")
    p.add_argument("--source", help="original tree the perturbed one was made from")
    p.add_argument("--out", help="write the reports as JSON to this file")
    p.set_defaults(func=_cmd_verify)

    p = sub.add_parser("bench", help="sweep a beta grid and benchmark the harness")
    p.add_argument("--dataset", required=True, help="dataset directory with a manifest")
    p.add_argument("--work-dir", required=True)
    p.add_argument("--betas", type=_parse_betas, default=(0.0, 1.0, 2.0, 4.0))
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--epochs", type=int, default=15)
    p.add_argument(
        "--harness",
        required=True,
        help="harness command template with {DATASET_DIR} {EPOCHS} {SEED} {METRICS_OUT}",
    )
    p.add_argument("--format", choices=("png8", "f32raw"), default="f32raw")
    p.add_argument("--clamp", action=argparse.BooleanOptionalAction, default=False)
    p.add_argument("--image-size", type=int, default=64)
    p.add_argument("--report-dir", default=None)
    p.add_argument("--force", action="store_true", help="re-run completed beta directories")
    p.set_defaults(func=_cmd_bench)

    p = sub.add_parser("report", help="re-emit CSV/SVG reports from a saved result")
    p.add_argument("--result", required=True, help="path to bench_result.json")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_report)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "verify" and args.dataset is None and args.beta is None and args.epsilon is None:
        raise SystemExit("verify needs either --beta/--epsilon (sampler mode) or --dataset/--source")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())

"""Locally differentially private image datasets via the Laplace mechanism."""

from .bench import (
    BenchConfig,
    BenchResult,
    BetaRunMetrics,
    EpochMetrics,
    emit_report,
    parse_metrics_file,
    run_benchmark,
)
from .datasets import (
    DatasetManifest,
    ManifestEntry,
    PerturbationProvenance,
    generate_synthetic,
    materialize_perturbed,
    scan_dataset,
    split_dataset,
)
from .errors import (
    DatasetLayoutError,
    HarnessFailureError,
    ImageFormatError,
    InsufficientDataError,
    InvalidParameterError,
    MaterializationError,
    MetricsContractError,
)
from .images import (
    ImageTensor,
    load_and_preprocess,
    perturb_image,
    quantize_u8,
    read_tensor,
    write_tensor,
)
from .laplace import (
    LaplaceParams,
    laplace_cdf,
    laplace_pdf,
    laplace_quantile,
    laplace_sample,
    laplace_variance,
)
from .mechanism import (
    PrivacyBudget,
    beta_for_epsilon,
    epsilon_for_beta,
    naive_composition,
    perturb_vector,
)
from .rng import RandomStream
from .verify import (
    VerificationConfig,
    VerificationReport,
    empirical_ldp_ratio,
    ks_test_laplace,
    moment_check,
    standard_sampler_checks,
)

__version__ = "0.1.0"

__all__ = [
    "BenchConfig",
    "BenchResult",
    "BetaRunMetrics",
    "DatasetLayoutError",
    "DatasetManifest",
    "EpochMetrics",
    "HarnessFailureError",
    "ImageFormatError",
    "ImageTensor",
    "InsufficientDataError",
    "InvalidParameterError",
    "LaplaceParams",
    "ManifestEntry",
    "MaterializationError",
    "MetricsContractError",
    "PerturbationProvenance",
    "PrivacyBudget",
    "RandomStream",
    "VerificationConfig",
    "VerificationReport",
    "beta_for_epsilon",
    "emit_report",
    "empirical_ldp_ratio",
    "epsilon_for_beta",
    "generate_synthetic",
    "ks_test_laplace",
    "laplace_cdf",
    "laplace_pdf",
    "laplace_quantile",
    "laplace_sample",
    "laplace_variance",
    "load_and_preprocess",
    "materialize_perturbed",
    "moment_check",
    "naive_composition",
    "parse_metrics_file",
    "perturb_image",
    "perturb_vector",
    "quantize_u8",
    "read_tensor",
    "run_benchmark",
    "scan_dataset",
    "split_dataset",
    "standard_sampler_checks",
    "write_tensor",
]

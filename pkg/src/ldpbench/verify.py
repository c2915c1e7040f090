"""Empirical certification of the sampler and the local-DP guarantee.

Three checks: moment agreement (mean and variance), one-sample
Kolmogorov-Smirnov goodness of fit against the Laplace CDF, and the binned
density-ratio bound max P[out(v) in bin] / P[out(v') in bin] <= exp(eps)
behind plausible deniability.  Every report is a pure function of its inputs
and the master seed, so reruns reproduce identical statistics.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Any, Mapping

import numpy as np

from .errors import InsufficientDataError, InvalidParameterError
from .laplace import LaplaceParams, laplace_cdf, laplace_sample
from .rng import RandomStream

# Minimum sample sizes below which the estimators are meaningless.
MIN_SAMPLES = 1_000
MIN_LDP_SAMPLES = 100_000


@dataclass(frozen=True)
class VerificationConfig:
    """Single source of tolerances, shared by the CLI and the acceptance suite."""

    mean_tol: float = 0.015
    var_tol: float = 0.1
    ks_alpha: float = 0.001
    ldp_slack: float = 1.15
    ldp_min_bin_count: int = 500
    sampler_check_samples: int = 1_000_000
    ldp_check_samples: int = 2_000_000


DEFAULT_CONFIG = VerificationConfig()


@dataclass(frozen=True)
class VerificationReport:
    """Outcome of one check; ``passed`` is ``statistic <= threshold`` (one-sided)."""

    test_name: str
    statistic: float
    threshold: float
    sample_count: int
    passed: bool
    details: Mapping[str, Any] = field(default_factory=dict)

    def to_dict(self) -> dict[str, Any]:
        return {
            "test_name": self.test_name,
            "statistic": self.statistic,
            "threshold": self.threshold,
            "sample_count": self.sample_count,
            "passed": self.passed,
            "details": dict(self.details),
        }

    def to_json(self, indent: int | None = 2) -> str:
        return json.dumps(self.to_dict(), indent=indent, sort_keys=True)


def _check_samples(samples, minimum: int) -> np.ndarray:
    arr = np.asarray(samples, dtype=np.float64).ravel()
    if arr.size < minimum:
        raise InsufficientDataError(f"need at least {minimum} samples, got {arr.size}")
    return arr


def moment_check(
    samples,
    params: LaplaceParams,
    mean_tol: float = DEFAULT_CONFIG.mean_tol,
    var_tol: float = DEFAULT_CONFIG.var_tol,
) -> VerificationReport:
    """Check sample mean against mu and sample variance against 2 beta^2.

    The reported statistic is the larger of the two tolerance-normalized
    errors, so ``passed == (statistic <= 1)``.
    """
    if params.beta <= 0:
        raise InvalidParameterError("moment_check requires beta > 0")
    if mean_tol <= 0 or var_tol <= 0:
        raise InvalidParameterError("tolerances must be positive")
    arr = _check_samples(samples, MIN_SAMPLES)
    observed_mean = float(np.mean(arr))
    observed_var = float(np.var(arr))
    expected_var = 2.0 * params.beta**2
    mean_err = abs(observed_mean - params.mu)
    var_err = abs(observed_var - expected_var)
    statistic = max(mean_err / mean_tol, var_err / var_tol)
    return VerificationReport(
        test_name="laplace_moments",
        statistic=statistic,
        threshold=1.0,
        sample_count=arr.size,
        passed=statistic <= 1.0,
        details={
            "observed_mean": observed_mean,
            "observed_variance": observed_var,
            "expected_mean": params.mu,
            "expected_variance": expected_var,
            "mean_tol": mean_tol,
            "var_tol": var_tol,
            "relation": "max(|mean error|/mean_tol, |variance error|/var_tol) <= 1",
        },
    )


def ks_test_laplace(
    samples,
    params: LaplaceParams,
    alpha: float = DEFAULT_CONFIG.ks_alpha,
) -> VerificationReport:
    """One-sample Kolmogorov-Smirnov statistic against the Laplace CDF.

    D = sup_x |F_n(x) - F(x)| via the sorted-sample formula; the pass
    threshold is the DKW-style critical value sqrt(ln(2/alpha) / (2 n)).
    """
    if params.beta <= 0:
        raise InvalidParameterError("ks_test_laplace requires beta > 0")
    if not 0.0 < alpha < 1.0:
        raise InvalidParameterError(f"alpha must lie in (0, 1), got {alpha}")
    arr = _check_samples(samples, MIN_SAMPLES)
    n = arr.size
    xs = np.sort(arr)
    cdf = laplace_cdf(xs, params)
    i = np.arange(1, n + 1, dtype=np.float64)
    d_plus = float(np.max(i / n - cdf))
    d_minus = float(np.max(cdf - (i - 1.0) / n))
    statistic = max(d_plus, d_minus)
    threshold = math.sqrt(math.log(2.0 / alpha) / (2.0 * n))
    return VerificationReport(
        test_name="laplace_ks",
        statistic=statistic,
        threshold=threshold,
        sample_count=n,
        passed=statistic <= threshold,
        details={
            "d_plus": d_plus,
            "d_minus": d_minus,
            "alpha": alpha,
            "relation": "sup-norm CDF distance <= sqrt(ln(2/alpha)/(2n))",
        },
    )


def empirical_ldp_ratio(
    v: float,
    v_prime: float,
    beta: float,
    n_samples: int,
    bin_width: float | None = None,
    min_bin_count: int = DEFAULT_CONFIG.ldp_min_bin_count,
    master_seed: int = 0,
    slack: float = DEFAULT_CONFIG.ldp_slack,
    noise_beta: float | None = None,
) -> VerificationReport:
    """Histogram estimate of the worst-case output density ratio for inputs v, v'.

    Draws ``n_samples`` perturbations of each input (streams 0 and 1 under
    ``master_seed``), bins both on a shared grid covering
    [min(v, v') - 10 beta, max(v, v') + 10 beta], and over bins where both
    counts reach ``min_bin_count`` takes the larger of the two count ratios.
    Passing means that maximum stays within ``slack`` of the analytic ceiling
    exp(|v - v'| / beta).

    ``noise_beta`` overrides the scale actually sampled (the claimed ``beta``
    still sets the ceiling); it exists so audits can demonstrate that a
    mis-calibrated sampler fails this check.
    """
    if not math.isfinite(v) or not math.isfinite(v_prime):
        raise InvalidParameterError("inputs v and v' must be finite")
    if not math.isfinite(beta) or beta <= 0:
        raise InvalidParameterError(f"beta must be a positive finite real, got {beta}")
    if n_samples < MIN_LDP_SAMPLES:
        raise InsufficientDataError(
            f"need at least {MIN_LDP_SAMPLES} samples per input, got {n_samples}"
        )
    if bin_width is None:
        bin_width = beta / 10.0
    if bin_width <= 0 or not math.isfinite(bin_width):
        raise InvalidParameterError(f"bin_width must be positive, got {bin_width}")
    if min_bin_count < 1:
        raise InvalidParameterError("min_bin_count must be >= 1")
    actual_beta = beta if noise_beta is None else float(noise_beta)
    if actual_beta <= 0 or not math.isfinite(actual_beta):
        raise InvalidParameterError(f"noise_beta must be positive, got {actual_beta}")

    lo = min(v, v_prime) - 10.0 * beta
    hi = max(v, v_prime) + 10.0 * beta
    n_bins = int(math.ceil((hi - lo) / bin_width))
    if n_bins < 1:
        raise InsufficientDataError("degenerate bin grid")
    edges = lo + bin_width * np.arange(n_bins + 1, dtype=np.float64)

    params = LaplaceParams(0.0, actual_beta)
    out_v = v + laplace_sample(params, RandomStream(master_seed, 0), size=n_samples)
    out_vp = v_prime + laplace_sample(params, RandomStream(master_seed, 1), size=n_samples)
    counts_v, _ = np.histogram(out_v, bins=edges)
    counts_vp, _ = np.histogram(out_vp, bins=edges)

    qualifying = (counts_v >= min_bin_count) & (counts_vp >= min_bin_count)
    if not np.any(qualifying):
        raise InsufficientDataError(
            f"no bin reached {min_bin_count} counts for both inputs; "
            "increase n_samples or bin_width"
        )
    cv = counts_v[qualifying].astype(np.float64)
    cvp = counts_vp[qualifying].astype(np.float64)
    ratios = np.maximum(cv / cvp, cvp / cv)
    worst = int(np.argmax(ratios))
    statistic = float(ratios[worst])
    bin_index = int(np.flatnonzero(qualifying)[worst])
    epsilon = abs(v - v_prime) / beta
    threshold = math.exp(epsilon) * slack
    return VerificationReport(
        test_name="ldp_density_ratio",
        statistic=statistic,
        threshold=threshold,
        sample_count=2 * n_samples,
        passed=statistic <= threshold,
        details={
            "epsilon": epsilon,
            "analytic_ceiling": math.exp(epsilon),
            "slack": slack,
            "bin_width": bin_width,
            "min_bin_count": min_bin_count,
            "qualifying_bins": int(np.count_nonzero(qualifying)),
            "max_ratio_bin": [float(edges[bin_index]), float(edges[bin_index + 1])],
            "max_ratio_counts": [int(counts_v[bin_index]), int(counts_vp[bin_index])],
            "master_seed": master_seed,
            "noise_beta": actual_beta,
            "relation": "max bin count ratio <= exp(|v - v'|/beta) * slack",
        },
    )


def standard_sampler_checks(
    beta: float,
    master_seed: int,
    config: VerificationConfig = DEFAULT_CONFIG,
) -> list[VerificationReport]:
    """The three checks the CLI runs against the sampler at a given scale.

    Moments and KS use one pool of draws at Laplace(0, beta); the ratio check
    perturbs the canonical unit-sensitivity pair v=0, v'=1.
    """
    params = LaplaceParams(0.0, beta)
    draws = laplace_sample(params, RandomStream(master_seed, 0), size=config.sampler_check_samples)
    reports = [
        moment_check(draws, params, config.mean_tol, config.var_tol),
        ks_test_laplace(draws, params, config.ks_alpha),
        empirical_ldp_ratio(
            0.0,
            1.0,
            beta,
            config.ldp_check_samples,
            min_bin_count=config.ldp_min_bin_count,
            master_seed=(master_seed + 1) % 2**64,
            slack=config.ldp_slack,
        ),
    ]
    return reports

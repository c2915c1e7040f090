"""Laplace (double-exponential) distribution: exact functions and seeded sampling.

The distribution with location ``mu`` and scale ``beta`` has density

    f(x) = exp(-|x - mu| / beta) / (2 * beta)

and variance ``2 * beta**2``.  Sampling uses the inverse-CDF transform, one
uniform per draw, so stream-position accounting stays trivial under
parallelism.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidParameterError
from .rng import RandomStream

# Smallest log argument admitted by the quantile; forbids -inf at the
# extremes of the open uniform interval.
_LOG_FLOOR = 1e-300


@dataclass(frozen=True)
class LaplaceParams:
    """Location and scale of the noise distribution.

    ``beta == 0`` is the degenerate "no noise" marker: it is representable
    (the unperturbed baseline dataset uses it) but rejected by the density,
    CDF, quantile and sampler.  Callers branch on it explicitly.
    """

    mu: float
    beta: float

    def __post_init__(self):
        if not math.isfinite(self.mu):
            raise InvalidParameterError(f"location mu must be finite, got {self.mu}")
        if not math.isfinite(self.beta) or self.beta < 0:
            raise InvalidParameterError(f"scale beta must be finite and >= 0, got {self.beta}")


def _require_positive_scale(params: LaplaceParams) -> None:
    if params.beta <= 0:
        raise InvalidParameterError(f"scale beta must be > 0, got {params.beta}")


def _as_array(x) -> tuple[np.ndarray, bool]:
    arr = np.asarray(x, dtype=np.float64)
    return arr, arr.ndim == 0


def _restore(arr: np.ndarray, scalar: bool):
    return float(arr) if scalar else arr


def laplace_pdf(x, params: LaplaceParams):
    """Density exp(-|x - mu| / beta) / (2 beta); symmetric about mu, maximal there."""
    _require_positive_scale(params)
    arr, scalar = _as_array(x)
    out = np.exp(-np.abs(arr - params.mu) / params.beta) / (2.0 * params.beta)
    return _restore(out, scalar)


def laplace_cdf(x, params: LaplaceParams):
    """Distribution function: exp((x-mu)/b)/2 below mu, 1 - exp(-(x-mu)/b)/2 above."""
    _require_positive_scale(params)
    arr, scalar = _as_array(x)
    d = (arr - params.mu) / params.beta
    # exp arguments are clamped to <= 0 in both branches so np.where never
    # evaluates an overflowing exponential.
    lower = 0.5 * np.exp(np.minimum(d, 0.0))
    upper = 1.0 - 0.5 * np.exp(-np.maximum(d, 0.0))
    out = np.where(d < 0.0, lower, upper)
    return _restore(out, scalar)


def laplace_quantile(p, params: LaplaceParams):
    """Inverse CDF: mu - beta * sgn(p - 1/2) * ln(1 - 2|p - 1/2|); p = 1/2 maps to mu."""
    _require_positive_scale(params)
    arr, scalar = _as_array(p)
    if np.any(arr <= 0.0) or np.any(arr >= 1.0):
        raise InvalidParameterError("quantile probability must lie in the open interval (0, 1)")
    q = arr - 0.5
    out = params.mu - params.beta * np.sign(q) * np.log(np.maximum(1.0 - 2.0 * np.abs(q), _LOG_FLOOR))
    return _restore(out, scalar)


def laplace_sample(params: LaplaceParams, stream: RandomStream, size: int | None = None):
    """Draw from Laplace(mu, beta) by inverse transform, one uniform per value.

    ``size=None`` draws a single float and advances the stream by one;
    ``size=n`` draws a length-n array and advances by exactly n.
    """
    _require_positive_scale(params)
    if size is None:
        return laplace_quantile(stream.next_uniform(), params)
    return laplace_quantile(stream.uniforms(size), params)


def laplace_variance(beta: float) -> float:
    """Variance 2 * beta**2; zero scale is the degenerate point mass."""
    if not math.isfinite(beta) or beta < 0:
        raise InvalidParameterError(f"scale beta must be finite and >= 0, got {beta}")
    return 2.0 * beta * beta

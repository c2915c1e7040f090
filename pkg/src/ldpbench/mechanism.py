"""Per-coordinate Laplace mechanism and the epsilon <-> beta calibration.

Noise scale is calibrated as beta = sensitivity / epsilon.  Perturbation adds
independent Laplace(0, beta) noise to each coordinate in order, drawing one
uniform per coordinate from the caller's stream.  beta = 0 is the unperturbed
baseline and passes the input through bit-identically.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidParameterError
from .laplace import LaplaceParams, laplace_sample
from .rng import RandomStream


def _check_positive(name: str, value: float) -> float:
    value = float(value)
    if not math.isfinite(value) or value <= 0:
        raise InvalidParameterError(f"{name} must be a positive finite real, got {value}")
    return value


def beta_for_epsilon(epsilon: float, sensitivity: float) -> float:
    """Noise scale for a per-coordinate budget: sensitivity / epsilon."""
    return _check_positive("sensitivity", sensitivity) / _check_positive("epsilon", epsilon)


def epsilon_for_beta(beta: float, sensitivity: float) -> float:
    """Privacy loss implied by a noise scale: sensitivity / beta."""
    return _check_positive("sensitivity", sensitivity) / _check_positive("beta", beta)


@dataclass(frozen=True)
class PrivacyBudget:
    """Calibration state of the mechanism: epsilon, sensitivity and derived beta.

    Invariants: sensitivity > 0; for finite epsilon, beta == sensitivity/epsilon
    exactly; epsilon == +inf if and only if beta == 0 (the baseline copy).
    Construct via :meth:`from_epsilon` or :meth:`from_beta`.
    """

    epsilon: float
    sensitivity: float
    beta: float

    def __post_init__(self):
        _check_positive("sensitivity", self.sensitivity)
        if math.isnan(self.epsilon) or self.epsilon <= 0:
            raise InvalidParameterError(f"epsilon must be positive or +inf, got {self.epsilon}")
        if not math.isfinite(self.beta) or self.beta < 0:
            raise InvalidParameterError(f"beta must be finite and >= 0, got {self.beta}")
        if math.isinf(self.epsilon):
            if self.beta != 0:
                raise InvalidParameterError("epsilon = +inf requires beta = 0")
        elif self.beta == 0:
            raise InvalidParameterError("beta = 0 requires epsilon = +inf")
        elif self.beta != self.sensitivity / self.epsilon:
            raise InvalidParameterError(
                f"beta must equal sensitivity/epsilon exactly: "
                f"{self.beta} != {self.sensitivity}/{self.epsilon}"
            )

    @classmethod
    def from_epsilon(cls, epsilon: float, sensitivity: float = 1.0) -> "PrivacyBudget":
        if math.isinf(epsilon) and epsilon > 0:
            return cls(epsilon=math.inf, sensitivity=float(sensitivity), beta=0.0)
        return cls(
            epsilon=float(epsilon),
            sensitivity=float(sensitivity),
            beta=beta_for_epsilon(epsilon, sensitivity),
        )

    @classmethod
    def from_beta(cls, beta: float, sensitivity: float = 1.0) -> "PrivacyBudget":
        if beta == 0:
            return cls(epsilon=math.inf, sensitivity=float(sensitivity), beta=0.0)
        return cls(
            epsilon=epsilon_for_beta(beta, sensitivity),
            sensitivity=float(sensitivity),
            beta=float(beta),
        )


def perturb_vector(v, budget: PrivacyBudget, stream: RandomStream) -> np.ndarray:
    """Add i.i.d. Laplace(0, budget.beta) noise to each coordinate of ``v``.

    Noise is drawn in coordinate order, consuming exactly ``len(v)`` uniforms
    when beta > 0; with beta = 0 the input is returned as an exact copy and
    the stream is not advanced.  Output length always equals input length.
    """
    arr = np.asarray(v, dtype=np.float64)
    if arr.ndim != 1:
        raise ValueError(f"perturb_vector expects a 1-D vector, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("perturb_vector input contains non-finite coordinates")
    if budget.beta == 0:
        return arr.copy()
    noise = laplace_sample(LaplaceParams(0.0, budget.beta), stream, size=arr.size)
    return arr + noise


def naive_composition(epsilon_per_coordinate: float, n_coordinates: int) -> float:
    """Basic sequential composition across coordinates, for provenance reports only."""
    _check_positive("epsilon_per_coordinate", epsilon_per_coordinate)
    if not isinstance(n_coordinates, (int, np.integer)) or n_coordinates < 1:
        raise InvalidParameterError(
            f"n_coordinates must be a positive integer, got {n_coordinates!r}"
        )
    return float(n_coordinates) * float(epsilon_per_coordinate)

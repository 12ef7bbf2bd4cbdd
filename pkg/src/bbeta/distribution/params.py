from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..specfun import DomainError

NORMALIZER_TOL = 1e-14


class DegenerateParameterError(DomainError):
    """Raised when the normalizing constant is not safely positive."""


def beta_ratio(alpha, beta, k):
    """B(alpha + k, beta) / B(alpha, beta) for integer ``k >= 0`` as a finite product."""
    out = np.ones(np.broadcast(alpha, beta).shape)
    for j in range(k):
        out = out * (alpha + j) / (alpha + beta + j)
    return out if out.ndim else float(out)


def quadratic_coefs(rho, delta):
    """Coefficients (c0, c1, c2) of rho + (1 - delta x)^2 in powers of x."""
    return 1.0 + rho, -2.0 * delta, delta * delta


def normalizer_arrays(alpha, beta, rho, delta):
    """Vectorised normalizing constant; no validation."""
    s = alpha + beta
    return 1.0 + rho - 2.0 * delta * alpha / s + delta**2 * alpha * (alpha + 1.0) / (s * (s + 1.0))


@dataclass(frozen=True)
class BBetaParams:
    """Parameter vector (alpha, beta, rho, delta) of the bimodal beta law.

    ``alpha`` and ``beta`` are the usual beta exponents, ``rho >= 0`` and the
    real ``delta`` shape the quadratic factor ``rho + (1 - delta x)**2``.
    Construction fails if the normalizing constant is not positive.
    """

    alpha: float
    beta: float
    rho: float = 0.0
    delta: float = 0.0

    def __post_init__(self):
        for name in ("alpha", "beta", "rho", "delta"):
            value = float(getattr(self, name))
            if not math.isfinite(value):
                raise DomainError(f"{name} must be finite, got {value}")
            object.__setattr__(self, name, value)
        if self.alpha <= 0:
            raise DomainError(f"alpha must be > 0, got {self.alpha}")
        if self.beta <= 0:
            raise DomainError(f"beta must be > 0, got {self.beta}")
        if self.rho < 0:
            raise DomainError(f"rho must be >= 0, got {self.rho}")
        z = normalizer_arrays(self.alpha, self.beta, self.rho, self.delta)
        if not z > NORMALIZER_TOL:
            raise DegenerateParameterError(f"normalizer {z!r} is not positive for {self}")

    @classmethod
    def from_sequence(cls, values: Sequence[float]) -> "BBetaParams":
        if len(values) != 4:
            raise ValueError("expected four values: alpha, beta, rho, delta")
        return cls(*values)

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.alpha, self.beta, self.rho, self.delta)

    @property
    def normalizer(self) -> float:
        return normalizer(self)


def normalizer(params: BBetaParams) -> float:
    """Normalizing constant Z of the density."""
    return float(normalizer_arrays(params.alpha, params.beta, params.rho, params.delta))


@dataclass(frozen=True)
class MixtureWeights:
    """Weights of the three-component (generalized) beta mixture.

    Components are Beta(alpha, beta), Beta(alpha + 1, beta) and
    Beta(alpha + 2, beta). ``pi2`` is negative whenever ``delta > 0``.
    """

    pi1: float
    pi2: float
    pi3: float

    def as_array(self) -> np.ndarray:
        return np.array([self.pi1, self.pi2, self.pi3])

    @property
    def nonnegative(self) -> bool:
        return min(self.pi1, self.pi2, self.pi3) >= 0.0


def mixture_weights_arrays(alpha, beta, rho, delta):
    z = normalizer_arrays(alpha, beta, rho, delta)
    c0, c1, c2 = quadratic_coefs(rho, delta)
    return (
        c0 / z,
        c1 * beta_ratio(alpha, beta, 1) / z,
        c2 * beta_ratio(alpha, beta, 2) / z,
    )


def mixture_weights(params: BBetaParams) -> MixtureWeights:
    pi1, pi2, pi3 = mixture_weights_arrays(*params.as_tuple())
    return MixtureWeights(float(pi1), float(pi2), float(pi3))

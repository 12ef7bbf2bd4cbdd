"""Entropy functionals: quadratic (Renyi order 2), Shannon and Tsallis."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..specfun import ConvergenceError, DomainError, digamma, log_beta
from ._quad import weighted_integral
from .params import BBetaParams, beta_ratio

__all__ = ["quadratic_entropy", "shannon_entropy", "TsallisBound", "tsallis_bound"]


def quadratic_entropy(params: BBetaParams) -> float:
    """-log of the integral of the squared density (needs alpha, beta > 1/2).

    The squared kernel is a quartic in x times the Beta(2a - 1, 2b - 1)
    kernel, so the integral reduces to the first four moments of that beta
    law.
    """
    a, b, rho, delta = params.as_tuple()
    if a <= 0.5 or b <= 0.5:
        raise DomainError("quadratic entropy requires alpha > 1/2 and beta > 1/2")
    quartic = (
        (1.0 + rho) ** 2,
        -4.0 * delta * (1.0 + rho),
        2.0 * delta**2 * (3.0 + rho),
        -4.0 * delta**3,
        delta**4,
    )
    a2, b2 = 2.0 * a - 1.0, 2.0 * b - 1.0
    expectation = sum(c * beta_ratio(a2, b2, i) for i, c in enumerate(quartic))
    return (
        -log_beta(a2, b2)
        + 2.0 * math.log(params.normalizer)
        + 2.0 * log_beta(a, b)
        - math.log(expectation)
    )


def shannon_entropy(params: BBetaParams, method: str = "quadrature", tol: float = 1e-12,
                    max_terms: int = 1_000_000) -> float:
    """Differential entropy -E[log f(X)].

    ``method="series"`` is the closed form for the slice rho = 0, delta = 1,
    alpha >= 2, with the E[log(1 - X)] part expanded as a power series; it
    stops once the estimated remainder of the series drops below ``tol``.
    """
    if method == "quadrature":
        return _shannon_quadrature(params)
    if method == "series":
        return _shannon_series(params, tol, max_terms)
    raise ValueError(f"unknown method {method!r}")


def _shannon_quadrature(params):
    a, b, rho, delta = params.as_tuple()
    log_scale = math.log(params.normalizer) + log_beta(a, b)
    scale = math.exp(log_scale)

    def kernel(x):
        return rho + (1.0 - delta * x) ** 2

    def kernel_log_kernel(x):
        q = kernel(x)
        return q * math.log(q) if q > 0.0 else 0.0

    tol = 1e-15 * scale
    part = weighted_integral(kernel_log_kernel, a - 1.0, b - 1.0, epsabs=tol)
    if a != 1.0:
        part += (a - 1.0) * weighted_integral(kernel, a - 1.0, b - 1.0, weight="alg-loga", epsabs=tol)
    if b != 1.0:
        part += (b - 1.0) * weighted_integral(kernel, a - 1.0, b - 1.0, weight="alg-logb", epsabs=tol)
    return log_scale - part / scale


def _shannon_series(params, tol, max_terms):
    a, b, rho, delta = params.as_tuple()
    if rho != 0.0 or delta != 1.0 or a < 2.0:
        raise DomainError("series Shannon entropy requires rho = 0, delta = 1 and alpha >= 2")
    s = a + b
    z = params.normalizer
    elog_x = (
        b * (b + 1.0) / (z * s * (s + 1.0))
        * (digamma(a) - digamma(s) - (2.0 * s + 1.0) / (s * (s + 1.0)))
    )
    # sum_k (1/k) [P_k - 2 P_{k+1} + P_{k+2}],  P_m = prod_{j<m} (a+j)/(s+j)
    # Terms decay like c k^-p, so the tail past K is about
    # t_K (K / (p - 1) - 1/2) with p read off the local slope; the loop
    # stops once that estimate is below ``tol`` and adds it on.
    total = 0.0
    k0 = 1
    p_k = beta_ratio(a, b, 1)
    chunk = 1024
    lag = 8
    while True:
        ks = np.arange(k0, k0 + chunk + 2, dtype=float)
        factors = (a + ks) / (s + ks)  # P_{m+1} / P_m for m = ks
        prods = p_k * np.concatenate(([1.0], np.cumprod(factors[:-1])))  # P_{k0} ...
        terms = (prods[:-2] - 2.0 * prods[1:-1] + prods[2:]) / ks[:-2]
        kk = ks[lag:-2]
        now, before = terms[lag:], terms[:-lag]
        with np.errstate(divide="ignore", invalid="ignore"):
            power = np.log(before / now) / np.log(kk / (kk - lag))
            tail = now * (kk / (power - 1.0) - 0.5)
        steady = (now > 0.0) & (before > now) & (power > 1.0)
        hit = np.flatnonzero(steady & (np.abs(tail) < tol))
        if hit.size:
            stop = hit[0] + lag
            total += terms[: stop + 1].sum() + tail[hit[0]]
            break
        total += terms[:chunk].sum()
        k0 += chunk
        p_k = prods[chunk]
        if k0 > max_terms:
            raise ConvergenceError(f"Shannon series not converged after {max_terms} terms")
    elog_1mx = -total / z
    return (
        math.log(z) + log_beta(a, b) - (a - 1.0) * elog_x - (b + 1.0) * elog_1mx
    )


@dataclass(frozen=True)
class TsallisBound:
    q: float
    integral: float
    upper_bound: float

    @property
    def entropy(self) -> float:
        """Tsallis entropy (1 - integral) / (q - 1)."""
        return (1.0 - self.integral) / (self.q - 1.0)


def tsallis_bound(q: float, params: BBetaParams) -> TsallisBound:
    """Integral of f**q and its closed-form upper bound (rho >= 1, 0 <= q < 1)."""
    a, b, rho, delta = params.as_tuple()
    if not 0.0 <= q < 1.0:
        raise DomainError("tsallis_bound requires 0 <= q < 1")
    if rho < 1.0:
        raise DomainError("tsallis_bound requires rho >= 1")
    aq = q * (a - 1.0) + 1.0
    bq = q * (b - 1.0) + 1.0
    if aq <= 0.0 or bq <= 0.0:
        raise DomainError("tsallis_bound requires q(alpha-1)+1 > 0 and q(beta-1)+1 > 0")
    log_scale = q * (math.log(params.normalizer) + log_beta(a, b))
    raw = weighted_integral(
        lambda x: (rho + (1.0 - delta * x) ** 2) ** q, aq - 1.0, bq - 1.0,
        epsabs=1e-15 * math.exp(log_beta(aq, bq)),
    )
    integral = raw / math.exp(log_scale)
    bracket = (
        1.0
        + q * rho
        + q * delta**2 * beta_ratio(aq, bq, 2)
        - 2.0 * q * delta * beta_ratio(aq, bq, 1)
    )
    upper = math.exp(log_beta(aq, bq) - log_scale) * bracket
    return TsallisBound(q, integral, upper)

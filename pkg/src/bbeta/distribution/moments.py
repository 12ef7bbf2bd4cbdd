"""Moments and moment-type functionals."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from ..specfun import DomainError, digamma, log_beta, reg_inc_beta
from ._quad import weighted_integral
from .params import BBetaParams, beta_ratio, quadratic_coefs

__all__ = [
    "SummaryStats",
    "DomainFallbackWarning",
    "truncated_moment",
    "raw_moment",
    "integer_moment",
    "summary_stats",
    "mean_residual_life",
    "log_moment",
    "mgf_numeric",
]


class DomainFallbackWarning(UserWarning):
    """A closed form was outside its stated domain; a numerical route was used."""


def _check_order(r, params):
    if not r > -params.alpha:
        raise DomainError(f"moment order must exceed -alpha ({-params.alpha}), got {r}")


def _shifted_ratios(r, params):
    # B(alpha + r + i, beta) / B(alpha, beta) for i = 0, 1, 2
    # common factor B(alpha + r, beta) / B(alpha, beta) times exact rising products,
    # so r = 0 reproduces the normalizer term by term
    a, b = params.alpha, params.beta
    base = 1.0 if r == 0 else math.exp(log_beta(a + r, b) - log_beta(a, b))
    return base * np.array([beta_ratio(a + r, b, i) for i in range(3)])


def truncated_moment(r: float, a: float, b: float, params: BBetaParams) -> float:
    """E[X**r; a <= X <= b]."""
    if not 0.0 <= a < b <= 1.0:
        raise DomainError("truncated_moment requires 0 <= a < b <= 1")
    _check_order(r, params)
    coefs = np.array(quadratic_coefs(params.rho, params.delta))
    shapes = params.alpha + r + np.arange(3.0)
    if a >= 0.5:
        # both limits in the upper half: difference of upper tails keeps precision
        mass = np.asarray(reg_inc_beta(1.0 - a, params.beta, shapes)) - np.asarray(
            reg_inc_beta(1.0 - b, params.beta, shapes)
        )
    else:
        mass = np.asarray(reg_inc_beta(b, shapes, params.beta)) - np.asarray(
            reg_inc_beta(a, shapes, params.beta)
        )
    return float(coefs @ (_shifted_ratios(r, params) * mass) / params.normalizer)


def raw_moment(r: float, params: BBetaParams) -> float:
    """E[X**r] for real ``r > -alpha``, via ratios of beta functions."""
    _check_order(r, params)
    coefs = np.array(quadratic_coefs(params.rho, params.delta))
    return float(coefs @ _shifted_ratios(r, params) / params.normalizer)


def integer_moment(k: int, params: BBetaParams) -> float:
    """E[X**k] for a non-negative integer ``k`` using only rational products."""
    if int(k) != k or k < 0:
        raise DomainError("integer_moment requires a non-negative integer order")
    k = int(k)
    a, b, rho, delta = params.as_tuple()
    s = a + b
    bracket = (
        1.0
        + rho
        - 2.0 * delta * (a + k) / (s + k)
        + delta**2 * (a + k) * (a + k + 1.0) / ((s + k) * (s + k + 1.0))
    )
    return float(beta_ratio(a, b, k) * bracket / params.normalizer)


@dataclass(frozen=True)
class SummaryStats:
    mean: float
    variance: float
    skewness: float
    kurtosis: float


def summary_stats(params: BBetaParams) -> SummaryStats:
    """Mean, variance, skewness and (non-excess) kurtosis."""
    m1, m2, m3, m4 = (integer_moment(k, params) for k in range(1, 5))
    var = m2 - m1**2
    mu3 = m3 - 3 * m1 * m2 + 2 * m1**3
    mu4 = m4 - 4 * m1 * m3 + 6 * m1**2 * m2 - 3 * m1**4
    return SummaryStats(m1, var, mu3 / var**1.5, mu4 / var**2)


def mean_residual_life(x: float, params: BBetaParams) -> float:
    """E[X - x | X >= x], from upper incomplete beta sums."""
    if not 0.0 <= x < 1.0:
        raise DomainError("mean_residual_life requires 0 <= x < 1")
    a, b = params.alpha, params.beta
    coefs = np.array(quadratic_coefs(params.rho, params.delta))
    ratios = np.array([beta_ratio(a, b, i) for i in range(4)])
    upper = np.asarray(reg_inc_beta(1.0 - x, b, a + np.arange(4.0)))
    tail = ratios * upper  # [B(a+i, b) - B_x(a+i, b)] / B(a, b)
    den = coefs @ tail[:3]
    if den <= 0.0:
        raise DomainError("survival function vanishes; mean residual life undefined")
    num = coefs @ (tail[1:] - x * tail[:3])
    return float(num / den)


def log_moment(params: BBetaParams, allow_fallback: bool = True) -> float:
    """E[log X].

    The digamma closed form is used for ``alpha >= 2``. Below that, with
    ``allow_fallback`` the value is integrated numerically and a
    :class:`DomainFallbackWarning` is emitted; otherwise a ``DomainError``
    is raised.
    """
    a, b = params.alpha, params.beta
    if a < 2.0:
        if not allow_fallback:
            raise DomainError("closed-form log moment requires alpha >= 2")
        warnings.warn(
            f"alpha={a} < 2: E[log X] computed by quadrature", DomainFallbackWarning, stacklevel=2
        )
        return _log_moment_quadrature(params)
    coefs = quadratic_coefs(params.rho, params.delta)
    psi_diff = digamma(a) - digamma(a + b)
    total = 0.0
    for i, c in enumerate(coefs):
        prod = beta_ratio(a, b, i)
        dprod = prod * sum(1.0 / (a + j) - 1.0 / (a + b + j) for j in range(i))
        total += c * (psi_diff * prod + dprod)
    return total / params.normalizer


def _log_moment_quadrature(params):
    a, b, rho, delta = params.as_tuple()
    scale = params.normalizer * math.exp(log_beta(a, b))
    val = weighted_integral(
        lambda x: rho + (1.0 - delta * x) ** 2, a - 1.0, b - 1.0, weight="alg-loga",
        epsabs=1e-15 * scale,
    )
    return val / scale


def mgf_numeric(t: float, params: BBetaParams) -> float:
    """E[exp(t X)] by adaptive quadrature."""
    if not math.isfinite(t):
        raise DomainError("mgf_numeric requires finite t")
    a, b, rho, delta = params.as_tuple()
    scale = params.normalizer * math.exp(log_beta(a, b))
    val = weighted_integral(
        lambda x: math.exp(t * x) * (rho + (1.0 - delta * x) ** 2), a - 1.0, b - 1.0,
        epsabs=1e-15 * scale * max(1.0, math.exp(t)), epsrel=1e-12,
    )
    return val / scale

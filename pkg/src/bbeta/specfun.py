"""Special functions used across the package.

Everything here accepts scalars or numpy arrays and broadcasts. Scalar
inputs come back as Python floats.

``log_gamma`` and the standard normal functions delegate to
:mod:`scipy.special`; the incomplete beta function (modified Lentz
continued fraction) and the digamma function (shifted asymptotic series)
are implemented here.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import optimize, special

__all__ = [
    "AccuracySpec",
    "DEFAULT_ACCURACY",
    "DomainError",
    "ConvergenceError",
    "log_gamma",
    "log_beta",
    "beta_fn",
    "inc_beta_lower",
    "reg_inc_beta",
    "reg_inc_beta_inv",
    "digamma",
    "std_normal_cdf",
    "std_normal_quantile",
]

_TINY = 1e-300


class DomainError(ValueError):
    """An argument lies outside the domain of a function."""


class ConvergenceError(ArithmeticError):
    """An iterative scheme ran out of iterations."""


@dataclass(frozen=True)
class AccuracySpec:
    abs_tol: float = 1e-12
    max_iter: int = 300

    def __post_init__(self):
        if not self.abs_tol > 0:
            raise ValueError("abs_tol must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")


DEFAULT_ACCURACY = AccuracySpec()


def _out(value):
    value = np.asarray(value, dtype=float)
    return float(value) if value.ndim == 0 else value


def _require(cond, msg):
    if not np.all(cond):
        raise DomainError(msg)


def log_gamma(x):
    """Natural log of the gamma function for ``x > 0``."""
    x = np.asarray(x, dtype=float)
    _require(np.isfinite(x) & (x > 0), "log_gamma requires finite x > 0")
    return _out(special.gammaln(x))


def log_beta(a, b):
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    _require((a > 0) & (b > 0), "beta function requires a > 0 and b > 0")
    return _out(special.gammaln(a) + special.gammaln(b) - special.gammaln(a + b))


def beta_fn(a, b):
    """Complete beta function B(a, b)."""
    return _out(np.exp(log_beta(a, b)))


def _betacf(a, b, x, accuracy):
    # Modified Lentz evaluation of the continued fraction for I_x(a, b).
    # All arrays share one shape; iteration stops once every entry converged.
    eps = min(accuracy.abs_tol, 1e-12) * 1e-3
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = np.ones_like(x)
    d = 1.0 - qab * x / qap
    d = np.where(np.abs(d) < _TINY, _TINY, d)
    d = 1.0 / d
    h = d.copy()
    done = np.zeros(x.shape, dtype=bool)
    for m in range(1, accuracy.max_iter + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        d = np.where(np.abs(d) < _TINY, _TINY, d)
        c = 1.0 + aa / c
        c = np.where(np.abs(c) < _TINY, _TINY, c)
        d = 1.0 / d
        h = np.where(done, h, h * d * c)
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        d = np.where(np.abs(d) < _TINY, _TINY, d)
        c = 1.0 + aa / c
        c = np.where(np.abs(c) < _TINY, _TINY, c)
        d = 1.0 / d
        step = d * c
        h = np.where(done, h, h * step)
        done |= np.abs(step - 1.0) < eps
        if done.all():
            return h
    raise ConvergenceError(
        f"incomplete beta continued fraction did not converge in {accuracy.max_iter} iterations"
    )


def reg_inc_beta(x, a, b, accuracy=DEFAULT_ACCURACY):
    """Regularized incomplete beta function I_x(a, b)."""
    x, a, b = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (x, a, b)))
    _require((a > 0) & (b > 0), "incomplete beta requires a > 0 and b > 0")
    _require((x >= 0) & (x <= 1), "incomplete beta requires 0 <= x <= 1")
    out = np.empty(x.shape)
    edge0 = x == 0
    edge1 = x == 1
    inner = ~(edge0 | edge1)
    out[edge0] = 0.0
    out[edge1] = 1.0
    if inner.any():
        xi, ai, bi = x[inner], a[inner], b[inner]
        swap = xi >= (ai + 1.0) / (ai + bi + 2.0)
        # evaluate the fraction where it converges fast, then reflect
        xs = np.where(swap, 1.0 - xi, xi)
        as_ = np.where(swap, bi, ai)
        bs = np.where(swap, ai, bi)
        lfront = (
            as_ * np.log(xs)
            + bs * np.log1p(-xs)
            - (special.gammaln(as_) + special.gammaln(bs) - special.gammaln(as_ + bs))
        )
        val = np.exp(lfront) * _betacf(as_, bs, xs, accuracy) / as_
        out[inner] = np.where(swap, 1.0 - val, val)
    return _out(np.clip(out, 0.0, 1.0))


def inc_beta_lower(x, a, b, accuracy=DEFAULT_ACCURACY):
    """Non-regularized lower incomplete beta B_x(a, b) = int_0^x t^(a-1) (1-t)^(b-1) dt."""
    return _out(np.asarray(reg_inc_beta(x, a, b, accuracy)) * np.exp(log_beta(a, b)))


def reg_inc_beta_inv(p, a, b):
    """Inverse of ``reg_inc_beta`` in its first argument (scalar)."""
    if not (0.0 <= p <= 1.0):
        raise DomainError("reg_inc_beta_inv requires 0 <= p <= 1")
    if a <= 0 or b <= 0:
        raise DomainError("reg_inc_beta_inv requires a > 0 and b > 0")
    if p == 0.0:
        return 0.0
    if p == 1.0:
        return 1.0
    return float(
        optimize.brentq(
            lambda t: reg_inc_beta(t, a, b) - p,
            0.0,
            1.0,
            xtol=1e-300,
            rtol=4 * np.finfo(float).eps,
            maxiter=500,
        )
    )


# Bernoulli-number coefficients B_2k / (2k) of the asymptotic digamma series.
_DIGAMMA_ASYMPTOTIC = (
    1.0 / 12,
    -1.0 / 120,
    1.0 / 252,
    -1.0 / 240,
    1.0 / 132,
    -691.0 / 32760,
    1.0 / 12,
)


def digamma(x):
    """psi(x) = d/dx log Gamma(x) for x > 0."""
    x = np.array(x, dtype=float)
    _require(np.isfinite(x) & (x > 0), "digamma requires finite x > 0")
    shift = np.zeros_like(x)
    # psi(x) = psi(x + 1) - 1/x until the asymptotic series is accurate
    small = x < 6.0
    while small.any():
        shift = shift - np.where(small, 1.0 / np.where(small, x, 1.0), 0.0)
        x = np.where(small, x + 1.0, x)
        small = x < 6.0
    inv2 = 1.0 / (x * x)
    series = np.zeros_like(x)
    for coef in reversed(_DIGAMMA_ASYMPTOTIC):
        series = (series + coef) * inv2
    return _out(np.log(x) - 0.5 / x - series + shift)


def std_normal_cdf(z):
    z = np.asarray(z, dtype=float)
    _require(~np.isnan(z), "std_normal_cdf requires a number")
    return _out(special.ndtr(z))


def std_normal_quantile(p):
    """Inverse standard normal CDF on the open interval (0, 1)."""
    p = np.asarray(p, dtype=float)
    _require((p > 0) & (p < 1), "std_normal_quantile requires 0 < p < 1")
    return _out(special.ndtri(p))

"""Density, distribution, survival, hazard and quantile functions."""

from __future__ import annotations

import numpy as np
from scipy import special

from ..specfun import ConvergenceError, DomainError, log_beta, reg_inc_beta
from .params import BBetaParams, beta_ratio, normalizer_arrays, quadratic_coefs

__all__ = ["logpdf", "pdf", "cdf", "cdf_arrays", "sf", "hazard", "quantile"]


def _scalar_or_array(value, like):
    return float(value) if np.ndim(like) == 0 else value


def logpdf_arrays(x, alpha, beta, rho, delta):
    """Vectorised log-density without parameter validation (support assumed)."""
    with np.errstate(divide="ignore", invalid="ignore"):
        return (
            np.log(rho + (1.0 - delta * x) ** 2)
            + special.xlogy(alpha - 1.0, x)
            + special.xlog1py(beta - 1.0, -x)
            - np.log(normalizer_arrays(alpha, beta, rho, delta))
            - log_beta(alpha, beta)
        )


def logpdf(x, params: BBetaParams):
    x_arr = np.asarray(x, dtype=float)
    inside = (x_arr >= 0.0) & (x_arr <= 1.0)
    out = np.full(x_arr.shape, -np.inf)
    out[inside] = logpdf_arrays(x_arr[inside], *params.as_tuple())
    return _scalar_or_array(out, x)


def pdf(x, params: BBetaParams):
    """Density; zero off [0, 1] and ``inf`` at an endpoint where it diverges."""
    x_arr = np.asarray(x, dtype=float)
    with np.errstate(over="ignore"):
        out = np.exp(np.asarray(logpdf(x_arr, params)))
    return _scalar_or_array(out, x)


def _weighted_reg_inc(x, params, upper=False):
    # sum_i c_i * B(alpha + i, beta)/B(alpha, beta) * I_x(alpha + i, beta)
    # (or the upper tail I_{1-x}(beta, alpha + i) when ``upper``)
    a, b, rho, delta = params.as_tuple()
    coefs = quadratic_coefs(rho, delta)
    shifts = np.arange(3.0)
    xx = np.asarray(x, dtype=float)[..., None]
    if upper:
        terms = reg_inc_beta(1.0 - xx, b, a + shifts)
    else:
        terms = reg_inc_beta(xx, a + shifts, b)
    weights = np.array([c * beta_ratio(a, b, i) for i, c in enumerate(coefs)])
    return np.asarray(terms) @ weights


def cdf(x, params: BBetaParams):
    x_arr = np.asarray(x, dtype=float)
    z = params.normalizer
    inner = np.clip(x_arr, 0.0, 1.0)
    out = np.clip(_weighted_reg_inc(inner, params) / z, 0.0, 1.0)
    return _scalar_or_array(out, x)


def cdf_arrays(x, alpha, beta, rho, delta):
    """CDF with per-observation shapes (x, alpha, beta broadcast together)."""
    x, alpha, beta = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (x, alpha, beta)))
    c0, c1, c2 = quadratic_coefs(rho, delta)
    x = np.clip(x, 0.0, 1.0)
    total = c0 * np.asarray(reg_inc_beta(x, alpha, beta))
    if delta != 0.0:
        total = total + c1 * beta_ratio(alpha, beta, 1) * np.asarray(reg_inc_beta(x, alpha + 1.0, beta))
        total = total + c2 * beta_ratio(alpha, beta, 2) * np.asarray(reg_inc_beta(x, alpha + 2.0, beta))
    return np.clip(total / normalizer_arrays(alpha, beta, rho, delta), 0.0, 1.0)


def sf(x, params: BBetaParams, method: str = "complement"):
    """Survival function.

    ``method="complement"`` returns ``1 - cdf``; ``method="sum"`` sums the
    upper incomplete beta terms directly, which keeps precision in the
    right tail.
    """
    if method == "complement":
        out = 1.0 - np.asarray(cdf(x, params))
    elif method == "sum":
        inner = np.clip(np.asarray(x, dtype=float), 0.0, 1.0)
        out = np.clip(_weighted_reg_inc(inner, params, upper=True) / params.normalizer, 0.0, 1.0)
    else:
        raise ValueError(f"unknown method {method!r}")
    return _scalar_or_array(out, x)


def hazard(x, params: BBetaParams, method: str = "ratio"):
    """Hazard rate on (0, 1).

    ``ratio`` divides ``pdf`` by ``sf``; ``closed_form`` evaluates the
    un-normalized kernel over the weighted upper incomplete beta sum, where
    the normalizing constant cancels.
    """
    x_arr = np.asarray(x, dtype=float)
    if np.any((x_arr <= 0.0) | (x_arr >= 1.0)):
        raise DomainError("hazard is defined on the open interval (0, 1)")
    if method == "ratio":
        num = np.asarray(pdf(x_arr, params))
        den = np.asarray(sf(x_arr, params))
    elif method == "closed_form":
        a, b, rho, delta = params.as_tuple()
        num = (rho + (1.0 - delta * x_arr) ** 2) * np.exp(
            (a - 1.0) * np.log(x_arr) + (b - 1.0) * np.log1p(-x_arr) - log_beta(a, b)
        )
        den = _weighted_reg_inc(x_arr, params, upper=True)
    else:
        raise ValueError(f"unknown method {method!r}")
    if np.any(den <= 0.0):
        raise DomainError("survival function vanishes; hazard undefined")
    return _scalar_or_array(num / den, x)


def quantile(p, params: BBetaParams, max_iter: int = 200, tol: float = 1e-12):
    """Inverse CDF by safeguarded Newton iteration inside a shrinking bracket.

    Every probability keeps its own bracket [lo, hi] on [0, 1]; a Newton
    step that leaves the bracket (or meets a non-finite density) is replaced
    by bisection.
    """
    p_arr = np.atleast_1d(np.asarray(p, dtype=float))
    if np.any((p_arr < 0.0) | (p_arr > 1.0) | np.isnan(p_arr)):
        raise DomainError("quantile requires 0 <= p <= 1")
    x = np.where(p_arr >= 1.0, 1.0, 0.0)
    todo = np.flatnonzero((p_arr > 0.0) & (p_arr < 1.0))
    target = p_arr[todo]
    lo = np.zeros(todo.size)
    hi = np.ones(todo.size)
    cur = np.full(todo.size, 0.5)
    eps = np.finfo(float).eps
    for _ in range(max_iter):
        if todo.size == 0:
            break
        f = np.asarray(cdf(cur, params)) - target
        below = f < 0.0
        lo = np.where(below, cur, lo)
        hi = np.where(below, hi, cur)
        close = np.abs(f) <= tol
        done = close | (hi - lo <= 4.0 * eps * np.maximum(cur, 1e-300))
        if np.any(close):
            # one last Newton step squares the remaining error
            with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
                polished = cur[close] - f[close] / np.asarray(pdf(cur[close], params))
            safe = np.isfinite(polished) & (polished >= lo[close]) & (polished <= hi[close])
            cur[close] = np.where(safe, polished, cur[close])
        x[todo[done]] = cur[done]
        keep = ~done
        todo, target, lo, hi, cur, f = (v[keep] for v in (todo, target, lo, hi, cur, f))
        if todo.size == 0:
            break
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            dens = np.asarray(pdf(cur, params))
            step = cur - f / dens
        ok = np.isfinite(step) & (step > lo) & (step < hi)
        # bisect geometrically when the bracket spans several decades near 0
        mid = np.where((lo > 0.0) & (hi > 8.0 * lo), np.sqrt(lo * hi), 0.5 * (lo + hi))
        mid = np.where((lo == 0.0) & (hi < 1e-3), 0.01 * hi, mid)
        cur = np.where(ok, step, mid)
    else:
        if todo.size:
            raise ConvergenceError(f"quantile did not converge in {max_iter} iterations")
    return float(x[0]) if np.ndim(p) == 0 else x.reshape(np.shape(p))

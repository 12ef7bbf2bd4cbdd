"""Quasi-Newton minimisation with finite-difference derivatives."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

EPS = np.finfo(float).eps
GRAD_STEP = EPS ** (1.0 / 3.0)
HESS_STEP = EPS ** 0.25


def central_gradient(fun: Callable[[np.ndarray], float], x: np.ndarray) -> np.ndarray:
    """Central differences with step ``cbrt(eps) * max(1, |x_i|)``."""
    x = np.asarray(x, dtype=float)
    g = np.empty_like(x)
    for i in range(x.size):
        h = GRAD_STEP * max(1.0, abs(x[i]))
        xp = x.copy()
        xm = x.copy()
        xp[i] += h
        xm[i] -= h
        g[i] = (fun(xp) - fun(xm)) / (xp[i] - xm[i])
    return g


def central_hessian(fun: Callable[[np.ndarray], float], x: np.ndarray, steps=None) -> np.ndarray:
    """Symmetric central-difference Hessian; default steps ``eps**0.25 * max(1, |x_i|)``."""
    x = np.asarray(x, dtype=float)
    n = x.size
    h = HESS_STEP * np.maximum(1.0, np.abs(x)) if steps is None else np.asarray(steps, dtype=float)
    f0 = fun(x)
    hess = np.empty((n, n))

    def at(di):
        return fun(x + di)

    for i in range(n):
        ei = np.zeros(n)
        ei[i] = h[i]
        hess[i, i] = (at(ei) - 2.0 * f0 + at(-ei)) / h[i] ** 2
        for j in range(i):
            ej = np.zeros(n)
            ej[j] = h[j]
            val = (at(ei + ej) - at(ei - ej) - at(ej - ei) + at(-ei - ej)) / (4.0 * h[i] * h[j])
            hess[i, j] = hess[j, i] = val
    return hess


@dataclass
class OptimizeResult:
    x: np.ndarray
    fun: float
    grad: np.ndarray
    converged: bool
    iterations: int
    message: str
    history: list[float] = field(default_factory=list)


def bfgs(
    fun: Callable[[np.ndarray], float],
    x0,
    grad: Callable[[np.ndarray], np.ndarray] | None = None,
    gtol: float = 1e-6,
    max_iter: int = 500,
    c1: float = 1e-4,
    max_step: float = 10.0,
) -> OptimizeResult:
    """Minimise ``fun`` by BFGS with an Armijo backtracking line search.

    Non-finite trial values are treated as failed sufficient-decrease tests,
    so every accepted iterate has a finite, no larger objective. Converged
    means the gradient max-norm fell to ``gtol``.
    """
    if grad is None:
        grad = lambda z: central_gradient(fun, z)  # noqa: E731
    x = np.array(x0, dtype=float)
    f = fun(x)
    if not np.isfinite(f):
        raise ValueError("objective is not finite at the starting point")
    g = grad(x)
    n = x.size
    hinv = np.eye(n)
    history = [f]
    message = "iteration limit reached"
    for it in range(max_iter):
        if np.max(np.abs(g)) <= gtol:
            return OptimizeResult(x, f, g, True, it, "gradient below tolerance", history)
        d = -hinv @ g
        slope = g @ d
        if not slope < 0.0:
            hinv = np.eye(n)
            d = -g
            slope = g @ d
        norm = np.linalg.norm(d)
        if norm > max_step:
            d *= max_step / norm
            slope *= max_step / norm
        t = 1.0
        while True:
            x_new = x + t * d
            f_new = fun(x_new)
            if np.isfinite(f_new) and f_new <= f + c1 * t * slope:
                break
            # quadratic interpolation when possible, else halve
            if np.isfinite(f_new):
                denom = 2.0 * (f_new - f - t * slope)
                t_q = -slope * t * t / denom if denom > 0 else 0.5 * t
                t = min(0.5 * t, max(0.1 * t, t_q))
            else:
                t *= 0.5
            if t * norm < 1e-14 * max(1.0, np.linalg.norm(x)):
                message = "line search failed"
                return OptimizeResult(x, f, g, np.max(np.abs(g)) <= gtol, it, message, history)
        g_new = grad(x_new)
        s = x_new - x
        y = g_new - g
        sy = s @ y
        if sy > 1e-10 * np.linalg.norm(s) * np.linalg.norm(y):
            if it == 0:
                hinv = np.eye(n) * (sy / (y @ y))
            rho = 1.0 / sy
            hy = hinv @ y
            hinv = hinv + ((sy + y @ hy) * rho**2) * np.outer(s, s) - rho * (
                np.outer(hy, s) + np.outer(s, hy)
            )
        x, f, g = x_new, f_new, g_new
        history.append(f)
    return OptimizeResult(x, f, g, bool(np.max(np.abs(g)) <= gtol), max_iter, message, history)

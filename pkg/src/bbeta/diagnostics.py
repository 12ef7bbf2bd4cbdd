"""Residuals and goodness-of-fit measures for fitted regressions.

The response is continuous, so the quantile residual ``Phi^-1(F(y_i))``
needs no randomisation: it is the probability integral transform (PIT)
mapped to the normal scale.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy import special

from .distribution.functions import cdf_arrays
from .distribution.sampling import draw, make_rng, spawn_seeds
from .regression import Coefficients, FitResult, RegressionModel, fit
from .specfun import std_normal_quantile

__all__ = [
    "PIT_CLAMP",
    "ResidualReport",
    "KSResult",
    "InformationCriteria",
    "EnvelopeBands",
    "pit_values",
    "describe",
    "quantile_residuals",
    "ks_statistic",
    "information_criteria",
    "halfnormal_envelope",
    "worker_count",
]

PIT_CLAMP = 1e-15


def worker_count(n_jobs: int | None = None) -> int:
    """Worker threads: explicit ``n_jobs``, else ``BBETA_THREADS``, else 1."""
    if n_jobs is None:
        n_jobs = int(os.environ.get("BBETA_THREADS", "1") or 1)
    cap = os.environ.get("BBETA_THREADS")
    if cap:
        n_jobs = min(n_jobs, int(cap))
    return max(1, int(n_jobs))


def describe(values) -> tuple[float, float, float, float]:
    """Mean, sample standard deviation (n - 1), skewness and kurtosis.

    Skewness and kurtosis are the third and fourth central sample moments
    scaled by the (n - 1) standard deviation; kurtosis is not excess. A single
    value, or a constant sample, gives NaN where the measure is undefined.
    """
    r = np.asarray(values, dtype=float)
    mean = float(r.mean())
    if r.size < 2:
        return mean, math.nan, math.nan, math.nan
    sd = float(r.std(ddof=1))
    if sd == 0.0:
        return mean, sd, math.nan, math.nan
    dev = r - mean
    return mean, sd, float(np.mean(dev**3) / sd**3), float(np.mean(dev**4) / sd**4)


@dataclass(frozen=True)
class ResidualReport:
    residuals: np.ndarray
    pit: np.ndarray
    mean: float
    std_dev: float
    skewness: float
    kurtosis: float
    n_clamped: int = 0

    @classmethod
    def from_pit(cls, pit) -> "ResidualReport":
        pit = np.asarray(pit, dtype=float)
        clamped = np.clip(pit, PIT_CLAMP, 1.0 - PIT_CLAMP)
        n_clamped = int(np.sum(clamped != pit))
        res = np.asarray(std_normal_quantile(clamped))
        return cls(res, pit, *describe(res), n_clamped=n_clamped)

    def summary(self) -> dict:
        return {
            "n": int(self.residuals.size),
            "mean": self.mean,
            "std_dev": self.std_dev,
            "skewness": self.skewness,
            "kurtosis": self.kurtosis,
            "n_clamped": self.n_clamped,
        }


def pit_values(data, model: RegressionModel, coef: Coefficients) -> np.ndarray:
    alpha, beta = model.shapes(coef)
    return cdf_arrays(np.asarray(data, dtype=float), alpha, beta, coef.rho, coef.delta)


def quantile_residuals(data, model: RegressionModel, coef: Coefficients) -> ResidualReport:
    """Quantile residuals at the given coefficients.

    PIT values are clamped to [1e-15, 1 - 1e-15] before the normal
    quantile; ``n_clamped`` counts how many needed it.
    """
    return ResidualReport.from_pit(pit_values(data, model, coef))


@dataclass(frozen=True)
class KSResult:
    statistic: float
    p_value: float


def ks_statistic(pit_values) -> KSResult:
    """One-sample Kolmogorov-Smirnov distance of PIT values from Uniform(0, 1).

    The p-value uses the asymptotic Kolmogorov distribution of
    ``sqrt(n) * D``.
    """
    u = np.sort(np.asarray(pit_values, dtype=float).ravel())
    n = u.size
    if n == 0:
        raise ValueError("ks_statistic needs at least one value")
    i = np.arange(1, n + 1)
    d = max(float(np.max(i / n - u)), float(np.max(u - (i - 1) / n)))
    return KSResult(d, float(special.kolmogorov(math.sqrt(n) * d)))


@dataclass(frozen=True)
class InformationCriteria:
    aic: float
    bic: float


def information_criteria(loglik: float, k: int, n: int) -> InformationCriteria:
    if k < 1 or n < 1:
        raise ValueError("k and n must be positive")
    return InformationCriteria(-2.0 * loglik + 2.0 * k, -2.0 * loglik + k * math.log(n))


@dataclass(frozen=True)
class EnvelopeBands:
    """Simulated bands for sorted absolute quantile residuals.

    ``theoretical`` holds half-normal plotting positions
    ``Phi^-1((i + n - 1/8) / (2n + 1/2))`` for the x axis.
    """

    sorted_abs_residuals: np.ndarray
    lower: np.ndarray
    median: np.ndarray
    upper: np.ndarray
    theoretical: np.ndarray
    n_sim: int

    def coverage(self) -> float:
        inside = (self.sorted_abs_residuals >= self.lower) & (self.sorted_abs_residuals <= self.upper)
        return float(inside.mean())

    def rows(self) -> list[dict]:
        return [
            {
                "order": i + 1,
                "theoretical": float(self.theoretical[i]),
                "abs_residual": float(self.sorted_abs_residuals[i]),
                "lower": float(self.lower[i]),
                "median": float(self.median[i]),
                "upper": float(self.upper[i]),
            }
            for i in range(self.sorted_abs_residuals.size)
        ]


def halfnormal_envelope(
    data,
    model: RegressionModel,
    fit_result: FitResult,
    n_sim: int = 100,
    seed=0,
    refit: bool = False,
    n_jobs: int | None = None,
) -> EnvelopeBands:
    """Half-normal envelope from ``n_sim`` datasets simulated at the estimates.

    Residuals of each simulated dataset are computed at the fitted
    coefficients unless ``refit`` is set, in which case every dataset is
    refitted first. Bands are the 2.5/50/97.5 percentiles per order
    statistic.
    """
    if n_sim < 19:
        raise ValueError("n_sim must be at least 19")
    coef = fit_result.estimates
    fixed = {name: getattr(coef, name) for name, free in
             zip(("rho", "delta"), fit_result.free[-2:]) if not free}
    observed = np.sort(np.abs(quantile_residuals(data, model, coef).residuals))
    alpha, beta = model.shapes(coef)
    seeds = spawn_seeds(seed, n_sim)

    def one(s):
        y = draw(make_rng(s), alpha, beta, coef.rho, coef.delta)
        # guard against draws that round onto the boundary
        y = np.clip(y, np.nextafter(0.0, 1.0), np.nextafter(1.0, 0.0))
        c = coef
        if refit:
            c = fit(y, model, start=coef, fixed=fixed).estimates
        return np.sort(np.abs(quantile_residuals(y, model, c).residuals))

    workers = worker_count(n_jobs)
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            sims = list(pool.map(one, seeds))
    else:
        sims = [one(s) for s in seeds]
    stack = np.vstack(sims)
    lower, median, upper = np.percentile(stack, [2.5, 50.0, 97.5], axis=0)
    n = observed.size
    i = np.arange(1, n + 1)
    theoretical = np.asarray(std_normal_quantile((i + n - 0.125) / (2 * n + 0.5)))
    return EnvelopeBands(observed, lower, median, upper, theoretical, n_sim)

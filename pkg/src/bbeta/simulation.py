"""Monte Carlo study of coefficient recovery and residual behaviour.

For each sample size and replication a covariate ``z ~ U(0, 1)`` is drawn,
responses are generated from ``log(alpha_i) = w_i' gamma`` and
``log(beta_i) = z_i' zeta`` at the true coefficients, the model is refitted
and quantile residuals are taken at the estimates.

Every replication owns a seed derived from ``(seed, n, rep)``, so results do
not depend on execution order or on which other sample sizes are run.
"""

from __future__ import annotations

import csv
import json
import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .diagnostics import describe, ks_statistic, quantile_residuals, worker_count
from .distribution.sampling import draw, make_rng
from .regression import Coefficients, RegressionModel, fit

__all__ = [
    "DEFAULT_TRUTH",
    "DEFAULT_SAMPLE_SIZES",
    "McConfig",
    "RunningMoments",
    "ReplicationResult",
    "McStudyReport",
    "simulate_design",
    "run_replication",
    "run_mc_study",
]

DEFAULT_TRUTH = Coefficients(gamma=[-1.8, 5.9], zeta=[3.8, -2.4], rho=0.1, delta=2.4)
DEFAULT_SAMPLE_SIZES = (50, 100, 200, 300)
COVARIATE_LAWS = ("standard_uniform",)
KS_LEVEL = 0.05


@dataclass(frozen=True)
class McConfig:
    """Study settings.

    ``fixed_design`` draws the covariates once per sample size and reuses
    them in every replication; otherwise they are redrawn each time.
    """

    true_coef: Coefficients = DEFAULT_TRUTH
    sample_sizes: tuple[int, ...] = DEFAULT_SAMPLE_SIZES
    n_reps: int = 200
    seed: int = 0
    covariate_law: str = "standard_uniform"
    fixed_design: bool = False
    n_jobs: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "sample_sizes", tuple(int(n) for n in self.sample_sizes))
        if not self.sample_sizes or min(self.sample_sizes) < 1:
            raise ValueError("sample_sizes must be non-empty and positive")
        if self.n_reps < 1:
            raise ValueError("n_reps must be >= 1")
        if self.covariate_law not in COVARIATE_LAWS:
            raise ValueError(f"covariate_law must be one of {COVARIATE_LAWS}")
        k = len(self.true_coef.gamma) + len(self.true_coef.zeta) + 2
        if min(self.sample_sizes) <= k:
            raise ValueError(f"every sample size must exceed the {k} free parameters")

    def to_dict(self) -> dict:
        return {
            "true_coef": self.true_coef.to_dict(),
            "sample_sizes": list(self.sample_sizes),
            "n_reps": self.n_reps,
            "seed": self.seed,
            "covariate_law": self.covariate_law,
            "fixed_design": self.fixed_design,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "McConfig":
        d = dict(d)
        if "true_coef" in d:
            d["true_coef"] = Coefficients.from_dict(d["true_coef"])
        if "sample_sizes" in d:
            d["sample_sizes"] = tuple(d["sample_sizes"])
        return cls(**d)


class RunningMoments:
    """Welford accumulator for the mean and sum of squared deviations."""

    def __init__(self, size: int):
        self.count = 0
        self.mean = np.zeros(size)
        self.m2 = np.zeros(size)

    def push(self, value) -> None:
        value = np.asarray(value, dtype=float)
        self.count += 1
        d = value - self.mean
        self.mean = self.mean + d / self.count
        self.m2 = self.m2 + d * (value - self.mean)

    @property
    def mean_square(self) -> np.ndarray:
        """Mean of squares, ``m2 / count + mean**2``."""
        if self.count == 0:
            return np.full_like(self.mean, np.nan)
        return self.m2 / self.count + self.mean**2


def _model_for(z: np.ndarray, coef: Coefficients) -> RegressionModel:
    n = z.shape[0]
    ones = np.ones((n, 1))
    p, q = len(coef.gamma), len(coef.zeta)
    W = np.hstack([ones, z[:, : p - 1]])
    Z = np.hstack([ones, z[:, : q - 1]])
    return RegressionModel(W, Z)


def _seed(config: McConfig, *key: int) -> np.random.SeedSequence:
    return np.random.SeedSequence(config.seed, spawn_key=tuple(int(k) for k in key))


def simulate_design(n: int, coef: Coefficients, rng) -> tuple[RegressionModel, np.ndarray]:
    """Covariates and responses for one dataset from the regression model."""
    rng = make_rng(rng)
    z = rng.random((n, max(len(coef.gamma), len(coef.zeta)) - 1))
    model = _model_for(z, coef)
    alpha, beta = model.shapes(coef)
    return model, draw(rng, alpha, beta, coef.rho, coef.delta)


@dataclass(frozen=True)
class ReplicationResult:
    n: int
    rep: int
    estimates: np.ndarray | None
    residual_stats: tuple[float, float, float, float] | None
    ks_p_value: float | None
    failure: str | None = None


def run_replication(config: McConfig, n: int, rep: int, fixed_z: np.ndarray | None = None) -> ReplicationResult:
    coef = config.true_coef
    rng = make_rng(_seed(config, n, rep))
    try:
        if fixed_z is None:
            model, y = simulate_design(n, coef, rng)
        else:
            model = _model_for(fixed_z, coef)
            alpha, beta = model.shapes(coef)
            y = draw(rng, alpha, beta, coef.rho, coef.delta)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            result = fit(y, model)
        if not result.converged:
            return ReplicationResult(n, rep, None, None, None, f"not converged: {result.message}")
        report = quantile_residuals(y, model, result.estimates)
        ks = ks_statistic(report.pit)
    except (ValueError, ArithmeticError, np.linalg.LinAlgError) as exc:
        return ReplicationResult(n, rep, None, None, None, f"{type(exc).__name__}: {exc}")
    stats = (report.mean, report.std_dev, report.skewness, report.kurtosis)
    return ReplicationResult(n, rep, result.estimates.as_vector(), stats, ks.p_value)


@dataclass
class McStudyReport:
    """Aggregated study output.

    ``parameter_rows`` has one entry per (n, parameter) with bias, relative
    bias and RMSE. ``residual_rows`` has one entry per n with the
    replication-averaged residual mean, standard deviation, skewness and
    kurtosis plus the share of KS tests rejecting at 5%. Failed
    replications are excluded from every aggregate and counted in
    ``rep_failures``.
    """

    config: McConfig
    param_names: tuple[str, ...]
    parameter_rows: list[dict]
    residual_rows: list[dict]
    rep_failures: dict[int, int]
    failure_messages: dict[int, list[str]] = field(default_factory=dict)
    estimates: dict[int, np.ndarray] = field(default_factory=dict, repr=False)

    def row(self, n: int, parameter: str) -> dict:
        for r in self.parameter_rows:
            if r["n"] == n and r["parameter"] == parameter:
                return r
        raise KeyError((n, parameter))

    def residual_row(self, n: int) -> dict:
        for r in self.residual_rows:
            if r["n"] == n:
                return r
        raise KeyError(n)

    def to_dict(self) -> dict:
        return {
            "config": self.config.to_dict(),
            "parameters": list(self.param_names),
            "bias_rmse": [_clean(r) for r in self.parameter_rows],
            "residuals": [_clean(r) for r in self.residual_rows],
            "rep_failures": {str(n): c for n, c in self.rep_failures.items()},
            "notes": {
                "bias": "mean(estimate - true) over successful replications",
                "relative_bias": "bias / true (null when true is 0)",
                "rmse": "sqrt(mean((estimate - true)^2))",
                "residual_measures": "per-replication statistics averaged over replications",
                "ks": "share of replications whose KS-on-PIT p-value is below 0.05",
            },
        }

    def to_json(self, path=None) -> str:
        text = json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"
        if path is not None:
            with open(path, "w", encoding="utf-8") as fh:
                fh.write(text)
        return text

    def to_csv(self, path, residual_path=None) -> tuple[str, str]:
        """Write bias/RMSE rows to ``path`` and residual rows beside it.

        The residual file defaults to ``<stem>_residuals.csv``.
        """
        path = str(path)
        if residual_path is None:
            stem = path[:-4] if path.endswith(".csv") else path
            residual_path = stem + "_residuals.csv"
        _write_csv(path, PARAMETER_COLUMNS, self.parameter_rows)
        _write_csv(residual_path, RESIDUAL_COLUMNS, self.residual_rows)
        return path, str(residual_path)


PARAMETER_COLUMNS = ("n", "parameter", "true", "mean_estimate", "bias", "relative_bias", "rmse", "n_ok")
RESIDUAL_COLUMNS = ("n", "mean", "std_dev", "skewness", "kurtosis", "ks_reject_rate", "n_ok", "n_failed")


def _clean(row: dict) -> dict:
    return {k: (None if isinstance(v, float) and not math.isfinite(v) else v) for k, v in row.items()}


def _write_csv(path, columns, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=columns, lineterminator="\n")
        writer.writeheader()
        for r in rows:
            writer.writerow({k: ("" if r[k] is None or (isinstance(r[k], float) and math.isnan(r[k]))
                                 else (repr(r[k]) if isinstance(r[k], float) else r[k]))
                             for k in columns})


def _aggregate(n, results, truth, names):
    k = truth.size
    errors = RunningMoments(k)
    resid = RunningMoments(4)
    rejections = 0
    ok = [r for r in results if r.failure is None]
    for r in ok:
        errors.push(r.estimates - truth)
        resid.push(r.residual_stats)
        rejections += r.ks_p_value < KS_LEVEL
    rmse = np.sqrt(errors.mean_square)
    param_rows = []
    for j, name in enumerate(names):
        bias = float(errors.mean[j]) if ok else math.nan
        param_rows.append({
            "n": n,
            "parameter": name,
            "true": float(truth[j]),
            "mean_estimate": bias + float(truth[j]),
            "bias": bias,
            "relative_bias": bias / float(truth[j]) if truth[j] != 0 else math.nan,
            "rmse": float(rmse[j]) if ok else math.nan,
            "n_ok": len(ok),
        })
    means = resid.mean if ok else np.full(4, math.nan)
    resid_row = {
        "n": n,
        "mean": float(means[0]),
        "std_dev": float(means[1]),
        "skewness": float(means[2]),
        "kurtosis": float(means[3]),
        "ks_reject_rate": rejections / len(ok) if ok else math.nan,
        "n_ok": len(ok),
        "n_failed": len(results) - len(ok),
    }
    return param_rows, resid_row


def run_mc_study(config: McConfig) -> McStudyReport:
    """Run every (n, replication) pair and aggregate in replication order."""
    truth = config.true_coef.as_vector()
    p, q = len(config.true_coef.gamma), len(config.true_coef.zeta)
    names = tuple(f"gamma_{j}" for j in range(p)) + tuple(f"zeta_{j}" for j in range(q)) + ("rho", "delta")
    workers = worker_count(config.n_jobs)
    param_rows, resid_rows, failures, messages, estimates = [], [], {}, {}, {}
    for n in config.sample_sizes:
        fixed_z = None
        if config.fixed_design:
            fixed_z = make_rng(_seed(config, n)).random((n, max(p, q) - 1))

        def one(rep, n=n, fixed_z=fixed_z):
            return run_replication(config, n, rep, fixed_z)

        if workers > 1:
            with ThreadPoolExecutor(workers) as pool:
                results = list(pool.map(one, range(config.n_reps)))
        else:
            results = [one(rep) for rep in range(config.n_reps)]
        rows, resid = _aggregate(n, results, truth, names)
        param_rows.extend(rows)
        resid_rows.append(resid)
        failures[n] = resid["n_failed"]
        messages[n] = [f"rep {r.rep}: {r.failure}" for r in results if r.failure is not None]
        estimates[n] = np.array([r.estimates if r.failure is None else np.full(truth.size, np.nan)
                                 for r in results])
    return McStudyReport(config, names, param_rows, resid_rows, failures, messages, estimates)

"""Bimodal beta regression with log links on both shape parameters.

``log(alpha_i) = w_i' gamma`` and ``log(beta_i) = z_i' zeta``, with ``rho``
and ``delta`` shared across observations. Estimation maximises the
log-likelihood by BFGS on ``(gamma, zeta, log rho, delta)``; standard
errors come from a finite-difference observed information matrix in the
natural ``(gamma, zeta, rho, delta)`` coordinates.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Mapping, NamedTuple

import numpy as np
from scipy import optimize as sp_optimize
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_array, check_is_fitted

from .distribution.functions import logpdf_arrays
from .distribution.params import beta_ratio, normalizer_arrays
from .optimize import HESS_STEP, bfgs, central_gradient, central_hessian
from .specfun import DomainError, std_normal_quantile

__all__ = [
    "ResponseDomainError",
    "NonConvergenceWarning",
    "SingularInformationWarning",
    "RegressionModel",
    "Coefficients",
    "FitResult",
    "Prediction",
    "check_response",
    "loglik",
    "loglik_terms",
    "fit",
    "fit_beta_regression",
    "predict",
    "BBetaRegressor",
]

NUDGE_EPS = 1e-6
SHARED_NAMES = ("rho", "delta")
DELTA_STARTS = (0.0, 2.0, 4.0)


class ResponseDomainError(DomainError):
    """Responses outside the open unit interval."""

    def __init__(self, rows):
        self.rows = list(rows)
        shown = ", ".join(map(str, self.rows[:20]))
        more = "" if len(self.rows) <= 20 else f" (+{len(self.rows) - 20} more)"
        super().__init__(f"responses must lie strictly inside (0, 1); offending rows: {shown}{more}")


class NonConvergenceWarning(UserWarning):
    pass


class SingularInformationWarning(UserWarning):
    pass


def check_response(y, nudge: bool = False) -> np.ndarray:
    """Validate a response vector; optionally clamp to [eps, 1 - eps]."""
    y = np.asarray(y, dtype=float).ravel()
    if not np.all(np.isfinite(y)):
        raise ResponseDomainError(np.flatnonzero(~np.isfinite(y)))
    if nudge:
        return np.clip(y, NUDGE_EPS, 1.0 - NUDGE_EPS)
    bad = np.flatnonzero((y <= 0.0) | (y >= 1.0))
    if bad.size:
        raise ResponseDomainError(bad)
    return y


def _is_intercept(col) -> bool:
    return bool(np.all(col == 1.0))


@dataclass(frozen=True)
class RegressionModel:
    """Design matrices for the alpha (``W``) and beta (``Z``) predictors."""

    W: np.ndarray
    Z: np.ndarray
    alpha_names: tuple[str, ...] | None = None
    beta_names: tuple[str, ...] | None = None
    link_alpha: str = "log"
    link_beta: str = "log"

    def __post_init__(self):
        W = np.asarray(self.W, dtype=float)
        Z = np.asarray(self.Z, dtype=float)
        if W.ndim != 2 or Z.ndim != 2:
            raise ValueError("W and Z must be two-dimensional")
        if W.shape[0] != Z.shape[0]:
            raise ValueError(f"W has {W.shape[0]} rows but Z has {Z.shape[0]}")
        if self.link_alpha != "log" or self.link_beta != "log":
            raise ValueError("only the log link is supported")
        n, p = W.shape
        q = Z.shape[1]
        if p + q >= n:
            raise ValueError(f"need p + q < n, got p={p}, q={q}, n={n}")
        if np.linalg.matrix_rank(W) < p:
            raise ValueError("W does not have full column rank")
        if np.linalg.matrix_rank(Z) < q:
            raise ValueError("Z does not have full column rank")
        object.__setattr__(self, "W", W)
        object.__setattr__(self, "Z", Z)
        an = self.alpha_names or tuple(f"gamma_{j}" for j in range(p))
        bn = self.beta_names or tuple(f"zeta_{j}" for j in range(q))
        if len(an) != p or len(bn) != q:
            raise ValueError("coefficient names do not match the design widths")
        object.__setattr__(self, "alpha_names", tuple(an))
        object.__setattr__(self, "beta_names", tuple(bn))

    @classmethod
    def from_covariates(cls, x_alpha=None, x_beta=None, n=None, intercept=True):
        """Build designs from covariate columns, prepending intercepts."""
        def design(x, prefix):
            cols, names = [], []
            if intercept:
                cols.append(np.ones(n))
                names.append(f"{prefix}_0")
            if x is not None:
                x = np.asarray(x, dtype=float)
                x = x[:, None] if x.ndim == 1 else x
                for j in range(x.shape[1]):
                    cols.append(x[:, j])
                    names.append(f"{prefix}_{len(names)}")
            return np.column_stack(cols), tuple(names)

        if n is None:
            for x in (x_alpha, x_beta):
                if x is not None:
                    n = len(x)
                    break
            else:
                raise ValueError("n is required for an intercept-only model")
        W, an = design(x_alpha, "gamma")
        Z, bn = design(x_beta, "zeta")
        return cls(W, Z, an, bn)

    @property
    def n(self) -> int:
        return self.W.shape[0]

    @property
    def p(self) -> int:
        return self.W.shape[1]

    @property
    def q(self) -> int:
        return self.Z.shape[1]

    @property
    def n_params(self) -> int:
        return self.p + self.q + 2

    @property
    def param_names(self) -> tuple[str, ...]:
        return self.alpha_names + self.beta_names + SHARED_NAMES

    def shapes(self, coef: "Coefficients"):
        """Per-observation (alpha_i, beta_i)."""
        return np.exp(self.W @ coef.gamma), np.exp(self.Z @ coef.zeta)


@dataclass(frozen=True, eq=False)
class Coefficients:
    gamma: np.ndarray
    zeta: np.ndarray
    rho: float
    delta: float

    def __eq__(self, other):
        if not isinstance(other, Coefficients):
            return NotImplemented
        return (self.gamma.shape == other.gamma.shape and self.zeta.shape == other.zeta.shape
                and np.array_equal(self.as_vector(), other.as_vector()))

    __hash__ = None

    def __post_init__(self):
        gamma = np.atleast_1d(np.asarray(self.gamma, dtype=float))
        zeta = np.atleast_1d(np.asarray(self.zeta, dtype=float))
        object.__setattr__(self, "gamma", gamma)
        object.__setattr__(self, "zeta", zeta)
        object.__setattr__(self, "rho", float(self.rho))
        object.__setattr__(self, "delta", float(self.delta))
        if not (np.all(np.isfinite(gamma)) and np.all(np.isfinite(zeta))
                and math.isfinite(self.rho) and math.isfinite(self.delta)):
            raise DomainError("coefficients must be finite")
        if self.rho < 0:
            raise DomainError(f"rho must be >= 0, got {self.rho}")

    def as_vector(self) -> np.ndarray:
        return np.concatenate([self.gamma, self.zeta, [self.rho, self.delta]])

    @classmethod
    def from_vector(cls, vec, p: int, q: int) -> "Coefficients":
        vec = np.asarray(vec, dtype=float)
        if vec.size != p + q + 2:
            raise ValueError(f"expected {p + q + 2} values, got {vec.size}")
        return cls(vec[:p], vec[p:p + q], vec[p + q], vec[p + q + 1])

    def to_dict(self) -> dict:
        return {
            "gamma": self.gamma.tolist(),
            "zeta": self.zeta.tolist(),
            "rho": self.rho,
            "delta": self.delta,
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "Coefficients":
        return cls(d["gamma"], d["zeta"], d["rho"], d["delta"])


def _check_dims(data, model):
    if data.shape[0] != model.n:
        raise ValueError(f"{data.shape[0]} responses for a design with {model.n} rows")


def loglik_terms(data, model: RegressionModel, coef: Coefficients) -> np.ndarray:
    """Per-observation log-likelihood contributions."""
    data = np.asarray(data, dtype=float)
    _check_dims(data, model)
    alpha, beta = model.shapes(coef)
    return logpdf_arrays(data, alpha, beta, coef.rho, coef.delta)


def loglik(data, model: RegressionModel, coef: Coefficients) -> float:
    """Total log-likelihood; ``-inf`` when any term is not finite."""
    with np.errstate(all="ignore"):
        total = float(np.sum(loglik_terms(data, model, coef)))
    return total if math.isfinite(total) else -math.inf


@dataclass
class FitResult:
    """Maximum-likelihood fit and its Wald inference.

    Vectors are ordered as ``model.param_names``. Entries for parameters
    held fixed have ``nan`` standard errors and degenerate intervals;
    ``observed_info`` covers the free parameters only (``free`` mask).
    """

    estimates: Coefficients
    loglik: float
    observed_info: np.ndarray
    std_errors: np.ndarray
    ci_lower: np.ndarray
    ci_upper: np.ndarray
    ci_level: float
    aic: float
    bic: float
    converged: bool
    iterations: int
    n_obs: int
    param_names: tuple[str, ...]
    free: np.ndarray
    message: str = ""
    grad_max: float = math.nan
    information_available: bool = True
    meta: dict = field(default_factory=dict)

    @property
    def n_free(self) -> int:
        return int(self.free.sum())

    def table(self) -> list[dict]:
        """Estimate, standard error and Wald interval per parameter."""
        vec = self.estimates.as_vector()
        return [
            {
                "parameter": name,
                "estimate": float(vec[i]),
                "std_error": _nan_to_none(self.std_errors[i]),
                "ci_lower": _nan_to_none(self.ci_lower[i]),
                "ci_upper": _nan_to_none(self.ci_upper[i]),
                "fixed": not bool(self.free[i]),
            }
            for i, name in enumerate(self.param_names)
        ]

    def to_dict(self) -> dict:
        return {
            "coefficients": self.estimates.to_dict(),
            "parameters": self.table(),
            "loglik": self.loglik,
            "aic": self.aic,
            "bic": self.bic,
            "n_obs": self.n_obs,
            "n_params": self.n_free,
            "ci_level": self.ci_level,
            "converged": self.converged,
            "iterations": self.iterations,
            "grad_max": self.grad_max,
            "message": self.message,
            "information_available": self.information_available,
            "observed_info": self.observed_info.tolist(),
            "meta": self.meta,
        }


def _nan_to_none(v):
    v = float(v)
    return None if math.isnan(v) else v


def _default_start(data, model):
    m = float(np.mean(data))
    v = float(np.var(data, ddof=1)) if data.size > 1 else 0.0
    phi = m * (1.0 - m) / v - 1.0 if v > 0 else 1.0
    phi = max(phi, 1e-2)
    gamma = np.zeros(model.p)
    zeta = np.zeros(model.q)
    ia = [j for j in range(model.p) if _is_intercept(model.W[:, j])]
    ib = [j for j in range(model.q) if _is_intercept(model.Z[:, j])]
    if ia:
        gamma[ia[0]] = math.log(m * phi)
    if ib:
        zeta[ib[0]] = math.log((1.0 - m) * phi)
    return Coefficients(gamma, zeta, 0.1, 0.0)


def fit(
    data,
    model: RegressionModel,
    *,
    max_iter: int = 500,
    grad_tol: float = 1e-6,
    start: Coefficients | None = None,
    ci_level: float = 0.95,
    fixed: Mapping[str, float] | None = None,
    rho_scale: str = "log",
    nudge: bool = False,
    delta_starts=DELTA_STARTS,
) -> FitResult:
    """Maximum-likelihood fit.

    ``fixed`` pins ``rho`` and/or ``delta`` (``{"rho": 0, "delta": 0}`` is
    the nested beta regression). ``rho_scale="log"`` optimises log(rho) with
    the package BFGS; ``"box"`` optimises rho itself under ``rho >= 0``
    with scipy's L-BFGS-B and exists mainly as a cross-check.

    Without ``start`` the fit is multi-start: ``gamma`` and ``zeta`` come
    from the nested beta regression, ``rho`` starts at 0.1 and one run is
    made for each value in ``delta_starts``; the highest likelihood wins.
    A single ``delta = 0`` start regularly drifts onto the ridge
    ``rho -> inf`` with ``delta**2 / rho`` fixed, a worse local optimum.
    Pass ``delta_starts=None`` for the single moment-matched start.

    Convergence is judged on the gradient of the *mean* negative
    log-likelihood, so the tolerance does not scale with ``n``.
    """
    data = check_response(data, nudge=nudge)
    _check_dims(data, model)
    fixed = dict(fixed or {})
    unknown = set(fixed) - set(SHARED_NAMES)
    if unknown:
        raise ValueError(f"only rho and delta can be fixed, got {sorted(unknown)}")
    if not 0.0 < ci_level < 1.0:
        raise ValueError("ci_level must lie in (0, 1)")
    if model.n <= model.n_params:
        raise ValueError("need more observations than parameters")
    options = dict(max_iter=max_iter, grad_tol=grad_tol, ci_level=ci_level,
                   fixed=fixed, rho_scale=rho_scale)
    if start is None and delta_starts is not None and len(fixed) < 2:
        return _multistart(data, model, tuple(delta_starts), options)
    return _fit_from(data, model, start, **options)


def _multistart(data, model, delta_starts, options):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        nested = fit(data, model, fixed={"rho": 0.0, "delta": 0.0},
                     max_iter=options["max_iter"], grad_tol=options["grad_tol"])
        gamma, zeta = nested.estimates.gamma, nested.estimates.zeta
        if "delta" in options["fixed"]:
            delta_starts = (options["fixed"]["delta"],)
        best = None
        for d in delta_starts:
            res = _fit_from(data, model, Coefficients(gamma, zeta, 0.1, float(d)), **options)
            if best is None or res.loglik > best.loglik:
                best = res
    best.meta["start"] = (
        f"nested beta regression, rho=0.1, best of delta in {list(delta_starts)}"
    )
    _check_result(best)
    return best


def _check_result(result):
    if not result.converged:
        warnings.warn(f"fit did not converge: {result.message}", NonConvergenceWarning, stacklevel=4)
    if not result.information_available:
        warnings.warn("observed information is singular; standard errors unavailable",
                      SingularInformationWarning, stacklevel=4)


def _fit_from(data, model, start, *, max_iter, grad_tol, ci_level, fixed, rho_scale):
    p, q, n = model.p, model.q, model.n
    user_start = start is not None
    start = start or _default_start(data, model)
    full0 = start.as_vector()
    for k, v in fixed.items():
        full0[p + q + SHARED_NAMES.index(k)] = v
    if full0[p + q] < 0:
        raise DomainError("rho must be >= 0")
    free = np.ones(p + q + 2, dtype=bool)
    for k in fixed:
        free[p + q + SHARED_NAMES.index(k)] = False
    rho_idx = p + q
    log_rho = rho_scale == "log" and free[rho_idx]
    if rho_scale not in ("log", "box"):
        raise ValueError("rho_scale must be 'log' or 'box'")

    def unpack(theta):
        full = full0.copy()
        full[free] = theta
        if log_rho:
            full[rho_idx] = math.exp(full[rho_idx]) if full[rho_idx] < 700 else math.inf
        return full

    def natural_loglik(full):
        if not (full[rho_idx] >= 0 and np.all(np.isfinite(full))):
            return -math.inf
        w_eta = model.W @ full[:p]
        z_eta = model.Z @ full[p:p + q]
        if w_eta.max() > 700 or z_eta.max() > 700:
            return -math.inf
        with np.errstate(all="ignore"):
            total = float(np.sum(logpdf_arrays(
                data, np.exp(w_eta), np.exp(z_eta), full[rho_idx], full[rho_idx + 1])))
        return total if math.isfinite(total) else -math.inf

    def objective(theta):
        return -natural_loglik(unpack(theta)) / n

    theta0 = full0[free].copy()
    if log_rho:
        theta0[int(np.sum(free[:rho_idx]))] = math.log(max(full0[rho_idx], 1e-12))

    if rho_scale == "box":
        bounds = [(None, None)] * int(free.sum())
        if free[rho_idx]:
            bounds[int(np.sum(free[:rho_idx]))] = (0.0, None)
        res = sp_optimize.minimize(
            objective, theta0, method="L-BFGS-B", bounds=bounds,
            jac=lambda t: central_gradient(objective, t),
            options={"maxiter": max_iter, "gtol": grad_tol, "ftol": 1e-15},
        )
        theta_hat, iterations, message = res.x, int(res.nit), str(res.message)
        grad = central_gradient(objective, theta_hat)
        if free[rho_idx] and theta_hat[int(np.sum(free[:rho_idx]))] <= 0.0:
            grad[int(np.sum(free[:rho_idx]))] = min(grad[int(np.sum(free[:rho_idx]))], 0.0)
        converged = bool(np.max(np.abs(grad), initial=0.0) <= grad_tol)
    else:
        res = bfgs(objective, theta0, gtol=grad_tol, max_iter=max_iter)
        theta_hat, iterations, message, grad = res.x, res.iterations, res.message, res.grad
        converged = res.converged

    full_hat = unpack(theta_hat)
    ll = natural_loglik(full_hat)
    estimates = Coefficients.from_vector(full_hat, p, q)

    info, se, available = _observed_information(natural_loglik, full_hat, free, rho_idx)
    z = std_normal_quantile(0.5 + ci_level / 2.0)
    lower = np.where(free, full_hat - z * se, full_hat)
    upper = np.where(free, full_hat + z * se, full_hat)
    k = int(free.sum())
    result = FitResult(
        estimates=estimates,
        loglik=ll,
        observed_info=info,
        std_errors=se,
        ci_lower=lower,
        ci_upper=upper,
        ci_level=ci_level,
        aic=-2.0 * ll + 2.0 * k,
        bic=-2.0 * ll + k * math.log(n),
        converged=converged,
        iterations=iterations,
        n_obs=n,
        param_names=model.param_names,
        free=free,
        message=message,
        grad_max=float(np.max(np.abs(grad), initial=0.0)),
        information_available=available,
        meta={
            "optimizer": "bfgs-armijo" if rho_scale == "log" else "l-bfgs-b",
            "gradient": "central-difference",
            "objective": "mean negative log-likelihood",
            "rho_scale": rho_scale,
            "grad_tol": grad_tol,
            "max_iter": max_iter,
            "start": "user" if user_start else "moment-matched beta intercepts, rho=0.1, delta=0",
            "start_values": start.to_dict(),
            "fixed": fixed,
            "hessian_step": "eps**0.25 * max(1, |theta|)",
        },
    )
    _check_result(result)
    return result


def _observed_information(natural_loglik, full_hat, free, rho_idx):
    idx = np.flatnonzero(free)

    def neg(theta):
        full = full_hat.copy()
        full[idx] = theta
        return -natural_loglik(full)

    theta = full_hat[idx]
    steps = HESS_STEP * np.maximum(1.0, np.abs(theta))
    if free[rho_idx]:
        j = int(np.sum(free[:rho_idx]))
        # keep rho - h inside the parameter space
        steps[j] = min(steps[j], 0.5 * theta[j]) if theta[j] > 0 else steps[j]
    info = central_hessian(neg, theta, steps)
    se = np.full(full_hat.size, np.nan)
    available = False
    if np.all(np.isfinite(info)):
        try:
            cov = np.linalg.inv(info)
            diag = np.diag(cov)
            if np.all(diag > 0):
                se[idx] = np.sqrt(diag)
                available = True
        except np.linalg.LinAlgError:
            pass
    return info, se, available


def fit_beta_regression(data, model: RegressionModel, **kwargs) -> FitResult:
    """Nested beta regression: ``delta = 0`` and ``rho`` pinned at 0."""
    return fit(data, model, fixed={"rho": 0.0, "delta": 0.0}, **kwargs)


class Prediction(NamedTuple):
    alpha: np.ndarray
    beta: np.ndarray
    mean: np.ndarray


def bbeta_mean(alpha, beta, rho, delta):
    """Vectorised first moment."""
    s = alpha + beta
    bracket = (
        1.0 + rho - 2.0 * delta * (alpha + 1.0) / (s + 1.0)
        + delta**2 * (alpha + 1.0) * (alpha + 2.0) / ((s + 1.0) * (s + 2.0))
    )
    return beta_ratio(alpha, beta, 1) * bracket / normalizer_arrays(alpha, beta, rho, delta)


def predict(coef: Coefficients, W_new, Z_new) -> Prediction:
    """Per-row shape parameters and mean for new design rows."""
    W_new = np.atleast_2d(np.asarray(W_new, dtype=float))
    Z_new = np.atleast_2d(np.asarray(Z_new, dtype=float))
    if W_new.shape[1] != coef.gamma.size or Z_new.shape[1] != coef.zeta.size:
        raise ValueError("covariate widths do not match the coefficient vectors")
    if W_new.shape[0] != Z_new.shape[0]:
        raise ValueError("W_new and Z_new must have the same number of rows")
    alpha = np.exp(W_new @ coef.gamma)
    beta = np.exp(Z_new @ coef.zeta)
    return Prediction(alpha, beta, bbeta_mean(alpha, beta, coef.rho, coef.delta))


def _resolve_features(spec, n_features):
    if spec is None:
        return list(range(n_features))
    cols = list(spec)
    for c in cols:
        if not 0 <= c < n_features:
            raise ValueError(f"feature index {c} out of range for {n_features} features")
    return cols


class BBetaRegressor(BaseEstimator):
    """Estimator wrapper around :func:`fit`.

    Parameters
    ----------
    alpha_features, beta_features : sequence of int or None
        Columns of ``X`` entering the alpha / beta predictors. ``None`` uses
        every column; an empty sequence gives an intercept-only predictor.
    fit_intercept : bool
        Prepend an intercept column to both designs.
    fixed : dict or None
        Values for ``rho`` and/or ``delta`` held fixed during fitting.
    """

    def __init__(self, alpha_features=None, beta_features=None, fit_intercept=True,
                 max_iter=500, grad_tol=1e-6, ci_level=0.95, fixed=None, nudge=False):
        self.alpha_features = alpha_features
        self.beta_features = beta_features
        self.fit_intercept = fit_intercept
        self.max_iter = max_iter
        self.grad_tol = grad_tol
        self.ci_level = ci_level
        self.fixed = fixed
        self.nudge = nudge

    def _designs(self, X):
        n = X.shape[0]
        ones = [np.ones((n, 1))] if self.fit_intercept else []
        W = np.hstack(ones + [X[:, self.alpha_features_]])
        Z = np.hstack(ones + [X[:, self.beta_features_]])
        return W, Z

    def fit(self, X, y):
        X = check_array(X, ensure_min_features=0)
        y = check_response(y, nudge=self.nudge)
        if y.shape[0] != X.shape[0]:
            raise ValueError("X and y have inconsistent numbers of samples")
        self.n_features_in_ = X.shape[1]
        self.alpha_features_ = _resolve_features(self.alpha_features, X.shape[1])
        self.beta_features_ = _resolve_features(self.beta_features, X.shape[1])
        W, Z = self._designs(X)
        prefix = ["0"] if self.fit_intercept else []
        an = tuple(f"gamma_{c}" for c in prefix + [str(j + 1) for j in self.alpha_features_])
        bn = tuple(f"zeta_{c}" for c in prefix + [str(j + 1) for j in self.beta_features_])
        self.model_ = RegressionModel(W, Z, an, bn)
        self.result_ = fit(y, self.model_, max_iter=self.max_iter, grad_tol=self.grad_tol,
                           ci_level=self.ci_level, fixed=self.fixed)
        self.coef_ = self.result_.estimates
        return self

    def _check_X(self, X):
        check_is_fitted(self, "coef_")
        X = check_array(X, ensure_min_features=0)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(f"X has {X.shape[1]} features, expected {self.n_features_in_}")
        return X

    def predict_params(self, X) -> Prediction:
        W, Z = self._designs(self._check_X(X))
        return predict(self.coef_, W, Z)

    def predict(self, X) -> np.ndarray:
        """Conditional mean of the response."""
        return self.predict_params(X).mean

    def score(self, X, y) -> float:
        """Average log-likelihood per observation."""
        W, Z = self._designs(self._check_X(X))
        y = check_response(y, nudge=self.nudge)
        return loglik(y, RegressionModel(W, Z), self.coef_) / len(y)

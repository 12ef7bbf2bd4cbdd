"""Command-line interface.

Subcommands: ``fit``, ``diagnose``, ``dist``, ``simulate`` and ``mc``.
CSV files are comma separated, UTF-8, with a header row. Exit codes:
0 success, 1 input error, 2 invalid response values, 3 non-convergence
(results are still written).
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
import warnings
from importlib import resources
from pathlib import Path

import numpy as np

from . import __version__
from .diagnostics import halfnormal_envelope, ks_statistic, quantile_residuals
from .distribution import BBetaParams, cdf, hazard, mode_analysis, pdf, sample
from .regression import (
    Coefficients,
    RegressionModel,
    ResponseDomainError,
    fit,
)
from .simulation import DEFAULT_TRUTH, McConfig, run_mc_study, simulate_design

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_DATA = 2
EXIT_NONCONVERGENCE = 3


class InputError(Exception):
    """Unreadable or malformed input; maps to exit code 1."""


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on usage errors, which is reserved for bad data here
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj) if math.isfinite(obj) else None
    return obj


def load_schema(name: str) -> dict:
    """Shipped JSON schema for the ``fit``, ``diagnose``, ``dist`` or ``mc`` output."""
    text = resources.files("bbeta").joinpath("schemas", f"{name}.schema.json").read_text(encoding="utf-8")
    return json.loads(text)


def write_json(path, payload) -> None:
    text = json.dumps(_clean(payload), indent=2, sort_keys=True, allow_nan=False)
    Path(path).write_text(text + "\n", encoding="utf-8")


def write_csv(path, columns, rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow(["" if v is None else (repr(float(v)) if isinstance(v, (float, np.floating)) else v)
                             for v in row])


def sidecar(path, suffix: str) -> Path:
    """``out/fit.json`` with suffix ``_residuals.csv`` -> ``out/fit_residuals.csv``."""
    p = Path(path)
    return p.with_name(p.stem + suffix)


def read_table(path) -> dict[str, list[str]]:
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            if not header:
                raise InputError(f"{path}: empty file or missing header row")
            header = [h.strip() for h in header]
            if len(set(header)) != len(header):
                raise InputError(f"{path}: duplicate column names")
            cols = {h: [] for h in header}
            for line, row in enumerate(reader, start=2):
                if not row:
                    continue
                if len(row) != len(header):
                    raise InputError(f"{path}: line {line} has {len(row)} fields, expected {len(header)}")
                for h, v in zip(header, row):
                    cols[h].append(v.strip())
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror or exc}") from exc
    except (UnicodeDecodeError, csv.Error) as exc:
        raise InputError(f"{path}: {exc}") from exc
    if not next(iter(cols.values())):
        raise InputError(f"{path}: no data rows")
    return cols


def numeric_column(table, name) -> np.ndarray:
    if name not in table:
        raise InputError(f"column {name!r} not found; available: {', '.join(table)}")
    try:
        return np.array([float(v) for v in table[name]])
    except ValueError as exc:
        raise InputError(f"column {name!r}: {exc}") from exc


def split_names(text) -> list[str]:
    if not text:
        return []
    return [s.strip() for s in text.split(",") if s.strip()]


def parse_floats(text, count=None, what="values") -> list[float]:
    try:
        vals = [float(s) for s in text.split(",")]
    except ValueError as exc:
        raise InputError(f"cannot parse {what} {text!r}: {exc}") from exc
    if count is not None and len(vals) != count:
        raise InputError(f"{what} needs {count} comma-separated numbers, got {len(vals)}")
    return vals


def load_regression(args):
    table = read_table(args.input)
    y = numeric_column(table, args.response)
    a_names = split_names(args.alpha_covars)
    b_names = split_names(args.beta_covars)
    xa = np.column_stack([numeric_column(table, c) for c in a_names]) if a_names else None
    xb = np.column_stack([numeric_column(table, c) for c in b_names]) if b_names else None
    bad = [c for c in a_names + b_names if not np.all(np.isfinite(numeric_column(table, c)))]
    if bad:
        raise InputError(f"non-finite covariate values in {', '.join(bad)}")
    try:
        model = RegressionModel.from_covariates(xa, xb, n=y.size)
    except ValueError as exc:
        raise InputError(str(exc)) from exc
    names = (
        ("gamma_0",) + tuple(f"gamma_{c}" for c in a_names),
        ("zeta_0",) + tuple(f"zeta_{c}" for c in b_names),
    )
    return y, RegressionModel(model.W, model.Z, *names)


def _fit(y, model, args):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return fit(y, model, ci_level=args.ci_level, max_iter=args.max_iter, grad_tol=args.grad_tol)


def _residual_rows(y, model, coef, report):
    alpha, beta = model.shapes(coef)
    return [(i, y[i], alpha[i], beta[i], report.pit[i], report.residuals[i]) for i in range(y.size)]


RESIDUAL_COLUMNS = ("row", "y", "alpha", "beta", "pit", "residual")


def cmd_fit(args) -> int:
    y, model = load_regression(args)
    result = _fit(y, model, args)
    report = quantile_residuals(y, model, result.estimates)
    ks = ks_statistic(report.pit)
    payload = {
        "command": "fit",
        "version": __version__,
        "input": Path(args.input).name,
        "response": args.response,
        "alpha_covariates": split_names(args.alpha_covars),
        "beta_covariates": split_names(args.beta_covars),
        **result.to_dict(),
        "ks": {"statistic": ks.statistic, "p_value": ks.p_value,
               "reference": "PIT values against Uniform(0, 1), asymptotic Kolmogorov p-value"},
        "residual_summary": report.summary(),
    }
    out = Path(args.output)
    if out.suffix == ".csv":
        write_csv(out, ("parameter", "estimate", "std_error", "ci_lower", "ci_upper", "fixed"),
                  [tuple(r.values()) for r in result.table()])
        write_json(sidecar(out, ".json"), payload)
    else:
        write_json(out, payload)
    write_csv(sidecar(out, "_residuals.csv"), RESIDUAL_COLUMNS,
              _residual_rows(y, model, result.estimates, report))
    if not result.converged:
        print(f"warning: fit did not converge ({result.message}); results written with converged=false",
              file=sys.stderr)
        return EXIT_NONCONVERGENCE
    return EXIT_OK


def cmd_diagnose(args) -> int:
    y, model = load_regression(args)
    result = _fit(y, model, args)
    report = quantile_residuals(y, model, result.estimates)
    ks = ks_statistic(report.pit)
    bands = halfnormal_envelope(y, model, result, n_sim=args.n_sim, seed=args.seed)
    out = Path(args.output)
    write_json(out, {
        "command": "diagnose",
        "version": __version__,
        "input": Path(args.input).name,
        "seed": args.seed,
        "n_sim": args.n_sim,
        "converged": result.converged,
        "loglik": result.loglik,
        "aic": result.aic,
        "bic": result.bic,
        "coefficients": result.estimates.to_dict(),
        "residual_summary": report.summary(),
        "ks": {"statistic": ks.statistic, "p_value": ks.p_value},
        "envelope_coverage": bands.coverage(),
    })
    rows = bands.rows()
    write_csv(sidecar(out, "_envelope.csv"), tuple(rows[0]), [tuple(r.values()) for r in rows])
    write_csv(sidecar(out, "_residuals.csv"), RESIDUAL_COLUMNS,
              _residual_rows(y, model, result.estimates, report))
    return EXIT_OK if result.converged else EXIT_NONCONVERGENCE


def _params(args) -> BBetaParams:
    if not args.params:
        raise InputError("--params a,b,rho,delta is required")
    try:
        return BBetaParams(*parse_floats(args.params, 4, "--params"))
    except ValueError as exc:
        raise InputError(f"invalid parameters: {exc}") from exc


def _grid(spec: str) -> np.ndarray:
    """``N`` gives N interior points i/(N+1); ``lo,hi,N`` a closed grid inside (0, 1)."""
    vals = parse_floats(spec, what="--grid")
    if len(vals) == 1 and vals[0] >= 1 and vals[0] == int(vals[0]):
        n = int(vals[0])
        return np.arange(1, n + 1) / (n + 1)
    if len(vals) == 3 and 0 < vals[0] < vals[1] < 1 and vals[2] >= 2 and vals[2] == int(vals[2]):
        return np.linspace(vals[0], vals[1], int(vals[2]))
    raise InputError("--grid must be N or lo,hi,N with 0 < lo < hi < 1")


def cmd_dist(args) -> int:
    params = _params(args)
    x = _grid(args.grid)
    rows = list(zip(x, np.atleast_1d(pdf(x, params)), np.atleast_1d(cdf(x, params)),
                    np.atleast_1d(hazard(x, params))))
    modes = {
        "command": "dist",
        "version": __version__,
        "params": {"alpha": params.alpha, "beta": params.beta, "rho": params.rho, "delta": params.delta},
        "grid_points": int(x.size),
        "modes": mode_analysis(params).to_dict(),
    }
    out = Path(args.output)
    if out.suffix == ".json":
        modes["curves"] = [dict(zip(("x", "pdf", "cdf", "hazard"), r)) for r in rows]
        write_json(out, modes)
    else:
        write_csv(out, ("x", "pdf", "cdf", "hazard"), rows)
        write_json(sidecar(out, "_modes.json"), modes)
    return EXIT_OK


def cmd_simulate(args) -> int:
    if args.n < 1:
        raise InputError("--n must be positive")
    out = Path(args.output)
    if args.params:
        y = sample(args.n, _params(args), seed=args.seed)
        write_csv(out, ("y",), [(v,) for v in y])
        return EXIT_OK
    coef = DEFAULT_TRUTH
    if args.coef and args.coef != "default":
        try:
            coef = Coefficients.from_dict(json.loads(Path(args.coef).read_text(encoding="utf-8")))
        except (OSError, ValueError, KeyError, TypeError) as exc:
            raise InputError(f"cannot load coefficients from {args.coef}: {exc}") from exc
    try:
        model, y = simulate_design(args.n, coef, np.random.SeedSequence(args.seed))
    except ValueError as exc:
        raise InputError(str(exc)) from exc
    k = model.W.shape[1] - 1
    z = model.W[:, 1:] if k >= model.Z.shape[1] - 1 else model.Z[:, 1:]
    cols = tuple(f"z{j + 1}" for j in range(z.shape[1])) + ("y",)
    write_csv(out, cols, [tuple(z[i]) + (y[i],) for i in range(args.n)])
    return EXIT_OK


def cmd_mc(args) -> int:
    cfg = {}
    if args.config:
        try:
            cfg = json.loads(Path(args.config).read_text(encoding="utf-8"))
        except (OSError, ValueError) as exc:
            raise InputError(f"cannot load config {args.config}: {exc}") from exc
    if args.n_reps is not None:
        cfg["n_reps"] = args.n_reps
    if args.sample_sizes:
        cfg["sample_sizes"] = [int(v) for v in parse_floats(args.sample_sizes, what="--sample-sizes")]
    cfg.setdefault("seed", args.seed)
    if args.seed_given:
        cfg["seed"] = args.seed
    try:
        config = McConfig.from_dict(cfg)
    except (TypeError, ValueError, KeyError) as exc:
        raise InputError(f"invalid study configuration: {exc}") from exc
    report = run_mc_study(config)
    out = Path(args.output)
    stem = out.with_suffix("") if out.suffix in (".json", ".csv") else out
    write_json(stem.with_suffix(".json"), {"command": "mc", "version": __version__, **report.to_dict()})
    report.to_csv(stem.with_suffix(".csv"), sidecar(stem.with_suffix(".csv"), "_residuals.csv"))
    return EXIT_OK


class _SeedAction(argparse.Action):
    def __call__(self, parser, namespace, values, option_string=None):
        setattr(namespace, self.dest, values)
        namespace.seed_given = True


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="bbeta", description="Bimodal beta distribution and regression tools.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p, output_help):
        p.add_argument("--output", required=True, help=output_help)
        p.add_argument("--seed", type=int, default=0, action=_SeedAction, help="root seed (default 0)")

    def regression_args(p):
        p.add_argument("--input", required=True, help="CSV with a header row")
        p.add_argument("--response", required=True, help="response column, values in (0, 1)")
        p.add_argument("--alpha-covars", default="", help="comma-separated covariates for log(alpha)")
        p.add_argument("--beta-covars", default="", help="comma-separated covariates for log(beta)")
        p.add_argument("--ci-level", type=float, default=0.95)
        p.add_argument("--max-iter", type=int, default=500)
        p.add_argument("--grad-tol", type=float, default=1e-6)

    p = sub.add_parser("fit", help="fit a regression from CSV")
    regression_args(p)
    common(p, ".json result (or .csv estimate table plus .json); residuals go to <stem>_residuals.csv")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("diagnose", help="residuals, KS and half-normal envelope for a fitted model")
    regression_args(p)
    p.add_argument("--n-sim", type=int, default=100, help="simulated datasets for the envelope")
    common(p, ".json summary; envelope to <stem>_envelope.csv, residuals to <stem>_residuals.csv")
    p.set_defaults(func=cmd_diagnose)

    p = sub.add_parser("dist", help="pdf, cdf and hazard on a grid plus mode analysis")
    p.add_argument("--params", required=True, help="alpha,beta,rho,delta")
    p.add_argument("--grid", default="512", help="N interior points, or lo,hi,N")
    common(p, ".csv curves (modes to <stem>_modes.json) or .json with both")
    p.set_defaults(func=cmd_dist)

    p = sub.add_parser("simulate", help="draw samples")
    p.add_argument("--params", help="alpha,beta,rho,delta for i.i.d. draws")
    p.add_argument("--coef", help="coefficient JSON for regression data, or 'default'")
    p.add_argument("--n", type=int, default=1000)
    common(p, ".csv samples")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("mc", help="Monte Carlo coefficient-recovery and residual study")
    p.add_argument("--config", help="JSON study configuration")
    p.add_argument("--n-reps", type=int)
    p.add_argument("--sample-sizes", help="comma-separated sample sizes")
    common(p, "report stem; writes <stem>.json, <stem>.csv and <stem>_residuals.csv")
    p.set_defaults(func=cmd_mc)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    args.seed_given = getattr(args, "seed_given", False)
    if getattr(args, "ci_level", 0.5) is not None and not 0 < getattr(args, "ci_level", 0.5) < 1:
        parser.error("--ci-level must lie in (0, 1)")
    if getattr(args, "n_sim", 19) < 19:
        parser.error("--n-sim must be at least 19")
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except ResponseDomainError as exc:
        print(f"error: {exc} (0-based data rows)", file=sys.stderr)
        return EXIT_DATA
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    raise SystemExit(main())

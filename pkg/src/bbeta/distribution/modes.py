"""Critical points of the density and bimodality conditions."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .params import BBetaParams

__all__ = [
    "ModeClass",
    "ModeAnalysis",
    "BimodalityConditions",
    "check_bimodality_conditions",
    "critical_polynomial",
    "mode_analysis",
]

DELTA_EPS = 1e-10


class ModeClass(str, enum.Enum):
    UNIMODAL = "unimodal"
    BIMODAL = "bimodal"
    DEGENERATE = "degenerate"


@dataclass(frozen=True)
class ModeAnalysis:
    """Interior critical points of the density, ascending.

    ``kinds`` labels each point ``"max"``, ``"min"`` or ``"flat"`` (a
    double root where the derivative touches zero without changing sign).
    """

    critical_points: tuple[float, ...]
    kinds: tuple[str, ...]
    classification: ModeClass
    maxima: tuple[float, ...] = field(default=())
    minimum: float | None = None

    def to_dict(self) -> dict:
        return {
            "critical_points": list(self.critical_points),
            "kinds": list(self.kinds),
            "classification": self.classification.value,
            "maxima": list(self.maxima),
            "minimum": self.minimum,
        }


@dataclass(frozen=True)
class BimodalityConditions:
    in_set_A: bool
    rho_zero_condition: bool


def check_bimodality_conditions(params: BBetaParams) -> BimodalityConditions:
    """Evaluate the published sufficient conditions for bimodality.

    ``in_set_A`` is the rho != 0 region, ``rho_zero_condition`` the rho = 0
    discriminant condition. The first is reported as stated even though it
    does not guarantee two modes everywhere; :func:`mode_analysis` decides
    from the density itself.
    """
    a, b, r, d = params.as_tuple()
    in_a = (
        a > 1 and b > 1 and d > 1 and r != 0
        and d * (a - 3) > -2 * (a + b - 2)
        and 2 * d * (2 + d - a) < (r + 1) * (a + b - 2)
        and (r + 1) * (a - 1) > 2 * d
    )
    zero_case = (
        r == 0 and a > 1 and b > 1 and d > 1
        and (d * (a + 1) + a + b - 2) ** 2 > 4 * d * (a + b) * (a - 1)
    )
    return BimodalityConditions(bool(in_a), bool(zero_case))


def critical_polynomial(params: BBetaParams) -> np.ndarray:
    """Coefficients (highest degree first) of the cubic whose roots are critical points.

    The density derivative is ``x**(a-2) (1-x)**(b-2) / (Z B(a, b))`` times
    ``[rho + (1 - d x)^2][(a-1)(1-x) - (b-1)x] - 2 d (1 - d x) x (1 - x)``.
    """
    a, b, r, d = params.as_tuple()
    return np.array([
        -d * d * (a + b),
        d * (d * (a + 1) + 2 * (a + b - 1)),
        -2 * a * d - (r + 1) * (a + b - 2),
        (r + 1) * (a - 1),
    ])


def _real_cubic_roots(c3, c2, c1, c0):
    b, c, d = c2 / c3, c1 / c3, c0 / c3
    shift = b / 3.0
    p = c - b * b / 3.0
    q = 2.0 * b**3 / 27.0 - b * c / 3.0 + d
    disc = (q / 2.0) ** 2 + (p / 3.0) ** 3
    if disc < 0.0:
        # three distinct real roots: trigonometric form
        m = 2.0 * math.sqrt(-p / 3.0)
        arg = max(-1.0, min(1.0, 3.0 * q / (p * m)))
        theta = math.acos(arg) / 3.0
        roots = [m * math.cos(theta - 2.0 * math.pi * k / 3.0) - shift for k in range(3)]
    else:
        sq = math.sqrt(disc)
        u = np.cbrt(-q / 2.0 + sq)
        v = np.cbrt(-q / 2.0 - sq)
        roots = [float(u + v) - shift]
        if disc == 0.0 and p != 0.0:
            roots.append(float(-(u + v) / 2.0) - shift)
    return roots


def _polish(coefs, x):
    deriv = np.polyder(coefs)
    for _ in range(3):
        slope = np.polyval(deriv, x)
        if slope == 0.0:
            break
        x = x - np.polyval(coefs, x) / slope
    return float(x)


def mode_analysis(params: BBetaParams) -> ModeAnalysis:
    """Locate and classify the interior critical points of the density."""
    a, b, _, d = params.as_tuple()
    coefs = critical_polynomial(params)
    if abs(d) < DELTA_EPS:
        coefs = coefs[2:]  # reduces to the beta mode equation
    while coefs.size and coefs[0] == 0.0:
        coefs = coefs[1:]
    if coefs.size <= 1:
        # derivative factor is constant: no isolated critical points
        return ModeAnalysis((), (), ModeClass.DEGENERATE)
    if coefs.size == 4:
        roots = _real_cubic_roots(*coefs)
    else:
        roots = [r.real for r in np.roots(coefs) if abs(r.imag) < 1e-12]
    roots = sorted({_polish(coefs, r) for r in roots})
    points, kinds = [], []
    deriv = np.polyder(coefs)
    for r in roots:
        if not 0.0 < r < 1.0:
            continue
        slope = np.polyval(deriv, r)
        scale = np.abs(deriv).max()
        if abs(slope) <= 1e-12 * scale:
            kind = "flat"
        else:
            kind = "max" if slope < 0 else "min"
        points.append(r)
        kinds.append(kind)
    maxima = tuple(p for p, k in zip(points, kinds) if k == "max")
    minima = [p for p, k in zip(points, kinds) if k == "min"]
    if a <= 1.0 or b <= 1.0:
        cls = ModeClass.DEGENERATE
    elif kinds == ["max", "min", "max"]:
        cls = ModeClass.BIMODAL
    else:
        cls = ModeClass.UNIMODAL
    return ModeAnalysis(
        tuple(points), tuple(kinds), cls, maxima, minima[0] if len(minima) == 1 else None
    )

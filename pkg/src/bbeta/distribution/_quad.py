import math
import warnings

from scipy import integrate

from ..specfun import ConvergenceError

ACCEPT_REL = 1e-9


def weighted_integral(func, a_exp, b_exp, weight="alg", epsabs=0.0, epsrel=1e-12, limit=400):
    """Integrate ``func(x) * x**a_exp * (1 - x)**b_exp`` over [0, 1].

    The algebraic endpoint factor is handled by QUADPACK's weighted rule
    (``qawse``), so ``func`` only needs to be smooth. ``weight`` may also be
    ``"alg-loga"`` / ``"alg-logb"`` to multiply by ``log(x)`` / ``log(1 - x)``.

    When both exponents are at least 1 (or qawse reports trouble and
    neither is negative) the integrand is integrated unweighted with a
    break point at the peak of the weight. A remaining warning is tolerated
    only when QUADPACK's error estimate is within ``ACCEPT_REL`` of the
    value.
    """
    problems = True
    if min(a_exp, b_exp) < 1.0:
        value, abserr, problems = _quad(func, weight=weight, wvar=(a_exp, b_exp),
                                        epsabs=epsabs, epsrel=epsrel, limit=limit)
        problems = problems or not abserr >= 0.0
    if problems and a_exp >= 0.0 and b_exp >= 0.0:
        # qawse goes wrong silently for large exponents, so bounded integrands are
        # integrated directly, split at the peak of the weight
        value, abserr, problems = _quad(_unweighted(func, a_exp, b_exp, weight), epsabs=epsabs,
                                        epsrel=epsrel, limit=limit, points=(_peak(a_exp, b_exp),))
    if problems and not abserr <= max(epsabs, ACCEPT_REL * abs(value)):
        raise ConvergenceError(f"quadrature failed: {problems[0].message}")
    return value


def _quad(func, **kwargs):
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", integrate.IntegrationWarning)
        value, abserr = integrate.quad(func, 0.0, 1.0, **kwargs)[:2]
    problems = [w for w in caught if issubclass(w.category, integrate.IntegrationWarning)]
    return value, abserr, problems


def _peak(a_exp, b_exp):
    total = a_exp + b_exp
    return 0.5 if total == 0.0 else a_exp / total


def _unweighted(func, a_exp, b_exp, weight):
    def full(x):
        if x <= 0.0 or x >= 1.0:
            return 0.0 if (x <= 0.0 and a_exp > 0.0) or (x >= 1.0 and b_exp > 0.0) else func(x)
        w = math.exp(a_exp * math.log(x) + b_exp * math.log1p(-x))
        if weight == "alg-loga":
            w *= math.log(x)
        elif weight == "alg-logb":
            w *= math.log1p(-x)
        return func(x) * w

    return full

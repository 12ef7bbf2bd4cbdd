"""Random variate generation.

Generators are numpy ``Generator`` objects over the counter-based Philox
bit generator, seeded through ``SeedSequence`` so independent child
streams can be spawned for parallel work.
"""

from __future__ import annotations

import numpy as np

from ..specfun import ConvergenceError
from .params import BBetaParams, mixture_weights_arrays

__all__ = ["make_rng", "spawn_seeds", "sample", "draw"]

MAX_PROPOSALS = 1_000_000


def make_rng(seed) -> np.random.Generator:
    """Generator for an int seed, a ``SeedSequence`` or an existing Generator."""
    if isinstance(seed, np.random.Generator):
        return seed
    if not isinstance(seed, np.random.SeedSequence):
        seed = np.random.SeedSequence(seed)
    return np.random.Generator(np.random.Philox(seed))


def spawn_seeds(seed, n: int) -> list[np.random.SeedSequence]:
    root = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    return root.spawn(n)


def draw(rng: np.random.Generator, alpha, beta, rho: float, delta: float, size=None) -> np.ndarray:
    """Draw variates; ``alpha``/``beta`` may be per-observation arrays.

    ``delta = 0`` is a plain Beta(alpha, beta) draw. For ``delta < 0`` the
    three mixture weights are non-negative and a component
    Beta(alpha + l, beta), l in {0, 1, 2}, is chosen by weight.
    For ``delta > 0`` the middle weight is negative and rejection from a
    Beta(alpha, beta) proposal is used, accepting with probability
    ``(rho + (1 - delta y)^2) / (rho + max(1, (1 - delta)^2))``.
    """
    alpha = np.asarray(alpha, dtype=float)
    beta = np.asarray(beta, dtype=float)
    extra = () if size is None else tuple(np.atleast_1d(size).tolist())
    shape = np.broadcast_shapes(alpha.shape, beta.shape, extra)
    alpha = np.broadcast_to(alpha, shape).ravel()
    beta = np.broadcast_to(beta, shape).ravel()
    n = alpha.size
    if delta == 0.0:
        # plain Beta law; no component draw so the stream matches rng.beta
        out = rng.beta(alpha, beta)
    elif delta < 0.0:
        pi1, pi2, _ = mixture_weights_arrays(alpha, beta, rho, delta)
        u = rng.random(n)
        comp = (u >= pi1).astype(float) + (u >= pi1 + pi2)
        out = rng.beta(alpha + comp, beta)
    else:
        bound = rho + max(1.0, (1.0 - delta) ** 2)
        out = np.empty(n)
        pending = np.arange(n)
        proposals = 0
        while pending.size:
            y = rng.beta(alpha[pending], beta[pending])
            u = rng.random(pending.size)
            accept = u * bound <= rho + (1.0 - delta * y) ** 2
            out[pending[accept]] = y[accept]
            pending = pending[~accept]
            proposals += 1
            if proposals >= MAX_PROPOSALS and pending.size:
                raise ConvergenceError(f"rejection sampler exceeded {MAX_PROPOSALS} proposals")
    return out.reshape(shape)


def sample(n: int, params: BBetaParams, seed=0) -> np.ndarray:
    """``n`` i.i.d. draws, reproducible for a given ``seed``."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return draw(make_rng(seed), params.alpha, params.beta, params.rho, params.delta, size=n)

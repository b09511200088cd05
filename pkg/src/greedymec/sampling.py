"""Seeded random instances.

Each marginal is ``n`` unit-exponential draws normalized to sum to one,
i.e. a Dirichlet(1, ..., 1) sample, then sorted nonincreasing. Draws come
from NumPy's PCG64 generator seeded with ``[seed, trial]``, so trial ``t``
of a run does not depend on how many trials precede it.
"""

from __future__ import annotations

import numpy as np

from .core import DEFAULT_TOL, Instance, NumericMode, make_instance, to_exact


def trial_rng(seed: int, trial: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64([seed, trial]))


def random_instance(
    rng: np.random.Generator,
    m: int,
    n: int,
    mode: NumericMode | str = NumericMode.FLOAT,
) -> Instance:
    draws = rng.exponential(size=(m, n))
    rows = draws / draws.sum(axis=1, keepdims=True)
    S = make_instance(rows.tolist(), NumericMode.FLOAT, renormalize=True, tol=DEFAULT_TOL)
    if NumericMode(mode) is NumericMode.EXACT:
        S = to_exact(S)
    return S


def trial_instance(seed: int, trial: int, m, n, mode=NumericMode.FLOAT) -> Instance:
    """Instance for one trial. ``m`` and ``n`` may be ints or inclusive
    ``(low, high)`` ranges sampled per trial."""
    rng = trial_rng(seed, trial)
    if isinstance(m, tuple):
        m = int(rng.integers(m[0], m[1] + 1))
    if isinstance(n, tuple):
        n = int(rng.integers(n[0], n[1] + 1))
    return random_instance(rng, m, n, mode)

"""Geometric splitting of the meet and the entropy bounds it yields.

Splitting a distribution ``M`` by ``Geom(gamma)`` replaces every state
``M[l]`` with the infinite cascade ``M[l] * gamma * (1 - gamma)**(k - 1)``,
``k = 1, 2, ...``. The greedy coupling ``(z - 1)``-strongly majorizes the
split of the meet at ``gamma = 1/z``, which bounds its entropy by
``H(meet) + H(Geom(1/z)) - log2(z - 1)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .core import DEFAULT_TOL, Distribution, Instance, Tolerances
from .errors import DomainError
from .majorization import (
    EntropyOrderingReport,
    StrongMajorization,
    check_strong_majorization_entropy_bound,
    is_strongly_majorized,
)

DEFAULT_TAIL = 1e-12
MAX_SPLIT_ENTRIES = 5_000_000


def geom_entropy(gamma: float) -> float:
    """Entropy in bits of ``Geom(gamma)`` on ``{1, 2, ...}``."""
    gamma = float(gamma)
    if not 0 < gamma < 1:
        raise DomainError(f"gamma must lie in (0, 1), got {gamma}")
    # -(1-g)log2(1-g)/g - log2(g), with log1p for small g
    return -math.log2(gamma) - (1 - gamma) / gamma * math.log1p(-gamma) / math.log(2)


def split_entropy_bound(meet_entropy: float, z: int) -> float:
    """Upper bound on the greedy coupling's entropy from the ``1/z`` split."""
    if z < 2:
        raise DomainError(f"z must be an integer >= 2, got {z}")
    return meet_entropy + geom_entropy(1 / z) - math.log2(z - 1)


@dataclass(frozen=True)
class SplitEntry:
    mass: float
    source: int
    geom_index: int


class SplitDistribution:
    """The materialized head of a geometric split, in nonincreasing order.

    ``tail_bound`` is the mass not materialized, so ``sum(masses) +
    tail_bound == 1`` up to round-off. Masses are kept as a read-only array
    (``mass_array``); ``entries`` builds the labelled view on demand.
    """

    def __init__(self, masses, sources, geom_indices, gamma: float, tail_bound: float):
        self.mass_array = np.asarray(masses, dtype=float)
        self.sources = np.asarray(sources, dtype=np.int64)
        self.geom_indices = np.asarray(geom_indices, dtype=np.int64)
        for a in (self.mass_array, self.sources, self.geom_indices):
            a.flags.writeable = False
        self.gamma = gamma
        self.tail_bound = tail_bound

    @property
    def masses(self) -> tuple[float, ...]:
        return tuple(self.mass_array.tolist())

    @property
    def entries(self) -> tuple[SplitEntry, ...]:
        return tuple(
            SplitEntry(m, l, k)
            for m, l, k in zip(
                self.mass_array.tolist(), self.sources.tolist(), self.geom_indices.tolist()
            )
        )

    def __len__(self) -> int:
        return len(self.mass_array)

    def __repr__(self) -> str:
        return f"SplitDistribution(size={len(self)}, gamma={self.gamma}, tail_bound={self.tail_bound})"


def split(meet: Distribution, gamma: float, tail: float = DEFAULT_TAIL) -> SplitDistribution:
    """Materialize the split of ``meet`` until at most ``tail`` mass remains.

    Entries come out in the order a frontier queue over ``(source, k)`` pairs
    would pop them: by mass, then ``(source, k)`` lexicographically.
    Every materialized mass exceeds ``tail * gamma / n`` (when the last entry
    is popped the remaining mass is above ``tail`` and is at most
    ``n / gamma`` times that entry), so it suffices to enumerate the entries
    above that threshold and sort them.
    """
    gamma = float(gamma)
    if not 0 < gamma < 1:
        raise DomainError(f"gamma must lie in (0, 1), got {gamma}")
    if not 0 < tail < 1:
        raise DomainError(f"tail must lie in (0, 1), got {tail}")
    M = meet.as_array()
    n = len(M)
    floor = tail * gamma / n
    q = 1 - gamma
    sources, ks = [], []
    for l, mass in enumerate(M):
        if mass <= 0:
            continue
        top = mass * gamma
        count = 1 if top <= floor else int(math.floor(math.log(floor / top) / math.log(q))) + 2
        sources.append(np.full(count, l))
        ks.append(np.arange(1, count + 1))
    if sum(len(k) for k in ks) > MAX_SPLIT_ENTRIES:
        raise DomainError("split would materialize too many entries; raise tail or gamma")
    src = np.concatenate(sources)
    k = np.concatenate(ks)
    mass = M[src] * gamma * np.power(q, k - 1)
    order = np.lexsort((k, src, -mass))
    src, k, mass = src[order], k[order], mass[order]
    remaining = math.fsum(M) - np.cumsum(mass)
    stop = np.flatnonzero(remaining <= tail)
    count = int(stop[0]) + 1 if stop.size else len(mass)
    return SplitDistribution(
        mass[:count], src[:count], k[:count], gamma, max(float(remaining[count - 1]), 0.0)
    )


@dataclass(frozen=True)
class SplitCheck:
    """Result of testing the greedy masses against the ``1/z`` split of the meet."""

    z: int
    strong: StrongMajorization
    entropy: Optional[EntropyOrderingReport]
    split_size: int
    tail_bound: float

    @property
    def holds(self) -> bool:
        return self.strong.holds and self.entropy is not None and self.entropy.holds


def verify_split_strong_majorization(
    S: Instance,
    z: int,
    tail: float = DEFAULT_TAIL,
    tol: Tolerances = DEFAULT_TOL,
    greedy_masses=None,
    meet_dist: Distribution | None = None,
) -> SplitCheck:
    """Check that the greedy masses ``(z-1)``-strongly majorize the ``1/z``
    split of the meet, and that the resulting entropy ordering holds.

    Precomputed ``greedy_masses`` and ``meet_dist`` may be passed to avoid
    recomputing them for several ``z``.
    """
    from .greedy import greedy_couple
    from .majorization import meet

    if z < 2:
        raise DomainError(f"z must be an integer >= 2, got {z}")
    if meet_dist is None:
        meet_dist = meet(S).meet
    if greedy_masses is None:
        greedy_masses = greedy_couple(S, tol).masses
    q = [float(x) for x in greedy_masses]
    sp = split(meet_dist, 1 / z, tail)
    strong = is_strongly_majorized(sp, q, z - 1, tol)
    report = None
    if strong.holds:
        report = check_strong_majorization_entropy_bound(sp, q, z - 1, tol, witness=strong)
    return SplitCheck(z, strong, report, len(sp), sp.tail_bound)

"""Majorization predicates, the majorization meet, and strong majorization.

``q`` majorizes ``p`` when every prefix sum of sorted ``q`` is at least the
matching prefix sum of sorted ``p``. The meet of a set is the largest
distribution majorized by every member; its prefix sums are the pointwise
minima of the members' prefix sums.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

import numpy as np

from .core import (
    DEFAULT_TOL,
    Distribution,
    Instance,
    NumericMode,
    Tolerances,
    entropy,
    make_distribution,
)
from .errors import BoundViolation, NoCoveringPrefix, PreconditionViolated


def _masses(x) -> list:
    if hasattr(x, "mass_array"):
        return x.mass_array
    if isinstance(x, Distribution):
        return list(x.probs)
    if hasattr(x, "masses"):
        return list(x.masses)
    return list(x)


def _is_exact(*seqs) -> bool:
    if any(isinstance(s, np.ndarray) for s in seqs):
        return False
    return all(isinstance(v, (Fraction, int)) for s in seqs for v in s)


def majorizes(q, p, tol: Tolerances = DEFAULT_TOL) -> bool:
    """True iff ``p`` is majorized by ``q``. Shorter inputs are zero-padded."""
    qs, ps = list(_masses(q)), list(_masses(p))
    slack = 0 if _is_exact(qs, ps) else tol.compare
    n = max(len(qs), len(ps))
    qs += [0] * (n - len(qs))
    ps += [0] * (n - len(ps))
    sq = sp = 0
    for a, b in zip(qs, ps):
        sq += a
        sp += b
        if sp > sq + slack:
            return False
    return True


@dataclass(frozen=True)
class MeetResult:
    """The meet plus, for each prefix length ``j = 1..n``, the marginal whose
    ``j``-prefix was smallest (lowest marginal index on ties)."""

    meet: Distribution
    per_index_argmin: tuple[int, ...]


def meet(S: Instance) -> MeetResult:
    zero = Fraction(0) if S.exact else 0.0
    minima = [zero]
    argmin = []
    for j in range(1, S.n + 1):
        k = min(range(S.m), key=lambda r: S.marginals[r].prefix[j])
        argmin.append(k)
        minima.append(S.marginals[k].prefix[j])
    diffs = [b - a for a, b in zip(minima, minima[1:])]
    if S.exact:
        dist = Distribution(tuple(diffs), NumericMode.EXACT)
    else:
        # round-off can make the differences non-monotone by a few ulps
        dist = make_distribution(diffs, NumericMode.FLOAT)
    return MeetResult(dist, tuple(argmin))


@dataclass(frozen=True)
class StrongMajorization:
    """Outcome of an alpha-strong majorization test of ``p`` by ``q``.

    ``witness[i]`` is the prefix length ``j`` of ``q`` used for state ``i`` of
    ``p`` (so the compared element is ``q[j - 1]``). On failure ``violation``
    is the first offending state of ``p`` and ``witness`` covers only the
    states before it.
    """

    holds: bool
    alpha: float
    witness: tuple[int, ...]
    violation: Optional[int] = None
    tail_bound: float = 0.0

    def __bool__(self) -> bool:
        return self.holds


def is_strongly_majorized(p, q, alpha, tol: Tolerances = DEFAULT_TOL) -> StrongMajorization:
    """Test whether ``p`` is ``alpha``-strongly majorized by ``q``.

    For every state ``i`` of ``p`` we need some prefix of ``q`` whose sum is at
    least ``sum(p[:i+1])`` and whose last element is at least
    ``alpha * p[i]``. Because ``q`` is nonincreasing, the shortest covering
    prefix has the largest last element, so only that one is checked.

    ``p`` may be a truncated sequence (e.g. a split distribution); its
    ``tail_bound`` is carried into the result.

    Raises:
        NoCoveringPrefix: a prefix of ``p`` exceeds 1 beyond tolerance.
    """
    ps, qs = _masses(p), _masses(q)
    tail = float(getattr(p, "tail_bound", 0.0))
    if alpha < 0:
        raise PreconditionViolated(f"alpha must be nonnegative, got {alpha}")
    if _is_exact(ps, qs) and isinstance(alpha, (int, Fraction)):
        return _strong_exact(ps, qs, alpha, tail)

    pa = _float_array(ps)
    qa = _float_array(qs)
    cp, cq = np.cumsum(pa), np.cumsum(qa)
    slack = tol.compare
    over = np.flatnonzero(cp > 1 + slack)
    if over.size:
        raise NoCoveringPrefix(f"prefix {over[0] + 1} of p sums to {cp[over[0]]!r} > 1")
    j = np.searchsorted(cq, cp - slack, side="left")
    covered = j < len(qa)
    ok = covered.copy()
    ok[covered] = float(alpha) * pa[covered] <= qa[j[covered]] + slack
    bad = np.flatnonzero(~ok)
    if bad.size:
        i = int(bad[0])
        return StrongMajorization(False, float(alpha), tuple((j[:i] + 1).tolist()), i, tail)
    return StrongMajorization(True, float(alpha), tuple((j + 1).tolist()), None, tail)


def _float_array(xs) -> np.ndarray:
    if isinstance(xs, np.ndarray):
        return xs.astype(float, copy=False)
    return np.asarray([float(x) for x in xs])


def _strong_exact(ps, qs, alpha, tail) -> StrongMajorization:
    witness = []
    sp = Fraction(0)
    sq = Fraction(0)
    j = 0  # number of q states consumed into sq
    for i, x in enumerate(ps):
        sp += x
        if sp > 1:
            raise NoCoveringPrefix(f"prefix {i + 1} of p sums to {sp} > 1")
        while sq < sp and j < len(qs):
            sq += qs[j]
            j += 1
        if sq < sp or j == 0 or alpha * x > qs[j - 1]:
            return StrongMajorization(False, float(alpha), tuple(witness), i, tail)
        witness.append(j)
    return StrongMajorization(True, float(alpha), tuple(witness), None, tail)


@dataclass(frozen=True)
class EntropyOrderingReport:
    """``slack = H(p) - log2(alpha) - H(q)``; nonnegative when the ordering holds."""

    entropy_p: float
    entropy_q: float
    log_alpha: float
    slack: float
    tail_bound: float = 0.0

    @property
    def holds(self) -> bool:
        return self.slack >= -DEFAULT_TOL.compare


def check_strong_majorization_entropy_bound(
    p, q, alpha, tol: Tolerances = DEFAULT_TOL, witness: StrongMajorization | None = None
) -> EntropyOrderingReport:
    """Check ``H(q) <= H(p) - log2(alpha)`` for a strongly majorized pair.

    Pass ``witness`` to reuse an already computed predicate result.

    Raises:
        PreconditionViolated: ``p`` is not ``alpha``-strongly majorized by ``q``.
        BoundViolation: the entropy inequality fails beyond ``tol.compare``.
    """
    if witness is None:
        witness = is_strongly_majorized(p, q, alpha, tol)
    if not witness.holds:
        raise PreconditionViolated(
            f"p is not {float(alpha)}-strongly majorized by q (fails at state {witness.violation})"
        )
    hp, hq = entropy(_masses(p)), entropy(_masses(q))
    log_alpha = math.log2(float(alpha)) if alpha > 0 else -math.inf
    slack = hp - log_alpha - hq
    report = EntropyOrderingReport(hp, hq, log_alpha, slack, witness.tail_bound)
    if slack < -tol.compare:
        raise BoundViolation(
            f"H(q)={hq!r} exceeds H(p) - log2(alpha) = {hp - log_alpha!r} by {-slack:.3e}"
        )
    return report


"""Coupling every distribution that majorizes a fixed ``p``.

For that (infinite) family the meet is ``p`` itself, and the best any
coupling can do is the sequence

    G'(i) = max over j of (sum(p[:j]) - sum(G'[:i-1])) / j,

which the greedy coupling attains. :func:`adversary` builds the member of
the family that a candidate coupling escaping majorization by ``G'`` fails
to couple, and :func:`defeat_check` confirms that failure by exhaustive
search. The uniform case has closed forms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .core import (
    DEFAULT_TOL,
    Distribution,
    NumericMode,
    Tolerances,
    make_distribution,
)
from .errors import AssertionFailure, DomainError, InvalidWitness, SupportTooLarge
from .majorization import majorizes

DEFAULT_TAIL = 1e-12
PARTITION_CAP = 12


@dataclass(frozen=True)
class GPrime:
    """Materialized head of the ``G'`` sequence for ``base``.

    ``argmax_j[i]`` is the smallest prefix length attaining the maximum for
    ``states[i]``; ``residual`` is ``1 - sum(states)``.
    """

    base: Distribution
    states: tuple
    argmax_j: tuple[int, ...]
    residual: float | Fraction

    @property
    def masses(self) -> tuple:
        return self.states

    def __len__(self) -> int:
        return len(self.states)

    @property
    def entropy_tail_allowance(self) -> float:
        """Allowance for the entropy of the unmaterialized residual.

        ``residual * (log2(1 / last_state) + log2(e))``. This is a bookkeeping
        margin for entropy reports, not the exact entropy of the tail.
        """
        r = float(self.residual)
        if r <= 0 or not self.states:
            return 0.0
        return r * (-math.log2(float(self.states[-1])) + 1 / math.log(2))


def gprime(p: Distribution, tail: float = DEFAULT_TAIL, max_states: Optional[int] = None) -> GPrime:
    """Iterate the ``G'`` recursion until the residual drops to ``tail``.

    Each state takes at least ``1/n`` of what is left, so the residual decays
    at least geometrically. ``max_states`` stops earlier when given.
    """
    if not 0 < tail < 1:
        raise DomainError(f"tail must lie in (0, 1), got {tail}")
    pref = p.prefix
    n = len(p)
    one = pref[n] if p.exact else 1.0
    used = Fraction(0) if p.exact else 0.0
    states, argmax = [], []
    residual = one - used
    while residual > tail and residual > 0:
        if max_states is not None and len(states) >= max_states:
            break
        best, best_j = None, 0
        for j in range(1, n + 1):
            val = (pref[j] - used) / j
            if best is None or val > best:
                best, best_j = val, j
        states.append(best)
        argmax.append(best_j)
        used += best
        residual = one - used
    return GPrime(p, tuple(states), tuple(argmax), residual)


def _maximizes(p: Distribution, gp: GPrime, i_prime: int, j_prime: int, tol: Tolerances) -> bool:
    used = sum(gp.states[: i_prime - 1], Fraction(0) if p.exact else 0.0)
    val = (p.prefix[j_prime] - used) / j_prime
    target = gp.states[i_prime - 1]
    if p.exact:
        return val == target
    return abs(val - target) <= tol.compare


def adversary(
    p: Distribution, gp: GPrime, i_prime: int, j_prime: int, tol: Tolerances = DEFAULT_TOL
) -> Distribution:
    """The majorizing distribution that merges the first ``i_prime`` states of
    ``G'`` into one state, repeats ``G'[i_prime - 1]`` on the next
    ``j_prime - 1`` states, and copies ``p`` after that.

    ``i_prime`` counts leading ``G'`` states (1-based); ``j_prime`` is a
    prefix length of ``p`` attaining the maximum for state ``i_prime``.

    Raises:
        InvalidWitness: ``j_prime`` does not attain the maximum.
        AssertionFailure: the result does not sum to 1, is unsorted, or does
            not majorize ``p``.
    """
    n = len(p)
    if not 1 <= i_prime <= len(gp):
        raise InvalidWitness(f"i_prime {i_prime} outside [1, {len(gp)}]")
    if not 1 <= j_prime <= n:
        raise InvalidWitness(f"j_prime {j_prime} outside [1, {n}]")
    if not _maximizes(p, gp, i_prime, j_prime, tol):
        raise InvalidWitness(f"j_prime {j_prime} does not maximize state {i_prime}")
    zero = Fraction(0) if p.exact else 0.0
    g = gp.states[i_prime - 1]
    head = sum(gp.states[:i_prime], zero)
    probs = [head] + [g] * (j_prime - 1) + list(p.probs[j_prime:])

    slack = 0 if p.exact else tol.mass
    total = sum(probs, zero)
    if abs(total - 1) > slack:
        raise AssertionFailure(f"adversary sums to {float(total)!r}")
    for a, b in zip(probs, probs[1:]):
        if b > a + slack:
            raise AssertionFailure(f"adversary is not sorted: {float(a)!r} < {float(b)!r}")
    if p.exact:
        out = Distribution(tuple(probs), NumericMode.EXACT)
    else:
        out = make_distribution(probs, NumericMode.FLOAT)
    if not majorizes(out, p, tol):
        raise AssertionFailure("adversary does not majorize p")
    return out


def _partition_exists(items: list, bins: list, exact: bool, tol: float) -> bool:
    """Can ``items`` be split into groups whose sums are exactly ``bins``?"""
    k = len(items)
    full = (1 << k) - 1
    sums = [0] * (1 << k)
    for mask in range(1, 1 << k):
        low = mask & -mask
        sums[mask] = sums[mask ^ low] + items[low.bit_length() - 1]

    def close(a, b):
        return a == b if exact else abs(a - b) <= tol

    suffix = [0] * (len(bins) + 1)
    for b in range(len(bins) - 1, -1, -1):
        suffix[b] = suffix[b + 1] + bins[b]

    seen = set()

    def fill(mask: int, b: int) -> bool:
        if b == len(bins):
            return mask == 0
        if (mask, b) in seen or not close(sums[mask], suffix[b]):
            return False
        seen.add((mask, b))
        if close(bins[b], 0):
            return fill(mask, b + 1)
        sub = mask
        while sub:
            if close(sums[sub], bins[b]) and fill(mask ^ sub, b + 1):
                return True
            sub = (sub - 1) & mask
        return False

    return fill(full, 0)


@dataclass(frozen=True)
class DefeatVerdict:
    """Outcome of :func:`defeat_check`.

    ``status`` is ``"consistent"`` when the candidate is majorized by ``G'``
    over the materialized prefix, ``"defeated"`` when it is not and the
    adversary cannot be coupled, and ``"coupled"`` when the adversary could
    be coupled after all (which would contradict the construction).
    """

    status: str
    i_prime: Optional[int] = None
    j_prime: Optional[int] = None
    adversary: Optional[Distribution] = None

    @property
    def defeated(self) -> bool:
        return self.status == "defeated"


def defeat_check(
    candidate,
    p: Distribution,
    gp: GPrime,
    cap: int = PARTITION_CAP,
    tol: Tolerances = DEFAULT_TOL,
) -> DefeatVerdict:
    """Try to defeat a candidate coupling of the family majorizing ``p``.

    A coupling's states can be grouped onto each marginal's states, so a
    candidate couples the adversary only if its states partition into
    groups summing to the adversary's states. That partition is searched for
    exhaustively.

    Raises:
        SupportTooLarge: the candidate has more than ``cap`` nonzero states.
    """
    masses = list(candidate.probs if isinstance(candidate, Distribution) else candidate)
    masses.sort(reverse=True)
    exact = p.exact and all(isinstance(x, Fraction) for x in masses)
    slack = 0 if exact else tol.compare
    zero = Fraction(0) if exact else 0.0
    sc = sg = zero
    i_prime = None
    for i, (c, g) in enumerate(zip(masses, gp.states)):
        sc += c
        sg += g
        if sc > sg + slack:
            i_prime = i + 1
            break
    if i_prime is None:
        return DefeatVerdict("consistent")
    j_prime = gp.argmax_j[i_prime - 1]
    adv = adversary(p, gp, i_prime, j_prime, tol)
    items = [x for x in masses if x > 0]
    if len(items) > cap:
        raise SupportTooLarge(f"candidate has {len(items)} states; cap is {cap}")
    bins = list(adv.probs)
    if _partition_exists(items, bins, exact, tol.mass):
        return DefeatVerdict("coupled", i_prime, j_prime, adv)
    return DefeatVerdict("defeated", i_prime, j_prime, adv)


def uniform(n: int, mode: NumericMode | str = NumericMode.FLOAT) -> Distribution:
    if n < 1:
        raise DomainError(f"n must be >= 1, got {n}")
    mode = NumericMode(mode)
    x = Fraction(1, n) if mode is NumericMode.EXACT else 1.0 / n
    if mode is NumericMode.FLOAT:
        return make_distribution([x] * n, mode)
    return Distribution((x,) * n, mode)


def uniform_greedy_state(n: int, i: int, exact: bool = False):
    """Mass of the ``i``-th greedy state (1-based) when coupling every
    distribution that majorizes the uniform distribution on ``n`` states."""
    if n < 1 or i < 1:
        raise DomainError(f"need n >= 1 and i >= 1, got n={n}, i={i}")
    if exact:
        return Fraction(n - 1, n) ** (i - 1) / n
    return (1 - 1 / n) ** (i - 1) / n


def uniform_gap(n: int) -> float:
    """``(n-1) * log2(n / (n-1))``: how far that greedy coupling sits above
    the meet, in bits. Increases toward ``log2(e)``."""
    if n < 2:
        raise DomainError(f"n must be >= 2, got {n}")
    return -(n - 1) * math.log1p(-1 / n) / math.log(2)

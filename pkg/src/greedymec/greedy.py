"""Greedy minimum-entropy coupling and the certificates that bound it.

The greedy rule: at each step take the largest remaining state of every
marginal, create a coupling cell at those coordinates whose mass is the
smallest of the m maxima, and subtract that mass from each coordinate.
Per-marginal maxima live in max-heaps, so a run costs O(m^2 n log n).
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .core import DEFAULT_TOL, Coupling, Instance, Number, Tolerances, entropy
from .errors import BoundViolation, CertificateViolation, PreconditionViolated
from .majorization import MeetResult, meet
from .split import split_entropy_bound

LOG2_E = math.log2(math.e)


@dataclass(frozen=True)
class GreedyStep:
    indices: tuple[int, ...]
    mass: Number
    argmin_marginal: int


@dataclass(frozen=True)
class GreedyTrace:
    """A greedy run: the coupling plus the step-by-step record.

    ``residual_checkpoints[t]`` (only when requested) holds every marginal's
    residual vector after step ``t``.
    """

    coupling: Coupling
    steps: tuple[GreedyStep, ...]
    residual_checkpoints: tuple = ()

    @property
    def masses(self) -> tuple:
        return tuple(s.mass for s in self.steps)

    def __len__(self) -> int:
        return len(self.steps)


def greedy_couple(S: Instance, tol: Tolerances = DEFAULT_TOL, checkpoints: bool = False) -> GreedyTrace:
    """Run the greedy coupling on ``S``.

    Ties inside a marginal go to the smallest state index; when several
    marginals attain the step mass, ``argmin_marginal`` is the smallest one.
    In float mode residuals below ``tol.snap`` are set to zero so the run
    terminates even when the marginals' sums differ by round-off.
    """
    exact = S.exact
    zero = Fraction(0) if exact else 0.0
    residual = [list(p.probs) for p in S]
    heaps = [[(-x, k) for k, x in enumerate(p.probs)] for p in S]
    for h in heaps:
        heapq.heapify(h)

    steps: list[GreedyStep] = []
    cells = []
    snaps = []
    while True:
        tops = [h[0] for h in heaps]
        values = [-v for v, _ in tops]
        u = min(values)
        if u <= 0:
            break
        r = values.index(u)
        idx = tuple(k for _, k in tops)
        for h, row, k in zip(heaps, residual, idx):
            left = row[k] - u
            if not exact and left < tol.snap:
                left = zero
            row[k] = left
            heapq.heapreplace(h, (-left, k))
        steps.append(GreedyStep(idx, u, r))
        cells.append((idx, u))
        if checkpoints:
            snaps.append(tuple(tuple(row) for row in residual))
    return GreedyTrace(Coupling(tuple(cells), S), tuple(steps), tuple(snaps))


def step_lower_bounds(masses: Sequence, meet_probs: Sequence) -> list[tuple[Number, int]]:
    """For each step ``i`` return ``(bound, j)`` where

        bound = max over j of (sum(meet[:j]) - sum(masses[:i])) / j

    and ``j`` is the smallest prefix length attaining the maximum.
    Exact arithmetic is used when every input is a Fraction.
    """
    exact = all(isinstance(x, Fraction) for x in masses) and all(
        isinstance(x, Fraction) for x in meet_probs
    )
    if not exact:
        mp = np.asarray([float(x) for x in meet_probs])
        ms = np.asarray([float(x) for x in masses])
        pref = np.cumsum(mp)
        used = np.concatenate(([0.0], np.cumsum(ms)[:-1]))
        js = np.arange(1, len(mp) + 1)
        table = (pref[None, :] - used[:, None]) / js[None, :]
        best = np.argmax(table, axis=1)
        return [(float(table[i, b]), int(b) + 1) for i, b in enumerate(best)]

    pref = [Fraction(0)]
    for x in meet_probs:
        pref.append(pref[-1] + x)
    out = []
    used = Fraction(0)
    for g in masses:
        best, best_j = None, 0
        for j in range(1, len(pref)):
            val = (pref[j] - used) / j
            if best is None or val > best:
                best, best_j = val, j
        out.append((best, best_j))
        used += g
    return out


@dataclass(frozen=True)
class CertificateRow:
    step: int
    bound: Number
    argmax_j: int
    mass: Number

    @property
    def slack(self) -> float:
        return float(self.mass - self.bound)


@dataclass(frozen=True)
class LowerBoundCertificate:
    """Per-step lower bounds on the greedy masses, derived from the meet."""

    rows: tuple[CertificateRow, ...]
    violations: tuple[CertificateRow, ...] = ()

    @property
    def min_slack(self) -> float:
        return min((r.slack for r in self.rows), default=math.inf)


def lower_bound_certificate(
    trace: GreedyTrace | Sequence,
    meet_result: MeetResult,
    tol: Tolerances = DEFAULT_TOL,
    strict: bool = True,
) -> LowerBoundCertificate:
    """Certify every greedy mass against its meet-derived lower bound.

    ``trace`` may also be a bare mass sequence (used for the G' recursion,
    whose states meet their bounds with equality).

    Raises:
        CertificateViolation: with ``strict``, when some mass is below its
            bound by more than ``tol.compare`` (at all, in exact mode). This
            is a bug signal, never a legitimate outcome.
    """
    masses = trace.masses if isinstance(trace, GreedyTrace) else tuple(trace)
    if isinstance(trace, GreedyTrace) and trace.coupling.instance.n != len(meet_result.meet):
        raise PreconditionViolated("trace and meet come from different instances")
    bounds = step_lower_bounds(masses, meet_result.meet.probs)
    rows = tuple(
        CertificateRow(i + 1, b, j, g) for i, ((b, j), g) in enumerate(zip(bounds, masses))
    )
    bad = [r for r in rows if _below(r, tol)]
    if strict and bad:
        r = bad[0]
        raise CertificateViolation(
            f"step {r.step}: mass {float(r.mass)!r} below bound {float(r.bound)!r}"
        )
    return LowerBoundCertificate(rows, tuple(bad))


def _below(r: CertificateRow, tol: Tolerances) -> bool:
    if isinstance(r.bound, Fraction) and isinstance(r.mass, Fraction):
        return r.mass < r.bound
    return r.slack < -tol.compare


@dataclass(frozen=True)
class BoundReport:
    """Entropies, gap and bound checks for one instance.

    ``checks`` maps a check name to whether it passed: ``"certificate"``,
    ``"gap_nonnegative"``, ``"gap_at_most_log2e"`` and ``"split_bound_z=<z>"``.
    """

    greedy_entropy: float
    meet_entropy: float
    gap: float
    certificate: LowerBoundCertificate
    split_bounds: dict = field(default_factory=dict)
    checks: dict = field(default_factory=dict)
    trace: GreedyTrace | None = None
    meet: MeetResult | None = None

    @property
    def passed(self) -> bool:
        return all(self.checks.values())


def bound_report(
    S: Instance,
    zs: Sequence[int] = (2, 3, 5, 10),
    tol: Tolerances = DEFAULT_TOL,
    strict: bool = True,
) -> BoundReport:
    """Greedy entropy, meet entropy, their gap, and every bound that applies.

    The gap must lie in ``[0, log2(e)]``: any coupling is majorized by the
    meet, and the greedy coupling exceeds the meet by at most ``log2(e)``
    bits. The split-based bound for each ``z`` in ``zs`` must also hold.

    Raises:
        BoundViolation: with ``strict``, when an inequality above fails.
        CertificateViolation: with ``strict``, see :func:`lower_bound_certificate`.
    """
    trace = greedy_couple(S, tol)
    mr = meet(S)
    cert = lower_bound_certificate(trace, mr, tol, strict=strict)
    hg = entropy(trace.coupling)
    hm = entropy(mr.meet)
    gap = hg - hm
    checks = {
        "certificate": not cert.violations,
        "gap_nonnegative": gap >= -tol.compare,
        "gap_at_most_log2e": gap <= LOG2_E + tol.compare,
    }
    bounds = {}
    for z in zs:
        bounds[z] = split_entropy_bound(hm, z)
        checks[f"split_bound_z={z}"] = hg <= bounds[z] + tol.compare
    report = BoundReport(hg, hm, gap, cert, bounds, checks, trace, mr)
    if strict and not report.passed:
        failed = [k for k, ok in checks.items() if not ok]
        raise BoundViolation(f"failed {failed}: H(greedy)={hg!r}, H(meet)={hm!r}")
    return report

"""Batch verification over seeded random instances."""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

from .core import DEFAULT_TOL, Instance, NumericMode, Tolerances
from .errors import MECError
from .greedy import bound_report
from .oracle import compare_greedy_to_oracle, exact_mec
from .sampling import trial_instance
from .split import DEFAULT_TAIL, verify_split_strong_majorization

ORACLE_MAX_N = 4


@dataclass(frozen=True)
class TrialResult:
    trial: int
    m: int
    n: int
    gap: float
    checks: dict
    min_certificate_slack: float
    min_entropy_slack: float
    oracle_difference: Optional[float] = None
    errors: tuple[str, ...] = ()
    instance: Optional[list] = None

    @property
    def passed(self) -> bool:
        return all(self.checks.values()) and not self.errors


def check_instance(
    S: Instance,
    zs: Sequence[int] = (2, 3, 5, 10),
    tail: float = DEFAULT_TAIL,
    tol: Tolerances = DEFAULT_TOL,
    oracle: Optional[bool] = None,
    trial: int = 0,
) -> TrialResult:
    """Run every check on one instance and collect the outcomes.

    The oracle comparison runs by default only for two marginals with at
    most ``ORACLE_MAX_N`` states.
    """
    if oracle is None:
        oracle = S.m == 2 and S.n <= ORACLE_MAX_N
    errors = []
    rep = bound_report(S, zs, tol, strict=False)
    checks = dict(rep.checks)
    entropy_slack = math.inf
    for z in zs:
        sc = verify_split_strong_majorization(
            S, z, tail, tol, greedy_masses=rep.trace.masses, meet_dist=rep.meet.meet
        )
        checks[f"strong_majorization_z={z}"] = sc.strong.holds
        checks[f"entropy_ordering_z={z}"] = sc.entropy is not None and sc.entropy.holds
        if sc.entropy is not None:
            entropy_slack = min(entropy_slack, sc.entropy.slack)
    diff = None
    if oracle:
        try:
            cmp = compare_greedy_to_oracle(S, exact_mec(S), tol)
            diff = cmp.difference
            checks["oracle"] = True
        except MECError as exc:
            checks["oracle"] = False
            errors.append(f"oracle: {exc}")
    instance = None
    if not (all(checks.values()) and not errors):
        instance = [[str(x) for x in p.probs] for p in S]
    return TrialResult(
        trial,
        S.m,
        S.n,
        rep.gap,
        checks,
        rep.certificate.min_slack,
        entropy_slack,
        diff,
        tuple(errors),
        instance,
    )


@dataclass(frozen=True)
class VerificationSummary:
    trials: int
    max_gap: float
    max_gap_trial: Optional[int]
    max_oracle_difference: Optional[float]
    oracle_trials: int
    min_certificate_slack: float
    min_entropy_slack: float
    failures: tuple[TrialResult, ...] = field(default=())

    @property
    def passed(self) -> bool:
        return not self.failures

    @property
    def first_failure(self) -> Optional[TrialResult]:
        return min(self.failures, key=lambda r: r.trial, default=None)


def _one(args) -> TrialResult:
    seed, t, m, n, mode, zs, tail, tol = args
    S = trial_instance(seed, t, m, n, mode)
    return check_instance(S, zs, tail, tol, trial=t)


def summarize(results: Sequence[TrialResult]) -> VerificationSummary:
    max_gap, max_trial = -math.inf, None
    for r in results:
        if r.gap > max_gap:
            max_gap, max_trial = r.gap, r.trial
    diffs = [r.oracle_difference for r in results if r.oracle_difference is not None]
    return VerificationSummary(
        trials=len(results),
        max_gap=max_gap if results else 0.0,
        max_gap_trial=max_trial,
        max_oracle_difference=max(diffs) if diffs else None,
        oracle_trials=len(diffs),
        min_certificate_slack=min((r.min_certificate_slack for r in results), default=math.inf),
        min_entropy_slack=min((r.min_entropy_slack for r in results), default=math.inf),
        failures=tuple(sorted((r for r in results if not r.passed), key=lambda r: r.trial)),
    )


def run_verification(
    trials: int,
    m,
    n,
    seed: int = 0,
    zs: Sequence[int] = (2, 3, 5, 10),
    mode: NumericMode | str = NumericMode.FLOAT,
    tail: float = DEFAULT_TAIL,
    tol: Tolerances = DEFAULT_TOL,
    workers: int = 1,
) -> VerificationSummary:
    """Generate ``trials`` instances and run :func:`check_instance` on each.

    ``m`` and ``n`` are ints or inclusive ``(low, high)`` ranges. Results do
    not depend on ``workers``.
    """
    jobs = [(seed, t, m, n, NumericMode(mode), tuple(zs), tail, tol) for t in range(trials)]
    if workers > 1 and trials > 1:
        with ProcessPoolExecutor(workers) as pool:
            results = list(pool.map(_one, jobs, chunksize=max(1, trials // (4 * workers))))
    else:
        results = [_one(j) for j in jobs]
    return summarize(results)

import numpy as np

from greedymec.core import make_instance
from greedymec.sampling import random_instance, trial_instance, trial_rng
from greedymec.verify import TrialResult, check_instance, run_verification, summarize


def test_trial_instances_are_reproducible_and_independent():
    a = trial_instance(3, 17, 3, 5)
    b = trial_instance(3, 17, 3, 5)
    assert a == b
    assert trial_instance(3, 18, 3, 5) != a


def test_instances_are_sorted_and_normalized():
    S = random_instance(trial_rng(0, 0), 4, 6)
    for p in S:
        assert list(p.probs) == sorted(p.probs, reverse=True)
        assert abs(sum(p.probs) - 1) < 1e-12


def test_exact_mode_sums_exactly():
    S = trial_instance(1, 2, 3, 4, "exact")
    assert all(sum(p.probs) == 1 for p in S)


def test_ranges_are_sampled_per_trial():
    sizes = {(trial_instance(0, t, (2, 4), (2, 6)).m, trial_instance(0, t, (2, 4), (2, 6)).n) for t in range(60)}
    assert {m for m, _ in sizes} == {2, 3, 4}
    assert {n for _, n in sizes} == {2, 3, 4, 5, 6}


def test_generator_is_pcg64():
    assert isinstance(trial_rng(0, 0).bit_generator, np.random.PCG64)


def test_check_instance_runs_oracle_on_small_pairs():
    r = check_instance(make_instance([[0.6, 0.4], [0.5, 0.5]]))
    assert r.passed and r.oracle_difference == 0.0 and r.instance is None
    assert "oracle" in r.checks and "entropy_ordering_z=10" in r.checks


def test_check_instance_skips_oracle_for_large_supports():
    r = check_instance(trial_instance(0, 0, 2, 6))
    assert "oracle" not in r.checks and r.oracle_difference is None


def test_first_failure_is_lowest_trial():
    ok = TrialResult(0, 2, 2, 0.1, {"x": True}, 0.0, 0.0)
    bad5 = TrialResult(5, 2, 2, 0.1, {"x": False}, 0.0, 0.0)
    bad2 = TrialResult(2, 2, 2, 0.3, {"x": False}, 0.0, 0.0)
    s = summarize([ok, bad5, bad2])
    assert not s.passed and s.first_failure.trial == 2
    assert s.max_gap == 0.3 and s.max_gap_trial == 2


def test_run_verification_summary():
    s = run_verification(40, (2, 4), (2, 6), seed=9)
    assert s.passed and s.trials == 40
    assert 0 <= s.max_gap <= 1.4426950408889634
    assert s.min_certificate_slack >= -1e-9 and s.min_entropy_slack >= -1e-9

import math
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st
from mpmath import mp, mpf
from mpmath import log as mlog

from greedymec.core import (
    Coupling,
    Distribution,
    NumericMode,
    entropy,
    make_distribution,
    make_instance,
    prefix_sum,
    rationalize,
    to_exact,
    to_number,
)
from greedymec.errors import (
    AssertionFailure,
    IndexOutOfRange,
    InputError,
    NegativeMass,
    NotNormalized,
)

from conftest import exact_distributions, float_distributions


def mp_entropy(values):
    mp.dps = 50
    xs = [mpf(x.numerator) / x.denominator for x in map(Fraction, values) if x > 0]
    return float(-sum(x * mlog(x, 2) for x in xs))


class TestEntropy:
    def test_point_mass_is_zero(self):
        assert entropy(make_distribution([1.0])) == 0.0

    def test_fair_coin(self):
        assert entropy(make_distribution([0.5, 0.5])) == pytest.approx(1.0, abs=1e-15)

    def test_three_states_against_high_precision(self):
        # 1.360964047443681... from 50-digit evaluation
        d = make_distribution([0.5, 0.4, 0.1])
        assert entropy(d) == pytest.approx(1.360964047443681, abs=1e-14)
        assert entropy(d) == pytest.approx(mp_entropy([Fraction(1, 2), Fraction(2, 5), Fraction(1, 10)]), abs=1e-14)

    def test_accepts_sequences_and_couplings(self):
        S = make_instance([[0.5, 0.5]])
        c = Coupling((((0,), 0.5), ((1,), 0.5)), S)
        assert entropy(c) == entropy([0.5, 0.5]) == 1.0

    def test_zero_masses_contribute_nothing(self):
        assert entropy([0.5, 0.5, 0.0, 0.0]) == entropy([0.5, 0.5])

    @given(exact_distributions())
    def test_matches_high_precision(self, d):
        assert entropy(d) == pytest.approx(mp_entropy(d.probs), abs=1e-12)

    @given(float_distributions(), st.randoms(use_true_random=False))
    def test_permutation_invariant(self, d, rnd):
        xs = list(d.probs)
        rnd.shuffle(xs)
        assert entropy(xs) == pytest.approx(entropy(d), abs=1e-12)

    @given(float_distributions())
    def test_bounded_by_log_support(self, d):
        h = entropy(d)
        assert -1e-12 <= h <= math.log2(len(d)) + 1e-12


class TestMakeDistribution:
    def test_sorts(self):
        assert make_distribution([0.4, 0.6]).probs == (0.6, 0.4)

    def test_rejects_unnormalized(self):
        with pytest.raises(NotNormalized):
            make_distribution([0.5, 0.5, 0.1])

    def test_renormalize(self):
        assert make_distribution([1, 1], renormalize=True).probs == (0.5, 0.5)

    def test_rejects_negative(self):
        with pytest.raises(NegativeMass):
            make_distribution([1.2, -0.2])

    def test_rejects_nan(self):
        with pytest.raises(NegativeMass):
            make_distribution([float("nan"), 1.0])

    def test_clips_round_off_negatives(self):
        d = make_distribution([1.0, -1e-12])
        assert d.probs == (1.0, 0.0)

    def test_empty(self):
        with pytest.raises(InputError):
            make_distribution([])

    def test_rational_strings_force_exact(self):
        d = make_distribution(["1/3", "2/3"])
        assert d.mode is NumericMode.EXACT
        assert d.probs == (Fraction(2, 3), Fraction(1, 3))

    def test_exact_mode_is_strict(self):
        with pytest.raises(NotNormalized):
            make_distribution([Fraction(1, 3), Fraction(1, 3)], "exact")

    def test_float_to_exact_uses_shortest_repr(self):
        assert to_number(0.6, NumericMode.EXACT) == Fraction(3, 5)

    def test_constructor_validates_order(self):
        with pytest.raises(InputError):
            Distribution((0.4, 0.6))


class TestPrefixSum:
    @pytest.mark.parametrize(
        "probs,i,want", [((0.6, 0.4), 1, 0.6), ((0.6, 0.4), 0, 0.0), ((0.5, 0.4, 0.1), 2, 0.9)]
    )
    def test_values(self, probs, i, want):
        assert prefix_sum(make_distribution(probs), i) == pytest.approx(want, abs=1e-15)

    @pytest.mark.parametrize("i", [-1, 3])
    def test_out_of_range(self, i):
        with pytest.raises(IndexOutOfRange):
            prefix_sum(make_distribution([0.6, 0.4]), i)


class TestInstance:
    def test_pads_to_common_support(self):
        S = make_instance([[1.0], [0.5, 0.5]])
        assert S.n == 2 and S.marginals[0].probs == (1.0, 0.0)

    def test_rationalize_sums_to_one(self):
        xs = rationalize([0.7, 0.2, 0.1])
        assert sum(xs) == 1
        assert xs == (Fraction(7, 10), Fraction(1, 5), Fraction(1, 10))

    @given(float_distributions())
    def test_rationalize_close_and_sorted(self, d):
        xs = rationalize(d.probs)
        assert sum(xs) == 1
        assert list(xs) == sorted(xs, reverse=True)
        assert max(abs(float(a) - b) for a, b in zip(xs, d.probs)) < 1e-9

    def test_to_exact_round_trip(self):
        S = make_instance([[0.6, 0.4], [0.5, 0.5]])
        E = to_exact(S)
        assert E.exact
        assert E.marginals[0].probs == (Fraction(3, 5), Fraction(2, 5))
        assert to_exact(E) is E


class TestCoupling:
    def test_validate_detects_broken_marginal(self):
        S = make_instance([["1/2", "1/2"], ["1/2", "1/2"]])
        bad = Coupling((((0, 0), Fraction(1, 2)), ((1, 0), Fraction(1, 2))), S)
        with pytest.raises(AssertionFailure):
            bad.validate()
        assert bad.conservation_error() == Fraction(1, 2)

    def test_validate_accepts_product(self):
        S = make_instance([["1/2", "1/2"], ["1/2", "1/2"]])
        q = Fraction(1, 4)
        c = Coupling(tuple(((i, j), q) for i in range(2) for j in range(2)), S)
        c.validate()
        assert c.marginal(1) == (Fraction(1, 2), Fraction(1, 2))
        assert entropy(c) == 2.0

import heapq
import math
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from greedymec.core import entropy, make_distribution, make_instance
from greedymec.errors import DomainError
from greedymec.greedy import LOG2_E
from greedymec.split import (
    geom_entropy,
    split,
    split_entropy_bound,
    verify_split_strong_majorization,
)

from conftest import exact_instances, float_distributions, float_instances


def series_geom_entropy(gamma, tail=1e-15):
    """Partial sum of -P(k) log2 P(k) until the remaining mass is below ``tail``."""
    terms, k = [], 1
    while (1 - gamma) ** (k - 1) > tail:
        pk = gamma * (1 - gamma) ** (k - 1)
        terms.append(-pk * math.log2(pk))
        k += 1
    return math.fsum(terms)


def frontier_split(M, gamma, tail):
    """Reference split: a priority queue that pops the largest pending entry.

    Uses exact rationals, so ties are ordered by (source, k) with no round-off.
    """
    heap = [(-m * gamma, l, 1) for l, m in enumerate(M) if m > 0]
    heapq.heapify(heap)
    out, left = [], sum(M)
    while left > tail:
        neg, l, k = heapq.heappop(heap)
        out.append((-neg, l, k))
        left += neg
        heapq.heappush(heap, (neg * (1 - gamma), l, k + 1))
    return out


class TestGeomEntropy:
    def test_half(self):
        assert geom_entropy(0.5) == pytest.approx(2.0, abs=1e-15)

    def test_tenth(self):
        # 4.689955935892812... from 40-digit series summation
        assert geom_entropy(0.1) == pytest.approx(4.689955935892812, abs=1e-12)
        assert geom_entropy(0.1) == pytest.approx(math.log2(9) + 10 * math.log2(10 / 9), abs=1e-12)

    def test_near_deterministic(self):
        assert 0 < geom_entropy(0.999999) < 1e-4

    @pytest.mark.parametrize("gamma", [0.5, 1 / 3, 0.1, 0.01, 0.9])
    def test_matches_series(self, gamma):
        assert geom_entropy(gamma) == pytest.approx(series_geom_entropy(gamma), abs=1e-10)

    @pytest.mark.parametrize("gamma", [0.0, 1.0, -0.5, 2.0])
    def test_domain(self, gamma):
        with pytest.raises(DomainError):
            geom_entropy(gamma)

    def test_small_gamma_is_stable(self):
        # H = -log2 g + (1-g)/g * (-log2(1-g)) ~ -log2 g + log2 e for tiny g
        g = 1e-9
        assert geom_entropy(g) == pytest.approx(-math.log2(g) + LOG2_E, abs=1e-6)


class TestSplitEntropyBound:
    def test_z2_adds_two_bits(self):
        assert split_entropy_bound(1.0, 2) == pytest.approx(3.0, abs=1e-15)

    def test_z10(self):
        assert split_entropy_bound(0.0, 10) == pytest.approx(1.520030934450500, abs=1e-12)

    @given(st.integers(2, 10**6), st.floats(0, 20))
    def test_closed_form(self, z, h):
        assert split_entropy_bound(h, z) == pytest.approx(h + z * math.log2(z / (z - 1)), abs=1e-9)

    def test_decreases_to_log2e(self):
        values = [split_entropy_bound(0.0, z) for z in (2, 3, 5, 10, 100, 10**4, 10**6)]
        assert all(a > b for a, b in zip(values, values[1:]))
        assert values[-1] - LOG2_E == pytest.approx(0, abs=1e-6)
        assert values[-1] > LOG2_E

    def test_domain(self):
        with pytest.raises(DomainError):
            split_entropy_bound(1.0, 1)


class TestSplit:
    def test_point_mass_gives_geometric(self):
        sp = split(make_distribution([1.0]), 0.5, 1 / 16)
        assert sp.masses == (0.5, 0.25, 0.125, 0.0625)
        assert sp.tail_bound == 0.0625

    def test_coin(self):
        sp = split(make_distribution([0.5, 0.5]), 0.5, 1 / 8)
        assert sp.masses == (0.25, 0.25, 0.125, 0.125, 0.0625, 0.0625)
        assert [(e.source, e.geom_index) for e in sp.entries[:3]] == [(0, 1), (1, 1), (0, 2)]

    def test_skewed_pair(self):
        sp = split(make_distribution([0.6, 0.4]), 0.5, 0.05)
        want = [0.3, 0.2, 0.15, 0.1, 0.075, 0.05, 0.0375, 0.025, 0.01875]
        assert sp.masses == pytest.approx(want, abs=1e-15)
        assert sp.tail_bound <= 0.05

    def test_masses_plus_tail_is_one(self):
        sp = split(make_distribution([0.5, 0.3, 0.2]), 0.1, 1e-12)
        assert math.fsum(sp.masses) + sp.tail_bound == pytest.approx(1.0, abs=1e-12)
        assert sp.tail_bound <= 1e-12

    @given(
        st.lists(st.integers(1, 9), min_size=1, max_size=4),
        st.sampled_from([Fraction(1, 2), Fraction(1, 3), Fraction(1, 5)]),
        st.sampled_from([Fraction(1, 10), Fraction(1, 100), Fraction(1, 1000)]),
    )
    def test_matches_frontier_queue(self, weights, gamma, tail):
        total = sum(weights)
        M = sorted((Fraction(w, total) for w in weights), reverse=True)
        ref = frontier_split(M, gamma, tail)
        sp = split(make_distribution(M, "exact"), float(gamma), float(tail))
        assert len(sp) == len(ref)
        for e, (mass, _, _) in zip(sp.entries, ref):
            assert e.mass == pytest.approx(float(mass), rel=1e-12)
        # exact ties between sources are ordered identically; float ties may differ in
        # the last ulp, so only compare the (source, k) labels on strictly separated masses
        masses = [float(m) for m, _, _ in ref]
        for i, (e, (_, l, k)) in enumerate(zip(sp.entries, ref)):
            alone = all(abs(masses[i] - masses[t]) > 1e-12 * masses[i] for t in range(len(ref)) if t != i)
            if alone:
                assert (e.source, e.geom_index) == (l, k)

    @given(float_distributions(max_n=5), st.sampled_from([0.5, 1 / 3, 0.2, 0.1]))
    def test_sorted_and_entropy_limit(self, d, gamma):
        sp = split(d, gamma, 1e-12)
        ms = sp.masses
        assert all(a >= b for a, b in zip(ms, ms[1:]))
        # entropy of the product of d with Geom(gamma) is additive
        assert entropy(ms) == pytest.approx(entropy(d) + geom_entropy(gamma), abs=1e-8)

    def test_domain(self):
        d = make_distribution([1.0])
        for gamma, tail in [(0.0, 0.1), (1.0, 0.1), (0.5, 0.0), (0.5, 1.0)]:
            with pytest.raises(DomainError):
                split(d, gamma, tail)


class TestVerifySplit:
    def test_single_coin(self):
        chk = verify_split_strong_majorization(make_instance([[0.5, 0.5]]), 2)
        assert chk.holds
        assert chk.entropy.slack == pytest.approx(2.0, abs=1e-9)

    @pytest.mark.parametrize("z", [2, 3, 5])
    def test_hand_example(self, z):
        chk = verify_split_strong_majorization(make_instance([[0.6, 0.4], [0.5, 0.5]]), z)
        assert chk.holds
        assert chk.tail_bound <= 1e-12

    def test_domain(self):
        with pytest.raises(DomainError):
            verify_split_strong_majorization(make_instance([[1.0]]), 1)

    @given(float_instances(max_n=5), st.sampled_from([2, 3, 5]))
    def test_random_float(self, S, z):
        chk = verify_split_strong_majorization(S, z)
        assert chk.holds
        assert chk.entropy.slack >= -1e-9

    @given(exact_instances(max_n=4), st.sampled_from([2, 3, 5, 10]))
    def test_random_exact(self, S, z):
        assert verify_split_strong_majorization(S, z).holds

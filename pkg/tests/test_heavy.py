import math
import random

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from volbench.errors import DomainError
from volbench.heavy import THRESHOLD, evaluate_pass, heavy_set, hop_estimate
from volbench.sim import ShotCounts


def median_by_order_statistics(values):
    s = sorted(values)
    m = len(s)
    return s[m // 2] if m % 2 else (s[m // 2 - 1] + s[m // 2]) / 2


def test_two_element_median():
    hs = heavy_set([0.9, 0.1])
    assert hs.median == 0.5
    assert hs.members == {"0"}
    assert hs.ideal_heavy_mass == 0.9


def test_uniform_distribution_has_no_heavy_outputs():
    hs = heavy_set([0.125] * 8)
    assert hs.members == frozenset()
    assert hs.ideal_heavy_mass == 0


def test_four_outcome_example():
    probs = [0.4, 0.3, 0.2, 0.1]
    hs = heavy_set(probs)
    assert hs.median == pytest.approx(median_by_order_statistics(probs), abs=1e-15)
    assert hs.median == pytest.approx(0.25)
    assert hs.members == {"00", "01"}
    assert hs.ideal_heavy_mass == pytest.approx(0.7)


def test_rejects_unnormalized_input():
    with pytest.raises(DomainError):
        heavy_set([0.5, 0.6])


@settings(max_examples=200, deadline=None)
@given(st.integers(1, 6), st.integers(0, 2**32 - 1))
def test_heavy_set_properties(n, seed):
    rng = np.random.default_rng(seed)
    probs = rng.exponential(size=2**n)
    probs /= probs.sum()
    hs = heavy_set(probs)
    assert hs.median == pytest.approx(median_by_order_statistics(list(probs)), rel=1e-12)
    for bits in hs.members:
        assert probs[int(bits, 2)] > hs.median
    # a uniform sampler lands in the heavy set at most half the time
    assert len(hs.members) / 2**n <= 0.5
    assert 0 <= hs.ideal_heavy_mass <= 1


def test_hop_estimates():
    hs = heavy_set([0.4, 0.3, 0.2, 0.1])
    assert hop_estimate(ShotCounts(2, {"00": 10}), hs) == 1.0
    assert hop_estimate(ShotCounts(2, {"10": 7, "11": 3}), hs) == 0.0
    assert hop_estimate(ShotCounts(2, {"00": 350, "01": 250, "10": 400}), hs) == 0.6


@settings(max_examples=50, deadline=None)
@given(st.dictionaries(st.sampled_from(["00", "01", "10", "11"]), st.integers(1, 50), min_size=1), st.randoms())
def test_hop_ignores_count_order(counts, rnd):
    hs = heavy_set([0.4, 0.3, 0.2, 0.1])
    items = list(counts.items())
    rnd.shuffle(items)
    assert hop_estimate(ShotCounts(2, dict(items)), hs) == hop_estimate(ShotCounts(2, counts), hs)


def test_all_heavy_passes():
    r = evaluate_pass([1.0] * 100, 1000)
    assert r.passed and r.ci_low == 1.0


def test_half_heavy_fails():
    r = evaluate_pass([0.5] * 100, 1000)
    assert not r.passed


def test_confidence_bound_arithmetic():
    r = evaluate_pass([0.70] * 100, 1000)
    expected = 0.70 - 2 * math.sqrt(0.70 * 0.30 / 100_000)
    assert r.ci_low == pytest.approx(expected, abs=1e-12)
    assert r.ci_low == pytest.approx(0.6971, abs=1e-4)
    assert r.passed
    assert r.threshold == THRESHOLD


def test_degenerate_interval_never_passes():
    r = evaluate_pass([1.0, 1.0], 3)
    assert r.degenerate and not r.passed


def test_needs_two_circuits():
    with pytest.raises(DomainError):
        evaluate_pass([0.9], 100)


@settings(max_examples=200, deadline=None)
@given(st.lists(st.floats(0, 1), min_size=2, max_size=30), st.integers(1, 2000))
def test_result_invariants(hops, shots):
    r = evaluate_pass(hops, shots)
    assert 0 <= r.ci_low <= r.pooled_hop <= 1
    assert r.passed == (r.ci_low > THRESHOLD) or r.degenerate

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from levyzoom.distributions import (
    EmpiricalDistribution, EmptySample, chi3_cdf, ks_distance, uniform_cdf, wasserstein1,
)

samples = st.lists(st.floats(-50, 50, allow_nan=False, allow_infinity=False), min_size=1, max_size=30)


def brute_ks(a, b):
    # enumerate ECDF gaps at every step point of either sample
    a, b = np.asarray(a, float), np.asarray(b, float)
    pts = np.concatenate([a, b])
    return max(abs(np.mean(a <= p) - np.mean(b <= p)) for p in pts)


def test_hand_cases():
    assert ks_distance([0.25, 0.75], uniform_cdf) == pytest.approx(0.25)
    assert ks_distance([0.1, 0.5, 0.9], [0.2, 0.6]) == pytest.approx(1 / 3)
    assert wasserstein1([0, 1], [0, 0]) == pytest.approx(0.5)


def test_identical_is_zero():
    x = np.random.default_rng(0).normal(size=50)
    assert ks_distance(x, x) == 0
    assert wasserstein1(x, x) == 0


def test_empty_rejected():
    with pytest.raises(EmptySample):
        EmpiricalDistribution([])
    with pytest.raises(EmptySample):
        ks_distance([], uniform_cdf)


def test_empirical_basics():
    d = EmpiricalDistribution([3.0, 1.0, 2.0], weights=[1, 1, 2])
    assert list(d.samples) == [1.0, 2.0, 3.0]
    assert d.probs.sum() == pytest.approx(1.0)
    assert d.mean() == pytest.approx((1 + 2 * 2 + 3) / 4)
    assert d.cdf(2.0) == pytest.approx(0.75)
    assert d.quantile(0.5) == 2.0


def test_weighted_ks_matches_repeated_sample():
    a = EmpiricalDistribution([0.2, 0.7], weights=[3, 1])
    rep = [0.2, 0.2, 0.2, 0.7]
    assert ks_distance(a, uniform_cdf) == pytest.approx(ks_distance(rep, uniform_cdf))
    assert ks_distance(a, [0.5]) == pytest.approx(ks_distance(rep, [0.5]))


def test_chi3_reference_matches_gaussian_norms():
    z = np.linalg.norm(np.random.default_rng(1).normal(size=(20000, 3)), axis=1)
    assert ks_distance(z, chi3_cdf) < 0.015


@given(samples, samples)
def test_ks_matches_brute_force(a, b):
    assert ks_distance(a, b) == pytest.approx(brute_ks(a, b), abs=1e-12)


@given(samples, samples, samples)
def test_ks_range_and_triangle(a, b, c):
    dab, dbc, dac = ks_distance(a, b), ks_distance(b, c), ks_distance(a, c)
    assert 0 <= dab <= 1
    assert dac <= dab + dbc + 2 / min(len(a), len(b), len(c))


@settings(max_examples=50)
@given(st.lists(st.floats(-10, 10), min_size=1, max_size=20).flatmap(
    lambda x: st.tuples(st.just(x), st.lists(st.floats(-10, 10), min_size=len(x), max_size=len(x)))),
    st.floats(-5, 5), st.floats(0.1, 10))
def test_w1_translation_and_scale(pair, c, s):
    x, y = map(np.asarray, pair)
    base = wasserstein1(x, y)
    assert wasserstein1(x + c, x) == pytest.approx(abs(c), abs=1e-9)
    assert wasserstein1(s * x, s * y) == pytest.approx(s * base, rel=1e-9, abs=1e-9)
    # equal sizes: mean absolute difference of sorted samples
    assert base == pytest.approx(np.mean(np.abs(np.sort(x) - np.sort(y))), abs=1e-9)

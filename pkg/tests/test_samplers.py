import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import stats

from levyzoom.attraction import Brownian, LinearDrift, StrictlyStable
from levyzoom.distributions import chi3_cdf, ks_distance, uniform_cdf
from levyzoom.model import (
    CompoundPoisson, DiracLaw, LevyModel, NoExactSampler, NormalLaw, StableTails, char_exponent,
)
from levyzoom.fixtures import fixture
from levyzoom.samplers import (
    AlignmentError, ENGINES, GridPath, OutOfRange, RngStream, _bridge_max, brownian_engine,
    engine_for, finite_activity_engine, grid_engine, sample_bessel3,
    sample_increment, sample_limit_pair, sample_limit_pairs, simulate_grid_path, supremum_stats,
    zoom_window,
)

# E[-V] for the Brownian limit: -zeta(1/2)/sqrt(2 pi), independent of any sampler here
AGP_CONSTANT = float(-mpmath.zeta(0.5) / mpmath.sqrt(2 * mpmath.pi))


def gen(i=0, label="t"):
    return RngStream(1234, i, label).generator()


def test_streams_reproducible_and_distinct():
    a = RngStream(7, 3, "x").generator().random(5)
    assert np.array_equal(a, RngStream(7, 3, "x").generator().random(5))
    assert not np.array_equal(a, RngStream(7, 4, "x").generator().random(5))
    assert not np.array_equal(a, RngStream(7, 3, "y").generator().random(5))
    with pytest.raises(ValueError):
        RngStream(-1)


def test_increment_examples():
    g = gen()
    x = LevyModel(0.0, 1.0).sample_increments(0.01, g, 100_000)
    assert abs(x.mean()) < 3 * 0.1 / math.sqrt(1e5)
    y = LevyModel(0.0, 0.0, CompoundPoisson(2.0, DiracLaw(1.0))).sample_increments(0.5, g, 100_000)
    assert np.mean(y == 0) == pytest.approx(math.exp(-1), abs=0.01)
    assert isinstance(sample_increment(LevyModel(0.0, 1.0), 0.1, RngStream(1)), float)


def test_stable_tail_asymptotics():
    m = LevyModel.from_natural_drift(0.0, 0.0, StableTails(1.0, 0.0, 0.5))
    x = m.sample_increments(1.0, gen(), 1_000_000)
    for t in (1e2, 1e3, 1e4):
        assert t ** 0.5 * np.mean(x > t) == pytest.approx(2.0, rel=0.15)


@pytest.mark.parametrize("alpha", [0.5, 1.0, 1.5])
def test_stable_ecf_within_three_se(alpha):
    m = LevyModel(0.0, 0.0, StableTails(1.0, 0.5, alpha))
    n = 100_000
    x = m.sample_increments(1.0, gen(int(alpha * 10)), n)
    for u in (0.5, 1.0, 2.0):
        z = np.exp(1j * u * x)
        target = np.exp(char_exponent(m, u))
        se = math.sqrt(max(np.var(z.real), 1e-12) / n) + math.sqrt(max(np.var(z.imag), 1e-12) / n)
        assert abs(z.mean() - target) < 3 * se


def test_grid_path_examples():
    p = simulate_grid_path(fixture("brownian"), 1.0, 1 / 1024, gen())
    assert len(p.values) == 1025 and p.values[0] == 0.0
    d = LevyModel.from_natural_drift(1.0, 0.0, CompoundPoisson(1e-300, NormalLaw(0, 1)))
    q = simulate_grid_path(d, 1.0, 1 / 1024, gen())
    assert np.allclose(q.values, np.arange(1025) / 1024, rtol=0, atol=1e-12)
    r1 = simulate_grid_path(fixture("stable_1.5"), 1.0, 1 / 256, RngStream(5, 2))
    r2 = simulate_grid_path(fixture("stable_1.5"), 1.0, 1 / 256, RngStream(5, 2))
    assert np.array_equal(r1.values, r2.values)
    with pytest.raises(NoExactSampler):
        simulate_grid_path(fixture("log_cauchy"), 1.0, 0.5, gen())


def test_supremum_stats_hand_case():
    p = GridPath(1.0, np.array([0.0, 1.0, -1.0, 0.5]))
    s = supremum_stats(p, 2.0)
    assert (s.M, s.tau, s.M_eps, s.tau_eps, s.delta) == (1.0, 1.0, 0.0, 0.0, 1.0)
    assert supremum_stats(p, 1.0).delta == 0.0
    with pytest.raises(AlignmentError):
        supremum_stats(p, 1.5)


def test_supremum_stats_increasing_path():
    p = GridPath(0.25, np.cumsum(np.r_[0.0, np.arange(1, 11)]))
    s = supremum_stats(p, 1.0)
    assert s.tau == p.T and s.delta == pytest.approx(p.values[-1] - p.values[8])


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000))
def test_delta_nonnegative_and_nested(seed):
    p = simulate_grid_path(fixture("stable_1.5"), 1.0, 1 / 256, RngStream(seed))
    d = [supremum_stats(p, e).delta for e in (1 / 8, 1 / 16, 1 / 32, 1 / 64)]
    assert all(x >= 0 for x in d)
    assert all(b <= a for a, b in zip(d, d[1:]))


def test_bridge_max_inverts_crossing_probability():
    # P(max > m | ends l, r) = exp(-2 (m - l)(m - r) / var)
    l, r, var = np.array([0.0, 1.0, -0.5]), np.array([0.3, 0.2, -0.5]), 0.7
    u = np.array([0.2, 0.9, 0.5])
    m = _bridge_max(l, r, var, u)
    assert np.allclose(np.exp(-2 * (m - l) * (m - r) / var), u)
    assert np.all(m >= np.maximum(l, r))


def test_bridge_refined_supremum_matches_fine_grid():
    # bridge maxima on a coarse grid vs a much finer plain grid
    mod = fixture("brownian")
    coarse = [ENGINES["grid"](mod, 1.0, [1 / 64], 0, True, RngStream(9, i).generator())[0]
              for i in range(3000)]
    fine = [ENGINES["grid"](mod, 1.0, [1 / 64], 8, False, RngStream(9, i + 10**6).generator())[0]
            for i in range(3000)]
    # exact law: M ~ |N(0, 1)|
    assert ks_distance(coarse, lambda x: 2 * stats.norm.cdf(x) - 1) < 0.03
    assert np.mean(coarse) - np.mean(fine) == pytest.approx(0.5826 * math.sqrt(1 / 16384), abs=0.03)


def test_engine_selection():
    assert engine_for(fixture("brownian")) == "brownian"
    assert engine_for(fixture("drift_with_cpp")) == "finite"
    assert engine_for(fixture("stable_1.5")) == "grid"
    assert engine_for(fixture("brownian"), "grid") == "grid"


def spitzer_mean(n, h):
    # E max_{k<=n} S_k for Gaussian steps N(0, h): sum_k E[S_k^+] / k
    k = np.arange(1, n + 1)
    return float(np.sum(np.sqrt(k * h / (2 * math.pi)) / k))


def test_brownian_engine_discrete_max_matches_spitzer():
    eps = [2.0 ** -10, 2.0 ** -6]
    out = [brownian_engine(fixture("brownian"), 1.0, eps, 3, True, RngStream(3, i).generator())
           for i in range(4000)]
    me = np.array([o[2] for o in out])
    for j, e in enumerate(eps):
        n = int(1 / e)
        se = me[:, j].std() / math.sqrt(len(me))
        assert abs(me[:, j].mean() - spitzer_mean(n, e)) < 4 * se


def test_brownian_engine_agrees_with_grid_engine():
    mod = fixture("brownian")
    a = [brownian_engine(mod, 1.0, [2.0 ** -8], 5, True, RngStream(1, i).generator()) for i in range(3000)]
    b = [grid_engine(mod, 1.0, [2.0 ** -8], 5, True, RngStream(2, i).generator()) for i in range(3000)]
    da = [(x[0] - x[2][0]) * 16 for x in a]
    db = [(x[0] - x[2][0]) * 16 for x in b]
    assert stats.ks_2samp(da, db).pvalue > 1e-3


def test_finite_engine_exact_cases():
    # no jumps in practice: pure drift path
    up = LevyModel.from_natural_drift(1.0, 0.0, CompoundPoisson(1e-300, NormalLaw(0, 1)))
    M, tau, me, te = finite_activity_engine(up, 1.0, [0.25, 0.1], 0, False, gen())
    assert (M, tau) == (1.0, 1.0) and np.allclose(me, 1.0) and np.allclose(te, 1.0)
    down = LevyModel.from_natural_drift(-1.0, 0.0, CompoundPoisson(1e-300, NormalLaw(0, 1)))
    M, tau, me, te = finite_activity_engine(down, 1.0, [0.25], 0, False, gen())
    assert (M, tau, me[0], te[0]) == (0.0, 0.0, 0.0, 0.0)


def test_finite_engine_matches_grid_engine():
    mod = fixture("drift_with_cpp")
    a = [finite_activity_engine(mod, 1.0, [2.0 ** -4], 6, False, RngStream(4, i).generator())
         for i in range(3000)]
    b = [grid_engine(mod, 1.0, [2.0 ** -4], 10, False, RngStream(5, i).generator()) for i in range(3000)]
    assert stats.ks_2samp([x[0] for x in a], [x[0] for x in b]).pvalue > 1e-3
    assert stats.ks_2samp([x[2][0] for x in a], [x[2][0] for x in b]).pvalue > 1e-3


def test_refinement_equal_to_eps_gives_zero_error():
    for i in range(20):
        M, tau, me, te = grid_engine(fixture("stable_1.5"), 1.0, [1 / 128], 0, False, RngStream(8, i).generator())
        assert M == me[0] and tau == te[0]


def test_bessel3_examples():
    r = sample_bessel3([0.0, 1.0, 4.0], gen(), size=100_000)
    assert np.all(r[:, 0] == 0)
    assert r[:, 1].mean() == pytest.approx(2 * math.sqrt(2 / math.pi), abs=0.01)
    assert ks_distance(r[:, 1], chi3_cdf) < 0.01
    r4 = sample_bessel3([4.0], gen(1), size=100_000)[:, 0]
    assert ks_distance(r4, 2 * r[:, 1]) < 0.01
    with pytest.raises(ValueError):
        sample_bessel3([1.0, 0.5], gen())


def test_drift_limit_pairs():
    s = sample_limit_pairs(LinearDrift(-1.0), 100_000, rng=gen())
    assert np.mean(-s.v) == pytest.approx(0.5, abs=0.005)
    assert ks_distance(-s.v, uniform_cdf) < 0.01
    up = sample_limit_pairs(LinearDrift(2.0), 1000, rng=gen())
    assert np.all(up.w < 0) and np.allclose(up.v, 2.0 * up.w)
    for smp in (s, up):
        assert np.allclose(smp.w - np.floor(smp.w), smp.u)
        assert np.all(smp.v <= 0)


def test_monotone_stable_reduced_pair():
    att = StrictlyStable(0.5, 0.0, 1.0)
    s = sample_limit_pairs(att, 2000, rng=gen())
    assert s.method == "reduced" and np.allclose(s.w, s.u) and np.all(s.v <= 0)
    inc = sample_limit_pairs(StrictlyStable(0.5, 1.0, 0.0), 2000, rng=gen())
    assert np.all(inc.v <= 0) and np.allclose(inc.w - np.floor(inc.w), inc.u)


def test_brownian_limit_pairs():
    s20 = sample_limit_pairs(Brownian(1.0), 100_000, 20, gen(1))
    s40 = sample_limit_pairs(Brownian(1.0), 100_000, 40, gen(2))
    assert ks_distance(-s20.v, -s40.v) < 0.02
    assert ks_distance(s20.w - np.floor(s20.w), uniform_cdf) < 0.01
    assert np.allclose(s20.w - np.floor(s20.w), s20.u)
    assert np.mean(-s20.v) == pytest.approx(AGP_CONSTANT, rel=0.01)
    s10k = sample_limit_pairs(Brownian(1.0), 10_000, 20, gen(3))
    assert np.mean(-s10k.v) == pytest.approx(np.mean(-s20.v), rel=0.015)
    p = sample_limit_pair(Brownian(2.0), 20, gen(4))
    assert p.v <= 0 and p.w - math.floor(p.w) == pytest.approx(p.u)


def test_brownian_limit_matches_fine_grid_discretization():
    eps, k = 2.0 ** -14, 6
    d = [brownian_engine(fixture("brownian"), 1.0, [eps], k, True, RngStream(21, i).generator())
         for i in range(5000)]
    tau = np.array([x[1] for x in d])
    keep = (tau > 2 * eps) & (tau < 1 - 2 * eps)
    err = np.array([(x[0] - x[2][0]) / math.sqrt(eps) for x in d])[keep]
    assert err.mean() == pytest.approx(AGP_CONSTANT, rel=0.03)


def test_stable_bootstrap_smoke():
    s = sample_limit_pairs(StrictlyStable(1.5, 1.0, 1.0), 4, rng=gen())
    assert s.method == "bootstrap" and np.all(s.v <= 0)
    assert np.allclose(s.w - np.floor(s.w), s.u)


def test_limit_pair_rejects_non_limits():
    from levyzoom.attraction import NoAttractor
    with pytest.raises(ValueError):
        sample_limit_pairs(NoAttractor("x"), 3, rng=gen())


def test_zoom_window():
    p = simulate_grid_path(fixture("brownian"), 1.0, 2.0 ** -12, gen())
    s = supremum_stats(p, 2.0 ** -6)
    w = zoom_window(p, s, 2.0 ** -3, [0.0])
    assert w[0] == 0.0
    inc = GridPath(0.25, np.cumsum(np.r_[0.0, np.ones(8)]))
    si = supremum_stats(inc, 0.5)
    assert np.all(zoom_window(inc, si, 1.0, [-1.0, -2.0]) < 0)
    with pytest.raises(OutOfRange):
        zoom_window(inc, si, 1.0, [1.0])

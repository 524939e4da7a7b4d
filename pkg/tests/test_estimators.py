import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from phasegraph.estimators import (
    concentration_check, discrete_power_mle, fit_geometric_ratio, fit_power_tail,
    increment_limits_check, ks_distance, moment_bound_check, normalize, summarize,
)
from phasegraph.params import ModelParams
from phasegraph.process import run_process

ONE = ModelParams()


@pytest.mark.parametrize("beta", [2.2, 3.0, 5.0])
def test_power_fit_recovers_exact_law(beta):
    k = np.arange(200, dtype=float)
    f = np.zeros(200)
    f[1:] = k[1:] ** -beta
    fit = fit_power_tail(f, (5, 50))
    assert fit.value == pytest.approx(beta, abs=1e-6)
    assert fit.n_classes == 46


@pytest.mark.parametrize("r", [0.5, 0.75, 0.2])
def test_geometric_fit_recovers_exact_ratio(r):
    f = r ** np.arange(40, dtype=float)
    assert fit_geometric_ratio(f, (5, 16)).value == pytest.approx(r, abs=1e-6)


def test_fits_need_ten_positive_classes():
    f = np.zeros(60)
    f[5:14] = 1.0
    with pytest.raises(ValueError, match="10 classes"):
        fit_power_tail(f, (5, 50))
    with pytest.raises(ValueError):
        fit_geometric_ratio(f, (5, 16))
    with pytest.raises(ValueError):
        fit_power_tail(np.ones(60), (0, 50))


def test_discrete_mle_on_sampled_power_law():
    from scipy import special
    rng = np.random.default_rng(1)
    beta, kmin = 2.5, 5
    k = np.arange(kmin, 200_000)
    p = k ** -beta / special.zeta(beta, kmin)
    draws = rng.choice(k, size=100_000, p=p / p.sum())
    counts = np.bincount(draws)
    est = discrete_power_mle(counts, kmin)
    assert est == pytest.approx(beta, abs=0.03)
    fit = fit_power_tail(counts / counts.sum(), (5, 50), degrees=counts)
    assert fit.mle == pytest.approx(est)


def test_increment_targets():
    v = increment_limits_check([math.exp(-1), math.exp(-1), 0.2], ONE, 10_000)
    assert [x.target for x in v[:2]] == pytest.approx([0.36788, 0.36788], abs=1e-5)
    assert all(x.passed for x in v)
    v = increment_limits_check([0.1, 0.2], ModelParams(mu=2.0), 100)
    assert v[0].target == pytest.approx(0.13534, abs=1e-5) and v[1].target == pytest.approx(0.27067, abs=1e-5)


def test_increment_single_sample_window_never_rejects_upper():
    v = increment_limits_check([1.0, 0.0], ONE, 1)
    assert v[2].passed


def test_moment_checks():
    a = np.ones(5000)
    assert all(v.passed for v in moment_bound_check(a, ONE, (2, 3, 4)))
    v = moment_bound_check(np.full(5000, 3.0), ONE, (2,))
    assert not v[0].passed and not v[1].passed
    assert v[1].target == 2
    assert moment_bound_check(np.ones(2000), ONE, (4,))[1].target == 24
    with pytest.raises(ValueError):
        moment_bound_check(np.ones(10), ONE)


def test_ba_increment_moments():
    a = np.concatenate([run_process(ONE, "ba", 20_000, s).increments for s in range(5)])
    assert all(v.passed for v in moment_bound_check(a, ONE, (2, 3, 4)))


def test_concentration_flags_constructed_violation():
    T = 10_000
    ok = concentration_check(np.full(50, T + 10.0), T, ONE)
    assert all(v.passed for v in ok) and all(v.detail["violations"] == 0 for v in ok)
    bad = concentration_check(np.array([T, 2.0 * T]), T, ONE)
    assert bad[0].detail["violations"] == 1 and bad[1].detail["violations"] == 1
    assert not bad[0].passed


def test_ks_distance_basics():
    assert ks_distance([0.5, 0.5], [0.5, 0.5]) == 0
    assert ks_distance([1.0], [0.0, 1.0]) == 1
    with pytest.raises(ValueError):
        ks_distance([0.5, 0.4], [1.0])
    with pytest.raises(ValueError):
        ks_distance([1.5, -0.5], [1.0])


dists = st.lists(st.floats(0, 1), min_size=1, max_size=12).filter(lambda x: sum(x) > 1e-3).map(
    lambda x: normalize(x))


@settings(max_examples=100)
@given(dists, dists, dists)
def test_ks_metric_axioms(p, q, r):
    d = ks_distance
    assert d(p, q) == pytest.approx(d(q, p))
    assert d(p, p) == 0
    assert d(p, r) <= d(p, q) + d(q, r) + 1e-12
    assert 0 <= d(p, q) <= 1 + 1e-12


def test_summary_invariants():
    T = 5000
    trs = [run_process(ONE, "ba", T, s) for s in range(6)]
    s = summarize(trs, list(range(6)))
    assert s.mean_fraction.sum() == pytest.approx((T + 1) / T, abs=1e-9)
    assert s.increment_freq.sum() == pytest.approx(1.0, abs=1e-9)
    assert np.all((s.increment_freq >= 0) & (s.increment_freq <= 1))
    assert s.replicas == 6 and s.increment_samples == 6 * T // 2
    assert s.e_trace.shape == (5, 4)
    assert np.all(s.e_trace[:, 2] <= s.e_trace[:, 1]) and np.all(s.e_trace[:, 1] <= s.e_trace[:, 3])
    assert s.e_matrix[:, -1].tolist() == s.e_final.tolist()
    assert s.giant is None
    with pytest.raises(ValueError):
        summarize([])


def test_summary_is_pure():
    trs = [run_process(ONE, "ba", 1000, s) for s in range(3)]
    a, b = summarize(trs), summarize(trs)
    assert np.array_equal(a.mean_fraction, b.mean_fraction)
    assert np.array_equal(a.ci, b.ci)

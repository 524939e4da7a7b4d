import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from phasegraph.sampling import binomial, binomial_sample, derive_seed, make_rng, mix64, randint


def _chi2_pvalue(draws, n, p):
    k = np.arange(n + 1)
    expected = stats.binom.pmf(k, n, p) * len(draws)
    observed = np.bincount(draws, minlength=n + 1).astype(float)
    # pool sparse cells so every expected count is >= 5
    obs, exp = [], []
    o_acc = e_acc = 0.0
    for o, e in zip(observed, expected):
        o_acc += o
        e_acc += e
        if e_acc >= 5:
            obs.append(o_acc)
            exp.append(e_acc)
            o_acc = e_acc = 0.0
    obs[-1] += o_acc
    exp[-1] += e_acc
    obs, exp = np.array(obs), np.array(exp)
    return stats.chisquare(obs, exp * obs.sum() / exp.sum()).pvalue


@pytest.mark.parametrize("n,p", [
    (5, 0.3),        # inversion
    (40, 0.2),       # inversion, n p = 8
    (60, 0.5),       # BTRD
    (1000, 0.03),    # BTRD, n p = 30
    (20000, 0.7),    # BTRD through the p > 1/2 flip
    (7, 0.95),       # inversion through the flip
])
def test_binomial_matches_exact_pmf(n, p):
    draws = binomial_sample(make_rng(n), n, p, 200_000)
    assert draws.min() >= 0 and draws.max() <= n
    assert _chi2_pvalue(draws, n, p) > 1e-4


def test_binomial_degenerate_cases(rng):
    assert binomial(rng, 0, 0.5) == 0
    assert binomial(rng, 10, 0.0) == 0
    assert binomial(rng, 10, 1.0) == 10
    assert binomial(rng, 10, 1.7) == 10
    assert binomial(rng, 10, -0.2) == 0


def test_binomial_stream_is_reproducible():
    a = binomial_sample(make_rng(9), 500, 0.1, 1000)
    b = binomial_sample(make_rng(9), 500, 0.1, 1000)
    assert np.array_equal(a, b)


def test_randint_stays_in_range(rng):
    from numba import njit

    @njit
    def many(r, n, size):
        out = np.empty(size, dtype=np.int64)
        for i in range(size):
            out[i] = randint(r, n)
        return out

    x = many(rng, 7, 70_000)
    assert x.min() == 0 and x.max() == 6
    assert stats.chisquare(np.bincount(x)).pvalue > 1e-4


def test_mix64_known_values():
    # SplitMix64 finalizer applied to the first state increment
    assert mix64(0x9E3779B97F4A7C15) == 0xE220A8397B1DCDAF
    assert mix64(0) == 0


@given(st.integers(0, 2**64 - 1), st.integers(0, 10**6))
def test_derive_seed_is_64_bit(master, index):
    s = derive_seed(master, index)
    assert 0 <= s < 2**64
    assert s == derive_seed(master, index)


def test_derive_seed_distinct_over_replicas():
    seeds = {derive_seed(42, i) for i in range(10_000)}
    assert len(seeds) == 10_000


@settings(max_examples=25, deadline=None)
@given(st.integers(1, 400), st.floats(0.001, 0.999))
def test_binomial_small_sample_mean(n, p):
    draws = binomial_sample(make_rng(n), n, p, 4000)
    sd = np.sqrt(n * p * (1 - p) / 4000)
    assert abs(draws.mean() - n * p) <= 6 * sd + 1e-9

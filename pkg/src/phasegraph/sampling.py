"""Random variates used by the simulators.

All draws come from a :class:`numpy.random.Generator` backed by PCG64 (a
seedable 64-bit generator), passed straight into the jitted kernels.

Binomial variates are exact. For ``n*min(p, 1-p) < 10`` we use sequential
inversion; above that, Hormann's BTRD transformed-rejection algorithm
("The generation of binomial random variates", J. Stat. Comput. Simul. 46,
1993), which accepts against the exact pmf. No normal approximation is
used anywhere, because tail counts feed the power-law fits.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15

INVERSION_CUTOFF = 10.0


def make_rng(seed: int) -> np.random.Generator:
    """Generator used by every simulation: PCG64 seeded with a 64-bit integer."""
    return np.random.Generator(np.random.PCG64(int(seed) & _MASK64))


def mix64(z: int) -> int:
    """SplitMix64 finalizer."""
    z &= _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def derive_seed(master_seed: int, index: int) -> int:
    """Seed of replica ``index``: mix64(master XOR index * 0x9E3779B97F4A7C15)."""
    return mix64((int(master_seed) & _MASK64) ^ ((int(index) * _GOLDEN) & _MASK64))


# Stirling-series remainder log(k!) - [(k+1/2)log(k+1) - (k+1) + log(2pi)/2]
_FC_TABLE = np.array(
    [
        math.lgamma(k + 1.0) - ((k + 0.5) * math.log(k + 1.0) - (k + 1.0) + 0.5 * math.log(2 * math.pi))
        for k in range(10)
    ]
)


@njit(cache=True)
def _stirling_tail(k):
    if k < 10:
        return _FC_TABLE[k]
    kp1 = k + 1.0
    kp1sq = kp1 * kp1
    return (1.0 / 12.0 - (1.0 / 360.0 - 1.0 / 1260.0 / kp1sq) / kp1sq) / kp1


@njit(cache=True)
def randint(rng, n):
    """Uniform integer in [0, n). Bias is at most n / 2**53."""
    j = np.int64(rng.random() * n)
    if j >= n:
        j = n - 1
    return j


@njit(cache=True)
def _binomial_inversion(rng, n, p):
    q = 1.0 - p
    s = p / q
    f0 = math.exp(n * math.log1p(-p))
    while True:
        u = rng.random()
        f = f0
        k = 0
        while u > f:
            u -= f
            k += 1
            if k > n:
                break
            f *= s * (n - k + 1) / k
        if k <= n:
            return k
        # cumulative rounding left mass past n; redraw


@njit(cache=True)
def _binomial_btrd(rng, n, p):
    m = np.int64(math.floor((n + 1) * p))
    r = p / (1.0 - p)
    nr = (n + 1) * r
    npq = n * p * (1.0 - p)
    spq = math.sqrt(npq)
    b = 1.15 + 2.53 * spq
    a = -0.0873 + 0.0248 * b + 0.01 * p
    c = n * p + 0.5
    alpha = (2.83 + 5.1 / b) * spq
    vr = 0.92 - 4.2 / b
    urvr = 0.86 * vr
    while True:
        v = rng.random()
        if v <= urvr:
            u = v / vr - 0.43
            return np.int64(math.floor((2.0 * a / (0.5 - abs(u)) + b) * u + c))
        if v >= vr:
            u = rng.random() - 0.5
        else:
            u = v / vr - 0.93
            u = math.copysign(0.5, u) - u
            v = rng.random() * vr
        us = 0.5 - abs(u)
        kf = math.floor((2.0 * a / us + b) * u + c)
        if kf < 0 or kf > n:
            continue
        k = np.int64(kf)
        v = v * alpha / (a / (us * us) + b)
        km = abs(k - m)
        if km <= 15:
            f = 1.0
            if m < k:
                for i in range(m + 1, k + 1):
                    f *= nr / i - r
            elif m > k:
                for i in range(k + 1, m + 1):
                    v *= nr / i - r
            if v <= f:
                return k
            continue
        v = math.log(v)
        rho = (km / npq) * (((km / 3.0 + 0.625) * km + 1.0 / 6.0) / npq + 0.5)
        t = -km * km / (2.0 * npq)
        if v < t - rho:
            return k
        if v > t + rho:
            continue
        nm = n - m + 1
        h = (m + 0.5) * math.log((m + 1) / (r * nm)) + _stirling_tail(m) + _stirling_tail(n - m)
        nk = n - k + 1
        if v <= h + (n + 1) * math.log(nm / nk) + (k + 0.5) * math.log(nk * r / (k + 1)) \
                - _stirling_tail(k) - _stirling_tail(n - k):
            return k


@njit(cache=True)
def binomial(rng, n, p):
    """Exact Binomial(n, p) variate; p is clipped to [0, 1]."""
    if n <= 0 or p <= 0.0:
        return np.int64(0)
    if p >= 1.0:
        return np.int64(n)
    flip = p > 0.5
    if flip:
        p = 1.0 - p
    if n * p < INVERSION_CUTOFF:
        k = _binomial_inversion(rng, n, p)
    else:
        k = _binomial_btrd(rng, n, p)
    if flip:
        return n - k
    return k


@njit(cache=True)
def _binomial_many(rng, n, p, size):
    out = np.empty(size, dtype=np.int64)
    for i in range(size):
        out[i] = binomial(rng, n, p)
    return out


def binomial_sample(rng: np.random.Generator, n: int, p: float, size: int) -> np.ndarray:
    """Vector of ``size`` independent Binomial(n, p) draws (testing convenience)."""
    return _binomial_many(rng, np.int64(n), float(p), int(size))

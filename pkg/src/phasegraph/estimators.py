"""Estimators and verdicts that turn simulated ensembles into checkable numbers.

Tail fits work on the ensemble mean of D_k(T)/T rather than on single
replicas. Bounds whose constants are only known to exist are checked in
shape, with explicit conservative constants that the caller can override.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize, special, stats

from .params import ModelParams

NORMALIZATION_TOL = 1e-9


@dataclass
class TailFit:
    value: float
    stderr: float
    k_range: tuple[int, int]
    n_classes: int
    mle: float | None = None


def _window(mean_fraction, k_range):
    f = np.asarray(mean_fraction, dtype=float)
    lo, hi = int(k_range[0]), int(k_range[1])
    if lo < 1 or hi < lo:
        raise ValueError(f"bad k_range {k_range}")
    k = np.arange(lo, min(hi, len(f) - 1) + 1)
    y = f[k] if len(k) else np.zeros(0)
    keep = y > 0
    if keep.sum() < 10:
        raise ValueError(f"need at least 10 classes with positive mass in {k_range}, got {int(keep.sum())}")
    return k[keep], y[keep]


def fit_power_tail(mean_fraction, k_range=(5, 50), degrees=None, k_min: int | None = None) -> TailFit:
    """Least-squares tail exponent beta from log f_k = c - beta log k.

    Parameters
    ----------
    mean_fraction : array
        Ensemble-mean fraction per degree class, indexed by k.
    k_range : (int, int)
        Inclusive fit window.
    degrees : array, optional
        Degree histogram (count per k) used for the discrete maximum
        likelihood cross-check over k >= k_min (default: ``k_range[0]``).
    """
    k, y = _window(mean_fraction, k_range)
    res = stats.linregress(np.log(k), np.log(y))
    mle = None
    if degrees is not None:
        mle = discrete_power_mle(degrees, k_min or int(k_range[0]))
    return TailFit(-float(res.slope), float(res.stderr), (int(k_range[0]), int(k_range[1])), len(k), mle)


def discrete_power_mle(counts, k_min: int) -> float:
    """Discrete power-law MLE for the tail k >= k_min of a degree histogram.

    Maximises -beta sum(log k) - n log zeta(beta, k_min), with zeta the
    Hurwitz zeta function.
    """
    c = np.asarray(counts, dtype=float)
    k = np.arange(len(c))
    m = (k >= k_min) & (c > 0)
    n = c[m].sum()
    if n == 0:
        raise ValueError(f"no mass at k >= {k_min}")
    slog = float((c[m] * np.log(k[m])).sum())

    def nll(beta):
        return beta * slog + n * math.log(special.zeta(beta, k_min))

    r = optimize.minimize_scalar(nll, bounds=(1.01, 20.0), method="bounded", options={"xatol": 1e-8})
    return float(r.x)


def fit_geometric_ratio(mean_fraction, k_range=(5, 16)) -> TailFit:
    """Ratio r from the least-squares fit log f_k = c + k log r."""
    k, y = _window(mean_fraction, k_range)
    res = stats.linregress(k, np.log(y))
    r = math.exp(res.slope)
    return TailFit(r, r * float(res.stderr), (int(k_range[0]), int(k_range[1])), len(k))


@dataclass
class Verdict:
    """One checked quantity; ``anchor`` names the result being tested."""

    name: str
    anchor: str
    measured: float
    target: float | str
    tolerance: float | str
    passed: bool
    detail: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {
            "name": self.name,
            "anchor": self.anchor,
            "measured": _plain(self.measured),
            "target": _plain(self.target),
            "tolerance": _plain(self.tolerance),
            "pass": bool(self.passed),
        }


def _plain(x):
    if isinstance(x, (np.floating, float)):
        return float(x)
    if isinstance(x, (np.integer, int)) and not isinstance(x, bool):
        return int(x)
    return x


def increment_limits_check(increment_freq, params: ModelParams, n_samples: int,
                           tol: float = 0.01) -> list[Verdict]:
    """Window frequencies of a_t = 0, 1 against e^{-mu} and mu e^{-mu}.

    The upper-bound verdict allows three binomial standard errors of slack,
    so a single-sample window never rejects.
    """
    f = np.asarray(increment_freq, dtype=float)
    mu = params.mu
    f0 = float(f[0]) if len(f) > 0 else 0.0
    f1 = float(f[1]) if len(f) > 1 else 0.0
    t0, t1 = math.exp(-mu), mu * math.exp(-mu)
    se0 = math.sqrt(max(f0 * (1 - f0), 0.25 / max(n_samples, 1)) / max(n_samples, 1))
    return [
        Verdict("freq0", "P(a_t=0) -> e^-mu", f0, t0, tol, abs(f0 - t0) <= tol),
        Verdict("freq1", "P(a_t=1) -> mu e^-mu", f1, t1, tol, abs(f1 - t1) <= tol),
        Verdict("freq0_upper", "P(a_t=0) <= e^-mu", f0, t0, 3 * se0, f0 <= t0 + 3 * se0,
                {"stderr": se0}),
    ]


def moment_bound_check(a_samples, params: ModelParams, k_list=(2, 3, 4)) -> list[Verdict]:
    """Sample mean near mu and k-th moments below (mu v 1)^k k!, each with 3 SE slack."""
    a = np.asarray(a_samples, dtype=float)
    n = len(a)
    if n < 1000:
        raise ValueError(f"need at least 1000 samples, got {n}")
    mu = params.mu
    mean = float(a.mean())
    se = float(a.std(ddof=1) / math.sqrt(n))
    out = [Verdict("mean", "E(a_t | F_t) = mu", mean, mu, 3 * se, abs(mean - mu) <= 3 * se + 1e-12)]
    for k in k_list:
        x = a ** k
        m = float(x.mean())
        sek = float(x.std(ddof=1) / math.sqrt(n))
        bound = max(mu, 1.0) ** k * math.factorial(k)
        out.append(Verdict(f"moment{k}", "E(a_t^k | F_t) <= (mu v 1)^k k!", m, bound, 3 * sek,
                           m <= bound + 3 * sek))
    return out


def edge_variance_bound(params: ModelParams, T: int) -> float:
    """Var(e_T) <= sum_t E(a_t^2) <= 2 (mu v 1)^2 T, from the second-moment bound."""
    return 2 * max(params.mu, 1.0) ** 2 * T


def concentration_check(e_values, T: int, params: ModelParams, nu: float | None = None) -> list[Verdict]:
    """Fractions of replicas with large edge-count deviations.

    Parameters
    ----------
    e_values : array
        Per-replica e_T at one checkpoint T (call once per checkpoint).

    Notes
    -----
    The comparison bounds are Chebyshev inequalities built from
    :func:`edge_variance_bound`: P(|e_T - mu T| >= x) <= V / x^2. At
    x = T^{4/5} this is 2 (mu v 1)^2 T^{-3/5}, the polynomial shape of the
    moderate-deviation bound; at x = nu T it is a conservative stand-in for
    the exponential one.
    """
    e = np.asarray(e_values, dtype=float)
    nu = params.nu if nu is None else nu
    mu = params.mu
    dev = np.abs(e - mu * T)
    V = edge_variance_bound(params, T)
    x1, x2 = T ** 0.8, nu * mu * T
    f1 = float(np.mean(dev >= x1))
    f2 = float(np.mean(dev >= x2))
    b1 = min(1.0, V / x1 ** 2)
    b2 = min(1.0, V / x2 ** 2)
    return [
        Verdict(f"moderate_T{T}", "P(|e_t - mu t| >= t^(4/5)) <= c1 t^(-3/5)", f1, b1, 0.0, f1 <= b1,
                {"violations": int((dev >= x1).sum())}),
        Verdict(f"large_T{T}", "P(|e_t - mu t| >= nu t) <= c2 exp(-c3 t)", f2, b2, 0.0, f2 <= b2,
                {"violations": int((dev >= x2).sum())}),
    ]


def _check_normalized(p, name):
    s = float(np.sum(p))
    if abs(s - 1.0) > NORMALIZATION_TOL:
        raise ValueError(f"{name} sums to {s!r}, not 1")
    if np.any(p < 0):
        raise ValueError(f"{name} has negative entries")


def ks_distance(p, q) -> float:
    """max_k |CDF_p(k) - CDF_q(k)| for two distributions on k = 0, 1, ..."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    _check_normalized(p, "p")
    _check_normalized(q, "q")
    n = max(len(p), len(q))
    P = np.cumsum(np.pad(p, (0, n - len(p))))
    Q = np.cumsum(np.pad(q, (0, n - len(q))))
    return float(np.max(np.abs(P - Q))) if n else 0.0


def normalize(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    return x / x.sum()


@dataclass
class EnsembleSummary:
    """Aggregate of R replicas, built in replica-index order.

    ``e_trace`` rows are (t, mean, min, max) at each checkpoint and
    ``e_matrix[i, j]`` is e_t of replica i at checkpoint j.
    """

    model: str
    params: ModelParams
    steps: int
    replicas: int
    count_mean: np.ndarray
    mean_fraction: np.ndarray
    ci: np.ndarray
    increment_freq: np.ndarray
    increment_samples: int
    e_trace: np.ndarray
    e_final: np.ndarray
    e_matrix: np.ndarray
    d0_final: np.ndarray
    max_degree: np.ndarray
    giant: np.ndarray | None = None
    increment_window: tuple[int, int] = (0, 0)
    seeds: tuple[int, ...] = ()

    @property
    def giant_mean(self) -> float | None:
        return None if self.giant is None else float(self.giant.mean())


def summarize(trajectories, seeds=()) -> EnsembleSummary:
    """Aggregate a list of per-replica trajectories (histogram or vertex runs)."""
    trs = list(trajectories)
    if not trs:
        raise ValueError("empty ensemble")
    T = trs[0].steps
    R = len(trs)
    kmax = max(len(np.asarray(tr.counts)) for tr in trs)
    C = np.zeros((R, kmax))
    for i, tr in enumerate(trs):
        c = np.asarray(tr.counts, dtype=float)
        C[i, : len(c)] = c
    count_mean = C.mean(axis=0)
    F = C / T
    mean_fraction = F.mean(axis=0)
    ci = 1.96 * F.std(axis=0, ddof=1) / math.sqrt(R) if R > 1 else np.zeros(kmax)
    inc = np.concatenate([np.asarray(tr.increments, dtype=np.int64) for tr in trs])
    if len(inc):
        freq = np.bincount(inc) / len(inc)
    else:
        freq = np.zeros(1)
    E = np.array([np.asarray(tr.e_at, dtype=float) for tr in trs])
    ck = np.asarray(trs[0].checkpoints)
    trace = np.column_stack([ck, E.mean(axis=0), E.min(axis=0), E.max(axis=0)]) if len(ck) else np.zeros((0, 4))
    giant = None
    if all(getattr(tr, "giant", None) is not None for tr in trs):
        giant = np.array([tr.giant for tr in trs])
    return EnsembleSummary(
        model=trs[0].model, params=trs[0].params, steps=T, replicas=R,
        count_mean=count_mean, mean_fraction=mean_fraction, ci=ci,
        increment_freq=freq, increment_samples=len(inc), e_trace=trace,
        e_final=np.array([tr.edge_count for tr in trs], dtype=np.int64),
        e_matrix=E.astype(np.int64),
        d0_final=np.array([tr.d0 for tr in trs], dtype=np.int64),
        max_degree=np.array([tr.max_degree for tr in trs], dtype=np.int64),
        giant=giant, increment_window=tuple(trs[0].increment_window), seeds=tuple(seeds),
    )

"""Master recurrences for the expected degree counts.

Every family shares the stationary balance form

    d_k = A_k d_{k-1} - B_k d_k + phi_k,      d_{-1} = 0,

solved forward as d_k = (A_k d_{k-1} + phi_k) / (1 + B_k). The gain and
loss coefficients per family are

=============  ===============================  ===============================
family         A_k                              B_k
=============  ===============================  ===============================
pure-ba        (k-1)/2                          k/2
mixed          alpha(k-1)/2 + (1-alpha) mu      alpha k/2 + (1-alpha) mu
classical      zeta                             zeta
hard-copy      alpha(k-1) + (1-alpha) mu        same as A_k
pure-copy      k-1                              k-1
=============  ===============================  ===============================

For the mixed family with mu != zeta the coefficients become
alpha mu (k-1)/(2 xi) + (1-alpha) zeta and alpha mu k/(2 xi) + (1-alpha) zeta.
That generalisation is our own (it reproduces the exponent
1 + 2 xi/(alpha mu)) and solutions built from it carry ``extension=True``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import stats

from .params import ModelParams

FAMILIES = ("pure-ba", "mixed", "classical", "hard-copy", "pure-copy")


def _check_family(family: str) -> str:
    if family not in FAMILIES:
        raise ValueError(f"unknown family {family!r}; expected one of {FAMILIES}")
    return family


@dataclass
class RecurrenceSpec:
    family: str
    gain: np.ndarray
    loss: np.ndarray
    forcing: np.ndarray
    params: ModelParams
    extension: bool = False

    @property
    def k_max(self) -> int:
        return len(self.gain) - 1


@dataclass
class RecurrenceSolution:
    d: np.ndarray
    k_max: int
    family: str = ""
    fitted_exponent: float | None = None
    fitted_ratio: float | None = None
    extension: bool = False
    notes: list[str] = field(default_factory=list)

    def tail_ratio(self, k: int, factor: int = 2) -> float:
        """d_{factor k} / d_k (power-law tails) ."""
        return float(self.d[factor * k] / self.d[k])


def coefficients(family: str, params: ModelParams, k_max: int) -> tuple[np.ndarray, np.ndarray, bool]:
    """Gain A_k and loss B_k for k = 0..k_max, plus the extension flag."""
    _check_family(family)
    k = np.arange(k_max + 1, dtype=float)
    a, mu, z = params.alpha, params.mu, params.zeta
    ext = False
    if family == "pure-ba":
        A, B = (k - 1) / 2, k / 2
    elif family == "mixed":
        if mu == z:
            A = a * (k - 1) / 2 + (1 - a) * mu
            B = a * k / 2 + (1 - a) * mu
        else:
            xi = params.xi
            A = a * mu * (k - 1) / (2 * xi) + (1 - a) * z
            B = a * mu * k / (2 * xi) + (1 - a) * z
            ext = True
    elif family == "classical":
        A = np.full_like(k, z)
        B = np.full_like(k, z)
    elif family == "hard-copy":
        A = a * (k - 1) + (1 - a) * mu
        B = A.copy()
    else:
        A = k - 1
        B = A.copy()
    # A_0 multiplies d_{-1} = 0; clamp so coefficients stay nonnegative
    A = np.maximum(A, 0.0)
    B = np.maximum(B, 0.0)
    return A, B, ext


def make_spec(family: str, params: ModelParams, forcing, k_max: int | None = None) -> RecurrenceSpec:
    forcing = np.asarray(forcing, dtype=float)
    if k_max is None:
        k_max = len(forcing) - 1
    phi = np.zeros(k_max + 1)
    n = min(len(forcing), k_max + 1)
    phi[:n] = forcing[:n]
    if np.any(phi < 0):
        raise ValueError("forcing must be nonnegative")
    A, B, ext = coefficients(family, params, k_max)
    return RecurrenceSpec(family, A, B, phi, params, ext)


# --- forcing sequences -------------------------------------------------------

def default_rho(params: ModelParams, family: str) -> float:
    """Conservative positive lower bound on P(a_t = 0).

    pure-ba: e^{-mu}/2. mixed / classical: (1-alpha) e^{-zeta}, the k = 0
    Poisson floor left by the classical steps. hard-copy: (1-alpha) e^{-mu}.
    """
    _check_family(family)
    if family == "pure-ba":
        return math.exp(-params.mu) / 2
    if family == "mixed":
        return (1 - params.alpha) * math.exp(-params.zeta)
    if family == "classical":
        return math.exp(-params.zeta)
    if family == "hard-copy":
        return (1 - params.alpha) * math.exp(-params.mu)
    raise ValueError("pure-copy never creates isolated vertices; no positive rho exists")


def forcing_lower_psi(params: ModelParams, family: str, rho: float | None = None,
                      k_max: int = 10_000) -> np.ndarray:
    """psi_0 = rho, psi_k = 0 for k >= 1."""
    if rho is None:
        rho = default_rho(params, family)
    if not 0 < rho <= 1:
        raise ValueError(f"rho must lie in (0, 1], got {rho}")
    psi = np.zeros(k_max + 1)
    psi[0] = rho
    return psi


def pa_forcing_order(alpha: float) -> int:
    """n(alpha) = 3 + floor(2/alpha)."""
    if alpha <= 0:
        raise ValueError("alpha = 0 has no PA forcing; use the classical family")
    return 3 + math.floor(2 / alpha)


def forcing_upper_phi(params: ModelParams, family: str, k_max: int = 10_000,
                      c0: float = 1.0) -> np.ndarray:
    """Upper forcing sequence of each family.

    pure-ba: phi_0 = e^{-mu}, phi_k = C k^{-4}, C = (mu v 1)^4 4!.
    mixed: phi_k = C(alpha) k^{-n}, n = n(alpha), C(alpha) = (mu v 1)^n n!.
    classical: c0 * Poisson(zeta) pmf for k >= 1, e^{-zeta} at 0.
    hard-copy: (1-alpha) times the classical bound at rate mu.
    pure-copy: identically zero (no new-vertex source term).
    """
    _check_family(family)
    k = np.arange(k_max + 1, dtype=float)
    phi = np.zeros(k_max + 1)
    mu, z, a = params.mu, params.zeta, params.alpha
    if family in ("pure-ba", "mixed"):
        if family == "pure-ba":
            n = 4
        else:
            if a == 0:
                raise ValueError("alpha = 0 has no PA forcing; use the classical family")
            n = pa_forcing_order(a)
        C = max(mu, 1.0) ** n * math.factorial(n)
        phi[1:] = C * k[1:] ** (-float(n))
        phi[0] = math.exp(-mu)
    elif family == "classical":
        phi[:] = c0 * stats.poisson.pmf(k, z)
        phi[0] = math.exp(-z)
    elif family == "hard-copy":
        phi[:] = (1 - a) * c0 * stats.poisson.pmf(k, mu)
        phi[0] = (1 - a) * math.exp(-mu)
    return phi


def forcing_plugin(increment_freq, k_max: int = 10_000) -> np.ndarray:
    """Empirical increment distribution used directly as the forcing."""
    f = np.asarray(increment_freq, dtype=float)
    phi = np.zeros(k_max + 1)
    n = min(len(f), k_max + 1)
    phi[:n] = f[:n]
    return phi


# --- stationary solvers ------------------------------------------------------

def solve_forward(spec: RecurrenceSpec, k_max: int | None = None) -> RecurrenceSolution:
    """Ascending-k recursion d_k = (A_k d_{k-1} + phi_k) / (1 + B_k)."""
    if k_max is None:
        k_max = spec.k_max
    if k_max < 1:
        raise ValueError("k_max must be >= 1")
    if k_max > spec.k_max:
        raise ValueError(f"spec only defines k <= {spec.k_max}")
    A = spec.gain.tolist()
    B = spec.loss.tolist()
    phi = spec.forcing.tolist()
    d = [0.0] * (k_max + 1)
    prev = 0.0
    for k in range(k_max + 1):
        val = (A[k] * prev + phi[k]) / (1.0 + B[k])
        if not math.isfinite(val):
            raise FloatingPointError(f"non-finite value at k={k}")
        d[k] = val
        prev = val
    return RecurrenceSolution(np.array(d), k_max, spec.family, extension=spec.extension)


def closed_form_pure_ba(forcing, k_max: int) -> RecurrenceSolution:
    """d_0 = phi_0, d_1 = 2 phi_1 / 3, d_k = sum_{j<=k} 2j(j+1) phi_j / (k(k+1)(k+2))."""
    if k_max < 2:
        raise ValueError("k_max must be >= 2")
    phi = np.zeros(k_max + 1)
    f = np.asarray(forcing, dtype=float)[: k_max + 1]
    phi[: len(f)] = f
    j = np.arange(k_max + 1, dtype=float)
    prefix = np.cumsum(2 * j * (j + 1) * phi)
    d = np.empty(k_max + 1)
    d[0] = phi[0]
    d[1:] = prefix[1:] / (j[1:] * (j[1:] + 1) * (j[1:] + 2))
    if not np.all(np.isfinite(d)):
        bad = int(np.flatnonzero(~np.isfinite(d))[0])
        raise FloatingPointError(f"non-finite value at k={bad}")
    return RecurrenceSolution(d, k_max, "pure-ba")


def mixed_constants(params: ModelParams) -> tuple[float, float]:
    """(beta, b) = (1 + 2/alpha, 2/alpha + 2(1-alpha) mu/alpha)."""
    a = params.alpha
    return 1 + 2 / a, 2 / a + 2 * (1 - a) * params.mu / a


def closed_form_mixed(forcing, params: ModelParams, k_max: int) -> RecurrenceSolution:
    """Product/sum solution of the mixed recurrence for mu = zeta.

    d_k = P_k (sum_{i<=k} 2 phi_i / ((i+b) alpha P_i) + 2 phi_0 / (b alpha)),
    P_k = prod_{j<=k} (1 - beta/(j+b)), evaluated in log space.
    """
    a = params.alpha
    if not 0 < a < 1:
        raise ValueError("closed form needs 0 < alpha < 1")
    if params.mu != params.zeta:
        raise ValueError("closed form needs mu == zeta; use solve_forward on the general preset")
    beta, b = mixed_constants(params)
    phi = np.zeros(k_max + 1)
    f = np.asarray(forcing, dtype=float)[: k_max + 1]
    phi[: len(f)] = f
    j = np.arange(1, k_max + 1, dtype=float)
    logP = np.concatenate([[0.0], np.cumsum(np.log1p(-beta / (j + b)))])
    with np.errstate(divide="ignore"):
        w = np.log(2 * phi / (a * np.concatenate([[b], j + b])))
    logS = np.logaddexp.accumulate(w - logP)
    d = np.exp(logP + logS)
    return RecurrenceSolution(d, k_max, "mixed")


# --- time evolution ----------------------------------------------------------

def _binomial_pmf_row(n: int, p: float, k_max: int) -> np.ndarray:
    k = np.arange(k_max + 1)
    return stats.binom.pmf(k, n, p)


def evolve_master(family: str, params: ModelParams, forcing=None, T: int = 1000,
                  k_max: int | None = None, checkpoints=None, tol: float = 1e-12):
    """Forward-in-time evolution of the expected counts D_k(t), remainder terms dropped.

    Parameters
    ----------
    forcing : array, callable or None
        Stationary array phi (switched on at t >= k), a callable ``t -> array``
        giving the new-vertex degree law at step t -> t+1, or None for the
        family default. Defaults: classical and hard-copy use the exact
        Binomial(t+1, min(rate, t+1)/(t+1)) law (scaled by 1-alpha for
        hard-copy); pure-copy has no forcing; the PA families need one.
    checkpoints : iterable of int, optional
        Times at which to store D(t); defaults to (T,).

    Returns
    -------
    dict mapping each checkpoint t to the array D_k(t), k = 0..k_max.

    Notes
    -----
    Classical and copy families use the per-step rate min(rate, t+1)/(t+1),
    which reproduces the complete-graph start (D_k(k) = k+1 while k < zeta)
    and the t/(t+1) correction term of the classical recurrence exactly.
    Those recurrences are linear in the degree counts, so for them the
    evolution is the exact expectation rather than an approximation.
    """
    _check_family(family)
    if T < 1:
        raise ValueError("T must be >= 1")
    if k_max is None:
        k_max = T + 1
    checkpoints = sorted(set(int(c) for c in (checkpoints or (T,))))
    if checkpoints[0] < 1 or checkpoints[-1] > T:
        raise ValueError("checkpoints must lie in [1, T]")
    a, mu, z = params.alpha, params.mu, params.zeta
    if forcing is None and family in ("pure-ba", "mixed"):
        raise ValueError(f"{family} evolution needs an explicit forcing")
    if callable(forcing):
        force_at: Callable[[int], np.ndarray] | None = forcing
        phi = None
    elif forcing is not None:
        phi = np.zeros(k_max + 2)
        f = np.asarray(forcing, dtype=float)[: k_max + 2]
        phi[: len(f)] = f
        force_at = None
    else:
        phi = None
        force_at = None

    D = np.zeros(k_max + 2)
    D[1] = 2.0
    out = {}
    if checkpoints[0] == 1:
        out[1] = D[: k_max + 1].copy()
    kk = np.arange(k_max + 2, dtype=float)
    if family == "mixed" and mu != z:
        xi = params.xi
        gain_c = a * mu * (kk - 1) / (2 * xi) + (1 - a) * z
        loss_c = a * mu * kk / (2 * xi) + (1 - a) * z
    elif family == "mixed":
        gain_c = a * (kk - 1) / 2 + (1 - a) * mu
        loss_c = a * kk / 2 + (1 - a) * mu
    else:
        gain_c = loss_c = None

    for t in range(1, T):
        top = min(t + 1, k_max + 1)  # classes that can be occupied at t+1
        Dk = D[: top + 1]
        Dm = np.concatenate([[0.0], D[:top]])
        k = kk[: top + 1]
        if family == "pure-ba":
            delta = ((k - 1) * Dm - k * Dk) / (2 * t)
            delta[0] = 0.0
        elif family == "mixed":
            delta = (gain_c[: top + 1] * Dm - loss_c[: top + 1] * Dk) / t
            delta[0] = -loss_c[0] * Dk[0] / t
        elif family == "classical":
            n = t + 1
            delta = min(z, n) / n * (Dm - Dk)
        elif family == "hard-copy":
            n = t + 1
            c = a * (k - 1) + (1 - a) * min(mu, n)
            delta = c * (Dm - Dk) / n
        else:
            n = t + 1
            delta = (k - 1) * (Dm - Dk) / n
            delta[0] = 0.0
        new = Dk + delta
        # source term for the vertex added at step t -> t+1
        if force_at is not None:
            src = np.asarray(force_at(t), dtype=float)[: top + 1]
            new[: len(src)] += src
        elif phi is not None:
            lim = min(t, top)  # stationary forcing switched on for t >= k
            new[: lim + 1] += phi[: lim + 1]
        elif family == "classical":
            n = t + 1
            new += _binomial_pmf_row(n, min(z, n) / n, top)
        elif family == "hard-copy":
            n = t + 1
            new += (1 - a) * _binomial_pmf_row(n, min(mu, n) / n, top)
        if np.any(new < -tol):
            kbad = int(np.flatnonzero(new < -tol)[0])
            raise ArithmeticError(f"negative expected count at t={t + 1}, k={kbad}: {new[kbad]:.3g}")
        D[: top + 1] = new
        if t + 1 in checkpoints:
            out[t + 1] = D[: k_max + 1].copy()
    return out


# --- predictions -------------------------------------------------------------

@dataclass(frozen=True)
class TailDescriptor:
    kind: str  # "power-law", "geometric" or "degenerate"
    value: float | None = None

    def __str__(self):
        if self.kind == "power-law":
            return f"power law, beta = {self.value:g}"
        if self.kind == "geometric":
            return f"geometric, ratio = {self.value:g}"
        return "degenerate (no stationary fraction)"


def predicted_exponent(params: ModelParams, family: str) -> TailDescriptor:
    """Tail law of D_k(t)/t predicted for each family."""
    _check_family(family)
    a, mu, z = params.alpha, params.mu, params.zeta
    if family == "pure-ba" or (family == "mixed" and a == 1):
        return TailDescriptor("power-law", 3.0)
    if family == "classical" or (family == "mixed" and a == 0):
        return TailDescriptor("geometric", z / (1 + z))
    if family == "mixed":
        return TailDescriptor("power-law", 1 + 2 * (1 + (1 - a) * z / (a * mu)))
    if family == "hard-copy":
        if a == 0:
            return TailDescriptor("geometric", mu / (1 + mu))
        if a == 1:
            return TailDescriptor("degenerate")
        return TailDescriptor("power-law", 1 / a)
    return TailDescriptor("degenerate")


@dataclass
class SandwichVerdict:
    k: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    empirical: np.ndarray
    slack: float
    lower_ok: np.ndarray
    upper_ok: np.ndarray

    @property
    def ok(self) -> np.ndarray:
        return self.lower_ok & self.upper_ok

    @property
    def all_ok(self) -> bool:
        return bool(self.ok.all())


def comparing_sandwich(lower, upper, empirical, slack: float) -> SandwichVerdict:
    """Per-k check lower_k - slack <= empirical_k <= upper_k + slack."""
    lo = np.asarray(getattr(lower, "d", lower), dtype=float)
    hi = np.asarray(getattr(upper, "d", upper), dtype=float)
    em = np.asarray(empirical, dtype=float)
    n = min(len(lo), len(hi), len(em))
    lo, hi, em = lo[:n], hi[:n], em[:n]
    return SandwichVerdict(np.arange(n), lo, hi, em, slack, em >= lo - slack, em <= hi + slack)


# --- model-facing helpers ----------------------------------------------------

def model_family(model: str, params: ModelParams) -> str:
    """Recurrence family that describes a simulation model at these parameters."""
    if model == "ba":
        return "pure-ba"
    if model == "classical":
        return "classical"
    if model == "mixed":
        if params.alpha == 1:
            return "pure-ba"
        return "classical" if params.alpha == 0 else "mixed"
    if model == "hardcopy":
        return "pure-copy" if params.alpha == 1 else "hard-copy"
    raise ValueError(f"unknown model {model!r}")


def stationary_columns(model: str, params: ModelParams, k_max: int,
                       increment_freq=None) -> dict[str, np.ndarray]:
    """Lower, upper and plug-in stationary solutions on k = 0..k_max.

    Columns that do not exist for the family (no positive lower forcing for
    pure copy, no increment data) are filled with NaN.
    """
    fam = model_family(model, params)
    nan = np.full(k_max + 1, np.nan)
    cols = {"d_lower": nan, "d_upper": nan.copy(), "d_plugin": nan.copy()}
    if fam == "pure-copy":
        return cols
    # the mixed solver needs its own preset; classical-family forcing uses the
    # classical rate
    cols["d_lower"] = solve_forward(make_spec(fam, params, forcing_lower_psi(params, fam, k_max=k_max))).d
    cols["d_upper"] = solve_forward(make_spec(fam, params, forcing_upper_phi(params, fam, k_max=k_max))).d
    if increment_freq is not None:
        phi = forcing_plugin(increment_freq, k_max)
        cols["d_plugin"] = solve_forward(make_spec(fam, params, phi)).d
    return cols

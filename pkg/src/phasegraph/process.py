"""Degree-histogram simulation of the classical, BA and mixed processes.

Every attachment rule here gives each existing vertex a selection
probability that depends only on its current degree, and the selections
are independent. So instead of one Bernoulli trial per vertex we draw, for
each occupied degree class k, a single Binomial(D_k, p_k) count. The cost
of a step is O(max degree) rather than O(t), and the law of the histogram
is unchanged.

Probabilities are computed from the pre-step snapshot and all classes are
drawn before any vertex moves.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numba import njit

from .params import MODEL_CODE, ModelParams, check_model
from .sampling import binomial, make_rng

PA = 0
CLASSICAL = 1
MANNER_NAMES = {PA: "pa", CLASSICAL: "classical"}


@dataclass
class DegreeHistogram:
    """Degree-class state of G_t.

    ``dense[k]`` is D_k(t); the array is padded with zeros past
    ``max_degree``. Use :attr:`counts` for the sparse view.
    """

    t: int
    dense: np.ndarray
    edge_count: int
    last_increment: int | None = None
    max_degree: int = 0

    @property
    def counts(self) -> dict[int, int]:
        nz = np.flatnonzero(self.dense[: self.max_degree + 1])
        return {int(k): int(self.dense[k]) for k in nz}

    @property
    def vertex_count(self) -> int:
        return self.t + 1

    def copy(self) -> DegreeHistogram:
        return DegreeHistogram(self.t, self.dense.copy(), self.edge_count,
                               self.last_increment, self.max_degree)

    def check(self) -> None:
        """Raise ValueError if any structural invariant is broken."""
        d = self.dense
        if np.any(d < 0):
            raise ValueError("negative degree-class count")
        k = np.arange(len(d))
        if int(d.sum()) != self.t + 1:
            raise ValueError(f"vertex count {int(d.sum())} != t+1 = {self.t + 1}")
        if int((k * d).sum()) != 2 * self.edge_count:
            raise ValueError(
                f"handshake identity violated: sum k*D_k = {int((k * d).sum())}, "
                f"2e = {2 * self.edge_count}"
            )
        nz = np.flatnonzero(d)
        top = int(nz[-1]) if len(nz) else 0
        if top != self.max_degree:
            raise ValueError(f"max_degree {self.max_degree} != largest occupied class {top}")
        if top > self.t:
            raise ValueError(f"class {top} occupied at t={self.t}")


@dataclass
class StepOutcome:
    a: int
    per_class_selections: dict[int, int]
    manner: str


def init_state() -> DegreeHistogram:
    """G_1: vertices x0, x1 joined by one edge."""
    dense = np.zeros(4, dtype=np.int64)
    dense[1] = 2
    return DegreeHistogram(t=1, dense=dense, edge_count=1, last_increment=None, max_degree=1)


@njit(cache=True)
def _hist_step(counts, sel, t, e, maxdeg, model, alpha, mu, zeta, rng):
    # counts must have room for index max(maxdeg + 1, t + 1)
    if model == 0:
        pa = True
    elif model == 1:
        pa = False
    else:
        pa = rng.random() < alpha
    a = 0
    if pa:
        sel[0] = 0
        scale = mu / (2.0 * e)
        for k in range(1, maxdeg + 1):
            n = counts[k]
            if n == 0:
                sel[k] = 0
                continue
            s = binomial(rng, n, scale * k)
            sel[k] = s
            a += s
    else:
        nv = t + 1
        p = min(zeta, nv) / nv
        for k in range(0, maxdeg + 1):
            n = counts[k]
            if n == 0:
                sel[k] = 0
                continue
            s = binomial(rng, n, p)
            sel[k] = s
            a += s
    for k in range(maxdeg, -1, -1):
        s = sel[k]
        if s != 0:
            counts[k] -= s
            counts[k + 1] += s
    newmax = maxdeg + 1 if sel[maxdeg] > 0 else maxdeg
    counts[a] += 1
    if a > newmax:
        newmax = a
    return a, (PA if pa else CLASSICAL), newmax


def _step(state: DegreeHistogram, params: ModelParams, model: str, rng) -> tuple[DegreeHistogram, StepOutcome]:
    state.check()
    new = state.copy()
    need = new.t + 3
    if len(new.dense) < need:
        grown = np.zeros(max(need, 2 * len(new.dense)), dtype=np.int64)
        grown[: len(new.dense)] = new.dense
        new.dense = grown
    sel = np.zeros(len(new.dense), dtype=np.int64)
    a, manner, newmax = _hist_step(
        new.dense, sel, new.t, new.edge_count, new.max_degree, MODEL_CODE[model],
        float(params.alpha), float(params.mu), float(params.zeta), rng,
    )
    new.t += 1
    new.edge_count += int(a)
    new.last_increment = int(a)
    new.max_degree = int(newmax)
    picks = {int(k): int(sel[k]) for k in np.flatnonzero(sel[: state.max_degree + 1])}
    return new, StepOutcome(a=int(a), per_class_selections=picks, manner=MANNER_NAMES[manner])


def step_ba(state: DegreeHistogram, params: ModelParams, rng) -> tuple[DegreeHistogram, StepOutcome]:
    """One BA step: degree-k vertices are selected w.p. min(mu k / 2e, 1)."""
    return _step(state, params, "ba", rng)


def step_classical(state: DegreeHistogram, params: ModelParams, rng) -> tuple[DegreeHistogram, StepOutcome]:
    """One classical step: all n = t+1 existing vertices are selected w.p. min(zeta/n, 1)."""
    return _step(state, params, "classical", rng)


def step_mixed(state: DegreeHistogram, params: ModelParams, rng) -> tuple[DegreeHistogram, StepOutcome]:
    """PA step (rate mu) with probability alpha, classical step (rate zeta) otherwise."""
    return _step(state, params, "mixed", rng)


def default_checkpoints(steps: int) -> tuple[int, ...]:
    """Geometric grid T/16, T/8, T/4, T/2, T (deduplicated, each >= 1)."""
    return tuple(sorted({max(1, steps // d) for d in (16, 8, 4, 2, 1)}))


@dataclass(frozen=True)
class ObservationPlan:
    """What a run records besides the final histogram.

    ``increment_window = (lo, hi)`` keeps a_t for lo <= t < hi, where a_t is
    the number of edges added when going from G_t to G_{t+1}.
    """

    checkpoints: tuple[int, ...] = ()
    increment_window: tuple[int, int] = (0, 0)
    edge_dump: bool = False

    @classmethod
    def default(cls, steps: int) -> ObservationPlan:
        return cls(default_checkpoints(steps), (steps // 2, steps))

    def validated(self, steps: int) -> ObservationPlan:
        ck = tuple(sorted(set(int(c) for c in self.checkpoints)))
        if ck and (ck[0] < 1 or ck[-1] > steps):
            raise ValueError(f"checkpoints must lie in [1, {steps}]")
        lo, hi = (int(x) for x in self.increment_window)
        if not 0 <= lo <= hi <= steps:
            raise ValueError(f"increment window ({lo}, {hi}) must satisfy 0 <= lo <= hi <= {steps}")
        return ObservationPlan(ck, (lo, hi), self.edge_dump)


@dataclass
class Trajectory:
    """Summary of one run from G_1 to G_T."""

    model: str
    params: ModelParams
    steps: int
    seed: int
    counts: np.ndarray
    edge_count: int
    max_degree: int
    checkpoints: np.ndarray
    e_at: np.ndarray
    max_degree_at: np.ndarray
    d0_at: np.ndarray
    increment_window: tuple[int, int]
    increments: np.ndarray
    extra: dict = field(default_factory=dict)

    @property
    def d0(self) -> int:
        return int(self.counts[0]) if len(self.counts) else 0


@njit(cache=True)
def _run_hist(T, model, alpha, mu, zeta, rng, ckpts, win_lo, win_hi):
    counts = np.zeros(T + 3, dtype=np.int64)
    sel = np.zeros(T + 3, dtype=np.int64)
    counts[1] = 2
    t = 1
    e = 1
    maxdeg = 1
    nck = len(ckpts)
    e_ck = np.zeros(nck, dtype=np.int64)
    max_ck = np.zeros(nck, dtype=np.int64)
    d0_ck = np.zeros(nck, dtype=np.int64)
    incr = np.zeros(win_hi - win_lo, dtype=np.int32)
    ci = 0
    while ci < nck and ckpts[ci] == t:
        e_ck[ci] = e
        max_ck[ci] = maxdeg
        d0_ck[ci] = counts[0]
        ci += 1
    while t < T:
        a, manner, maxdeg = _hist_step(counts, sel, t, e, maxdeg, model, alpha, mu, zeta, rng)
        if win_lo <= t < win_hi:
            incr[t - win_lo] = a
        t += 1
        e += a
        while ci < nck and ckpts[ci] == t:
            e_ck[ci] = e
            max_ck[ci] = maxdeg
            d0_ck[ci] = counts[0]
            ci += 1
    return counts[: maxdeg + 1].copy(), e, maxdeg, e_ck, max_ck, d0_ck, incr


def run_process(params: ModelParams, model: str, steps: int, seed: int,
                plan: ObservationPlan | None = None) -> Trajectory:
    """Simulate G_1 .. G_T on the histogram backend.

    The result is a deterministic function of (params, model, steps, seed, plan).
    """
    check_model(model)
    if model == "hardcopy":
        raise ValueError("hardcopy requires vertex backend")
    if steps < 1:
        raise ValueError(f"steps must be >= 1, got {steps}")
    plan = (plan or ObservationPlan.default(steps)).validated(steps)
    rng = make_rng(seed)
    ck = np.asarray(plan.checkpoints, dtype=np.int64)
    lo, hi = plan.increment_window
    counts, e, maxdeg, e_ck, max_ck, d0_ck, incr = _run_hist(
        np.int64(steps), MODEL_CODE[model], float(params.alpha), float(params.mu),
        float(params.zeta), rng, ck, np.int64(lo), np.int64(hi),
    )
    final = DegreeHistogram(steps, counts, int(e), None, int(maxdeg))
    final.check()
    return Trajectory(
        model=model, params=params, steps=steps, seed=seed, counts=counts,
        edge_count=int(e), max_degree=int(maxdeg), checkpoints=ck, e_at=e_ck,
        max_degree_at=max_ck, d0_at=d0_ck, increment_window=(lo, hi), increments=incr,
    )

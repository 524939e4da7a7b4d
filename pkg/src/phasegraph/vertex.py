"""Per-vertex simulator with adjacency and union-find component tracking.

This is the only backend that can run the hard-copy model, since a copy
step needs the neighbour set of the copied vertex. It also provides the
component statistics and per-cohort degree checks.

Two selection methods are available for the PA and classical manners:

``"bernoulli"``
    literal transcription: one Bernoulli trial per existing vertex, O(t)
    per step. Kept as the reference for backend-equivalence checks.
``"bucketed"``
    vertices are kept sorted by degree (descending) in ``perm``. A PA step
    draws a Binomial count per degree class and picks that many vertices
    uniformly without replacement from the class block by partial
    Fisher-Yates. A classical step draws one Binomial count and a uniform
    subset. Given the counts, independent equal-probability trials select
    a uniformly random subset, so this has the same law as the literal
    method at O(max degree + a) per step.

Vertex ids equal birth times: x_s has id s. Adjacency is a singly linked
list per vertex stored in flat arrays; slot ``2j`` and ``2j+1`` hold the
two directions of the j-th edge.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit

from .params import MODEL_CODE, ModelParams, check_model
from .process import ObservationPlan
from .sampling import binomial, make_rng, randint

METHODS = {"bucketed": 0, "bernoulli": 1}

PA = 0
CLASSICAL = 1
COPY = 2


@njit(cache=True)
def _find(parent, x):
    while parent[x] != x:
        parent[x] = parent[parent[x]]
        x = parent[x]
    return x


@njit(cache=True)
def _union(parent, csize, x, y):
    """Union by size; returns the size of the merged component (0 if already joined)."""
    rx = _find(parent, x)
    ry = _find(parent, y)
    if rx == ry:
        return 0
    if csize[rx] < csize[ry]:
        rx, ry = ry, rx
    parent[ry] = rx
    csize[rx] += csize[ry]
    return csize[rx]


@njit(cache=True)
def _bump(v, deg, perm, pos, lo, cnt):
    # move v from class k to k+1 in the descending-degree order
    k = deg[v]
    i = pos[v]
    f = lo[k]
    w = perm[f]
    perm[f] = v
    pos[v] = f
    perm[i] = w
    pos[w] = i
    lo[k] += 1
    cnt[k] -= 1
    cnt[k + 1] += 1
    deg[v] = k + 1


@njit(cache=True)
def _vstep(sc, deg, head, nbr, nxt, parent, csize, perm, pos, lo, cnt, chosen, stamp,
           model, method, alpha, mu, zeta, track_adj, buckets, rng):
    """Advance G_t to G_{t+1} in place.

    ``sc`` holds [t, e, max_degree, giant_size, n_components, last_increment].
    Caller guarantees vertex arrays of length >= t+2 and adjacency arrays of
    length >= 2*(e + t + 1).
    """
    t = sc[0]
    e = sc[1]
    nv = t + 1
    v = nv
    if model == 0:
        manner = PA
    elif model == 1:
        manner = CLASSICAL
    elif model == 2:
        manner = PA if rng.random() < alpha else CLASSICAL
    else:
        manner = COPY if rng.random() < alpha else CLASSICAL
    m = 0
    if manner == PA:
        scale = mu / (2.0 * e)
        if method == 1:
            for i in range(nv):
                d = deg[i]
                if d == 0:
                    continue
                p = scale * d
                if p >= 1.0 or rng.random() < p:
                    chosen[m] = i
                    m += 1
        else:
            for k in range(1, sc[2] + 1):
                n = cnt[k]
                if n == 0:
                    continue
                s = binomial(rng, n, scale * k)
                base = lo[k]
                for j in range(s):
                    r = base + j + randint(rng, n - j)
                    x = perm[r]
                    y = perm[base + j]
                    perm[base + j] = x
                    pos[x] = base + j
                    perm[r] = y
                    pos[y] = r
                    chosen[m] = x
                    m += 1
    elif manner == CLASSICAL:
        rate = zeta if model != 3 else mu
        p = min(rate, nv) / nv
        if method == 1:
            for i in range(nv):
                if p >= 1.0 or rng.random() < p:
                    chosen[m] = i
                    m += 1
        else:
            s = binomial(rng, nv, p)
            if s == nv:
                for i in range(nv):
                    chosen[i] = i
                m = nv
            elif 2 * s <= nv:
                mark = t + 1
                while m < s:
                    r = randint(rng, nv)
                    if stamp[r] != mark:
                        stamp[r] = mark
                        chosen[m] = r
                        m += 1
            else:
                for i in range(nv):
                    chosen[i] = i
                for j in range(s):
                    r = j + randint(rng, nv - j)
                    x = chosen[r]
                    chosen[r] = chosen[j]
                    chosen[j] = x
                m = s
    else:
        u = randint(rng, nv)
        slot = head[u]
        while slot != -1:
            chosen[m] = nbr[slot]
            m += 1
            slot = nxt[slot]

    # insert the new vertex, then apply the selections
    deg[v] = 0
    head[v] = -1
    parent[v] = v
    csize[v] = 1
    ncomp = sc[4] + 1
    giant = sc[3]
    if giant < 1:
        giant = 1
    maxdeg = sc[2]
    if buckets:
        perm[nv] = v
        pos[v] = nv
        cnt[0] += 1
    for j in range(m):
        w = chosen[j]
        if buckets:
            _bump(w, deg, perm, pos, lo, cnt)
            _bump(v, deg, perm, pos, lo, cnt)
        else:
            deg[w] += 1
            deg[v] += 1
        if deg[w] > maxdeg:
            maxdeg = deg[w]
        if track_adj:
            s0 = 2 * (e + j)
            nbr[s0] = v
            nxt[s0] = head[w]
            head[w] = s0
            nbr[s0 + 1] = w
            nxt[s0 + 1] = head[v]
            head[v] = s0 + 1
        merged = _union(parent, csize, v, w)
        if merged > 0:
            ncomp -= 1
            if merged > giant:
                giant = merged
    if deg[v] > maxdeg:
        maxdeg = deg[v]
    sc[0] = t + 1
    sc[1] = e + m
    sc[2] = maxdeg
    sc[3] = giant
    sc[4] = ncomp
    sc[5] = m
    return manner


@dataclass
class VertexGraph:
    """Per-vertex state of G_t. Arrays are padded past t+1."""

    sc: np.ndarray
    deg: np.ndarray
    head: np.ndarray
    nbr: np.ndarray
    nxt: np.ndarray
    parent: np.ndarray
    csize: np.ndarray
    perm: np.ndarray
    pos: np.ndarray
    lo: np.ndarray
    cnt: np.ndarray
    chosen: np.ndarray
    stamp: np.ndarray
    track_adjacency: bool = True
    buckets: bool = True

    @property
    def t(self) -> int:
        return int(self.sc[0])

    @property
    def edge_count(self) -> int:
        return int(self.sc[1])

    @property
    def max_degree(self) -> int:
        return int(self.sc[2])

    @property
    def giant_size(self) -> int:
        return int(self.sc[3])

    @property
    def n_components(self) -> int:
        return int(self.sc[4])

    @property
    def degree(self) -> np.ndarray:
        return self.deg[: self.t + 1]

    @property
    def birth(self) -> np.ndarray:
        return np.arange(self.t + 1)

    def histogram(self) -> np.ndarray:
        return np.bincount(self.degree, minlength=self.max_degree + 1)

    def component_sizes(self) -> np.ndarray:
        n = self.t + 1
        roots = np.array([_find(self.parent, i) for i in range(n)])
        return np.bincount(roots, minlength=n)[np.unique(roots)]

    def neighbors(self, v: int) -> list[int]:
        if not self.track_adjacency:
            raise ValueError("adjacency is not tracked for this graph")
        out = []
        slot = self.head[v]
        while slot != -1:
            out.append(int(self.nbr[slot]))
            slot = self.nxt[slot]
        return out

    def edges(self) -> np.ndarray:
        """(e, 2) array of edges (u, v) with u < v, each listed once."""
        if not self.track_adjacency:
            raise ValueError("adjacency is not tracked for this graph")
        e = self.edge_count
        a = self.nbr[0: 2 * e: 2]
        b = self.nbr[1: 2 * e: 2]
        return np.sort(np.stack([a, b], axis=1), axis=1).astype(np.int64)

    def copy(self) -> VertexGraph:
        return VertexGraph(**{
            k: (getattr(self, k).copy() if isinstance(getattr(self, k), np.ndarray) else getattr(self, k))
            for k in self.__dataclass_fields__
        })

    def check(self) -> None:
        """Handshake identity, simple-graph property, component bookkeeping."""
        n = self.t + 1
        d = self.degree
        if int(d.sum()) != 2 * self.edge_count:
            raise ValueError("handshake identity violated")
        sizes = self.component_sizes()
        if int(sizes.sum()) != n or len(sizes) != self.n_components:
            raise ValueError("union-find bookkeeping is inconsistent")
        if int(sizes.max()) != self.giant_size:
            raise ValueError("giant size out of date")
        if self.track_adjacency:
            ed = self.edges()
            if len(ed) and np.any(ed[:, 0] == ed[:, 1]):
                raise ValueError("self-loop present")
            if len(np.unique(ed[:, 0] * n + ed[:, 1])) != len(ed):
                raise ValueError("multi-edge present")
            if not np.array_equal(np.bincount(ed.ravel(), minlength=n)[:n], d):
                raise ValueError("adjacency disagrees with degrees")

    def ensure_capacity(self, extra_vertices: int = 1) -> None:
        need_v = self.t + 2 + extra_vertices
        if len(self.deg) < need_v:
            cap = max(need_v, 2 * len(self.deg))
            for name in ("deg", "head", "parent", "csize", "perm", "pos", "chosen", "stamp"):
                old = getattr(self, name)
                fill = -1 if name == "head" else 0
                new = np.full(cap, fill, dtype=old.dtype)
                new[: len(old)] = old
                setattr(self, name, new)
            for name in ("lo", "cnt"):
                old = getattr(self, name)
                new = np.zeros(cap + 2, dtype=old.dtype)
                new[: len(old)] = old
                setattr(self, name, new)
        if self.track_adjacency:
            need_s = 2 * (self.edge_count + self.t + 2)
            if len(self.nbr) < need_s:
                cap = max(need_s, 2 * len(self.nbr))
                for name in ("nbr", "nxt"):
                    old = getattr(self, name)
                    new = np.full(cap, -1, dtype=old.dtype)
                    new[: len(old)] = old
                    setattr(self, name, new)

    @classmethod
    def from_edges(cls, n_vertices: int, edges, track_adjacency: bool = True) -> VertexGraph:
        """Build G_t with t = n_vertices - 1 from an explicit simple edge list.

        Intended for constructing test graphs; no growth rule is implied.
        """
        g = _empty_graph(n_vertices + 2, 2 * len(edges) + 8, track_adjacency, True)
        n = n_vertices
        g.sc[:] = [n - 1, 0, 0, 1, n, 0]
        g.parent[:n] = np.arange(n)
        g.csize[:n] = 1
        g.perm[:n] = np.arange(n)
        g.pos[:n] = np.arange(n)
        g.cnt[0] = n
        seen = set()
        for j, (u, v) in enumerate(edges):
            u, v = int(u), int(v)
            key = (min(u, v), max(u, v))
            if u == v or key in seen:
                raise ValueError(f"edge {u}-{v} would break simplicity")
            seen.add(key)
            _bump(u, g.deg, g.perm, g.pos, g.lo, g.cnt)
            _bump(v, g.deg, g.perm, g.pos, g.lo, g.cnt)
            if track_adjacency:
                s0 = 2 * j
                g.nbr[s0], g.nxt[s0], g.head[u] = v, g.head[u], s0
                g.nbr[s0 + 1], g.nxt[s0 + 1], g.head[v] = u, g.head[v], s0 + 1
            if _union(g.parent, g.csize, u, v):
                g.sc[4] -= 1
        g.sc[1] = len(edges)
        g.sc[2] = int(g.deg[:n].max()) if n else 0
        g.sc[3] = int(max(g.csize[_find(g.parent, i)] for i in range(n)))
        return g


def _empty_graph(cap_v, cap_s, track_adj, buckets) -> VertexGraph:
    z = lambda: np.zeros(cap_v, dtype=np.int64)  # noqa: E731
    return VertexGraph(
        sc=np.zeros(6, dtype=np.int64),
        deg=z(), head=np.full(cap_v, -1, dtype=np.int64),
        nbr=np.full(cap_s if track_adj else 1, -1, dtype=np.int32),
        nxt=np.full(cap_s if track_adj else 1, -1, dtype=np.int32),
        parent=z(), csize=z(), perm=z(), pos=z(),
        lo=np.zeros(cap_v + 2, dtype=np.int64), cnt=np.zeros(cap_v + 2, dtype=np.int64),
        chosen=z(), stamp=np.zeros(cap_v, dtype=np.int64),
        track_adjacency=track_adj, buckets=buckets,
    )


def init_graph(track_adjacency: bool = True) -> VertexGraph:
    """G_1 as a vertex graph: x0 - x1."""
    return VertexGraph.from_edges(2, [(0, 1)], track_adjacency=track_adjacency)


def _step(graph: VertexGraph, params: ModelParams, model: str, rng, method: str,
          inplace: bool) -> VertexGraph:
    check_model(model)
    if method not in METHODS:
        raise ValueError(f"unknown method {method!r}")
    if model == "hardcopy" and not graph.track_adjacency:
        raise ValueError("hard-copy steps need adjacency")
    if method == "bucketed" and model in ("ba", "mixed") and not graph.buckets:
        raise ValueError("graph was built without degree buckets")
    g = graph if inplace else graph.copy()
    g.ensure_capacity()
    _vstep(g.sc, g.deg, g.head, g.nbr, g.nxt, g.parent, g.csize, g.perm, g.pos, g.lo, g.cnt,
           g.chosen, g.stamp, MODEL_CODE[model], METHODS[method], float(params.alpha),
           float(params.mu), float(params.zeta), g.track_adjacency, g.buckets, rng)
    return g


def step_vertex(graph: VertexGraph, params: ModelParams, model: str, rng,
                method: str = "bucketed", inplace: bool = False) -> VertexGraph:
    """One classical / BA / mixed step on the per-vertex state."""
    if model == "hardcopy":
        raise ValueError("use step_hardcopy for the hard-copy model")
    return _step(graph, params, model, rng, method, inplace)


def step_hardcopy(graph: VertexGraph, params: ModelParams, rng, inplace: bool = False) -> VertexGraph:
    """One hard-copy step.

    With probability alpha the new vertex takes the neighbour set of a
    uniformly chosen existing vertex u (never an edge to u itself);
    otherwise each existing vertex is joined w.p. min(mu/n, 1), n = t+1.
    """
    if not graph.track_adjacency:
        raise ValueError("hard-copy steps need adjacency")
    return _step(graph, params, "hardcopy", rng, "bucketed", inplace)


def giant_fraction(graph: VertexGraph) -> float:
    """Largest component size over t+1."""
    return graph.giant_size / (graph.t + 1)


@dataclass
class CohortReport:
    steps: int
    nu: float
    bounds: np.ndarray
    passed: np.ndarray
    max_degree: int
    max_degree_bound: float

    @property
    def all_cohorts_pass(self) -> bool:
        return bool(self.passed.all())

    @property
    def max_degree_pass(self) -> bool:
        return self.max_degree <= self.max_degree_bound

    @property
    def failing(self) -> np.ndarray:
        return np.flatnonzero(~self.passed) + 1


def cohort_degree_bound_check(graph: VertexGraph, nu: float) -> CohortReport:
    """Compare d_{x_s}(T) with (T/s)^(1/(2-nu)) (log T)^3 for every s >= 1.

    Also reports the max-degree variant Delta_T <= T^(1/(2-nu)) (log T)^3.
    """
    T = graph.t
    if T < 3:
        raise ValueError("cohort check needs T >= 3")
    if not 0 < nu < 1:
        raise ValueError("nu must lie in (0, 1)")
    s = np.arange(1, T + 1, dtype=float)
    logc = math.log(T) ** 3
    bounds = (T / s) ** (1.0 / (2.0 - nu)) * logc
    passed = graph.degree[1:] <= bounds
    return CohortReport(T, nu, bounds, passed, graph.max_degree,
                        T ** (1.0 / (2.0 - nu)) * logc)


def write_edge_list(graph: VertexGraph, path) -> None:
    """One ``u v`` pair per line, vertices named by birth index."""
    np.savetxt(path, graph.edges(), fmt="%d")


# --- whole-run kernel --------------------------------------------------------

@njit(cache=True)
def _grow(arr, cap, fill):
    out = np.full(cap, fill, dtype=arr.dtype)
    out[: len(arr)] = arr
    return out


@njit(cache=True)
def _run_vertex(T, model, method, alpha, mu, zeta, track_adj, buckets, init_slots, rng,
                ckpts, win_lo, win_hi):
    cap_v = T + 3
    sc = np.zeros(6, dtype=np.int64)
    deg = np.zeros(cap_v, dtype=np.int64)
    head = np.full(cap_v, -1, dtype=np.int64)
    cap_s = max(init_slots, 8) if track_adj else 1
    nbr = np.full(cap_s, -1, dtype=np.int32)
    nxt = np.full(cap_s, -1, dtype=np.int32)
    parent = np.arange(cap_v)
    csize = np.ones(cap_v, dtype=np.int64)
    perm = np.arange(cap_v)
    pos = np.arange(cap_v)
    lo = np.zeros(cap_v + 2, dtype=np.int64)
    cnt = np.zeros(cap_v + 2, dtype=np.int64)
    chosen = np.zeros(cap_v, dtype=np.int64)
    stamp = np.zeros(cap_v, dtype=np.int64)
    # G_1
    deg[0] = 1
    deg[1] = 1
    if track_adj:
        nbr[0] = 1
        head[0] = 0
        nbr[1] = 0
        head[1] = 1
    parent[1] = 0
    csize[0] = 2
    cnt[1] = 2
    lo[0] = 2
    sc[0] = 1
    sc[1] = 1
    sc[2] = 1
    sc[3] = 2
    sc[4] = 1
    nck = len(ckpts)
    e_ck = np.zeros(nck, dtype=np.int64)
    max_ck = np.zeros(nck, dtype=np.int64)
    d0_ck = np.zeros(nck, dtype=np.int64)
    incr = np.zeros(win_hi - win_lo, dtype=np.int32)
    ci = 0
    while ci < nck and ckpts[ci] == 1:
        e_ck[ci] = 1
        max_ck[ci] = 1
        ci += 1
    while sc[0] < T:
        t = sc[0]
        if track_adj and 2 * (sc[1] + t + 2) > len(nbr):
            newcap = max(2 * len(nbr), 2 * (sc[1] + t + 2))
            nbr = _grow(nbr, newcap, -1)
            nxt = _grow(nxt, newcap, -1)
        _vstep(sc, deg, head, nbr, nxt, parent, csize, perm, pos, lo, cnt, chosen, stamp,
               model, method, alpha, mu, zeta, track_adj, buckets, rng)
        a = sc[5]
        if win_lo <= t < win_hi:
            incr[t - win_lo] = a
        while ci < nck and ckpts[ci] == sc[0]:
            e_ck[ci] = sc[1]
            max_ck[ci] = sc[2]
            z = 0
            for i in range(sc[0] + 1):
                if deg[i] == 0:
                    z += 1
            d0_ck[ci] = z
            ci += 1
    return (sc, deg, head, nbr, nxt, parent, csize, perm, pos, lo, cnt, chosen, stamp,
            e_ck, max_ck, d0_ck, incr)


def expected_edges(model: str, params: ModelParams, steps: int) -> float:
    """Exact E[e_T] from the mean one-step increment.

    BA: mu (edge probabilities never cap when mu <= 2). Classical: min(zeta, n)
    over n = t+1 existing vertices. Hard copy: alpha * 2e/n + (1-alpha) min(mu, n),
    which is linear in e, so the mean recursion is exact.
    """
    check_model(model)
    a, mu, z = params.alpha, params.mu, params.zeta
    e = 1.0
    for t in range(1, steps):
        n = t + 1
        if model == "ba":
            e += min(mu, 2.0 * e) if mu > 2 else mu
        elif model == "classical":
            e += min(z, n)
        elif model == "mixed":
            e += a * (mu if mu <= 2 else min(mu, 2.0 * e)) + (1 - a) * min(z, n)
        else:
            e += a * 2.0 * e / n + (1 - a) * min(mu, n)
    return e


def projected_memory_bytes(model: str, params: ModelParams, steps: int, track_adjacency: bool) -> int:
    """Rough peak memory of a vertex run, with 50% headroom on the edge count."""
    per_vertex = 8 * 13
    total = (steps + 3) * per_vertex
    if track_adjacency:
        total += int(1.5 * 2 * expected_edges(model, params, steps) + 2 * steps) * 8
    return int(total)


@dataclass
class VertexTrajectory:
    model: str
    params: ModelParams
    steps: int
    seed: int
    method: str
    graph: VertexGraph
    checkpoints: np.ndarray
    e_at: np.ndarray
    max_degree_at: np.ndarray
    d0_at: np.ndarray
    increment_window: tuple[int, int]
    increments: np.ndarray

    @property
    def counts(self) -> np.ndarray:
        return self.graph.histogram()

    @property
    def edge_count(self) -> int:
        return self.graph.edge_count

    @property
    def max_degree(self) -> int:
        return self.graph.max_degree

    @property
    def d0(self) -> int:
        return int(self.counts[0])


def run_vertex(params: ModelParams, model: str, steps: int, seed: int,
               plan: ObservationPlan | None = None, method: str = "bucketed",
               track_adjacency: bool | None = None,
               memory_cap_bytes: int | None = None) -> VertexTrajectory:
    """Simulate G_1 .. G_T on the per-vertex backend.

    Adjacency is tracked for hard-copy runs, or when an edge dump is
    requested, unless ``track_adjacency`` says otherwise.
    """
    check_model(model)
    if steps < 1:
        raise ValueError(f"steps must be >= 1, got {steps}")
    if method not in METHODS:
        raise ValueError(f"unknown method {method!r}")
    plan = (plan or ObservationPlan.default(steps)).validated(steps)
    if track_adjacency is None:
        track_adjacency = model == "hardcopy" or plan.edge_dump
    if model == "hardcopy" and not track_adjacency:
        raise ValueError("hard-copy runs need adjacency")
    if memory_cap_bytes is not None:
        need = projected_memory_bytes(model, params, steps, track_adjacency)
        if need > memory_cap_bytes:
            raise MemoryError(
                f"projected memory {need / 2**20:.0f} MiB exceeds cap "
                f"{memory_cap_bytes / 2**20:.0f} MiB for T={steps}"
            )
    buckets = method == "bucketed" and model in ("ba", "mixed")
    init_slots = int(2.2 * expected_edges(model, params, steps)) + 16 if track_adjacency else 1
    rng = make_rng(seed)
    ck = np.asarray(plan.checkpoints, dtype=np.int64)
    lo, hi = plan.increment_window
    out = _run_vertex(np.int64(steps), MODEL_CODE[model], METHODS[method], float(params.alpha),
                      float(params.mu), float(params.zeta), track_adjacency, buckets,
                      np.int64(init_slots), rng, ck, np.int64(lo), np.int64(hi))
    (sc, deg, head, nbr, nxt, parent, csize, perm, pos, lo_, cnt, chosen, stamp,
     e_ck, max_ck, d0_ck, incr) = out
    g = VertexGraph(sc, deg, head, nbr, nxt, parent, csize, perm, pos, lo_, cnt, chosen, stamp,
                    track_adjacency=track_adjacency, buckets=buckets)
    return VertexTrajectory(model, params, steps, seed, method, g, ck, e_ck, max_ck, d0_ck,
                            (lo, hi), incr)

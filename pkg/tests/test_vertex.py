import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from phasegraph.params import ModelParams
from phasegraph.process import ObservationPlan, run_process
from phasegraph.vertex import (
    VertexGraph, cohort_degree_bound_check, expected_edges, giant_fraction, init_graph,
    projected_memory_bytes, run_vertex, step_hardcopy, step_vertex, write_edge_list,
)


def test_init_graph():
    g = init_graph()
    assert g.t == 1 and g.edge_count == 1
    assert g.giant_size == 2 and g.n_components == 1
    assert sorted(g.neighbors(0)) == [1]
    g.check()


def test_from_edges_components():
    g = VertexGraph.from_edges(6, [(0, 1), (1, 2), (3, 4)])
    assert g.n_components == 3
    assert g.giant_size == 3
    assert sorted(g.component_sizes().tolist()) == [1, 2, 3]
    assert g.histogram().tolist() == [1, 4, 1]
    with pytest.raises(ValueError):
        VertexGraph.from_edges(3, [(0, 1), (1, 0)])
    with pytest.raises(ValueError):
        VertexGraph.from_edges(3, [(2, 2)])


@pytest.mark.parametrize("model,method", [
    ("ba", "bucketed"), ("ba", "bernoulli"), ("classical", "bucketed"),
    ("classical", "bernoulli"), ("mixed", "bucketed"), ("mixed", "bernoulli"),
])
def test_stepwise_graph_stays_consistent(rng, model, method):
    p = ModelParams(alpha=0.5, zeta=2.0)
    g = init_graph()
    for _ in range(300):
        g = step_vertex(g, p, model, rng, method=method, inplace=True)
    g.check()
    assert g.t == 301


def test_step_copy_semantics(rng):
    g = init_graph()
    g2 = step_vertex(g, ModelParams(), "ba", rng)
    assert g.t == 1 and g2.t == 2
    with pytest.raises(ValueError):
        step_vertex(g, ModelParams(), "hardcopy", rng)


def test_pure_copy_stays_complete_bipartite(rng):
    # copying a vertex's neighbour set from one edge always gives K_{a,b}
    g = init_graph()
    for _ in range(200):
        g = step_hardcopy(g, ModelParams(alpha=1.0), rng, inplace=True)
    g.check()
    vals, cnts = np.unique(g.degree[: g.t + 1], return_counts=True)
    if len(vals) == 1:
        # balanced sides a = b
        assert cnts[0] == 2 * vals[0]
    else:
        # side sizes are each other's degrees
        assert len(vals) == 2
        assert vals[0] == cnts[1] and vals[1] == cnts[0]
    assert g.edge_count == (int(vals.prod()) if len(vals) == 2 else int(vals[0]) ** 2)


def test_hardcopy_mixture_consistent(rng):
    g = init_graph()
    for _ in range(400):
        g = step_hardcopy(g, ModelParams(alpha=0.5), rng, inplace=True)
    g.check()


@settings(max_examples=20, deadline=None)
@given(
    model=st.sampled_from(["ba", "classical", "mixed", "hardcopy"]),
    alpha=st.floats(0.0, 1.0),
    steps=st.integers(3, 400),
    seed=st.integers(0, 2**63),
)
def test_run_vertex_invariants(model, alpha, steps, seed):
    p = ModelParams(alpha=alpha, zeta=1.5)
    tr = run_vertex(p, model, steps, seed, track_adjacency=True)
    tr.graph.check()
    assert tr.graph.t == steps
    assert tr.counts.sum() == steps + 1


def test_ba_giant_is_all_non_isolated():
    for seed in range(5):
        g = run_vertex(ModelParams(), "ba", 5000, seed).graph
        assert g.giant_size == g.t + 1 - g.histogram()[0]
        assert g.n_components == 1 + g.histogram()[0]


def test_giant_fraction_near_limit():
    fr = np.mean([giant_fraction(run_vertex(ModelParams(), "ba", 20_000, s).graph) for s in range(5)])
    assert abs(fr - (1 - math.exp(-1))) < 0.01


def test_backends_agree_in_law():
    p = ModelParams()
    T, R = 2000, 150
    h = [run_process(p, "ba", T, s) for s in range(R)]
    for method in ("bucketed", "bernoulli"):
        v = [run_vertex(p, "ba", T, 10_000 + s, method=method) for s in range(R)]
        assert stats.ks_2samp([x.d0 for x in h], [x.d0 for x in v]).pvalue > 1e-3
        assert stats.ks_2samp([x.edge_count for x in h], [x.edge_count for x in v]).pvalue > 1e-3


def test_trajectory_bookkeeping():
    tr = run_vertex(ModelParams(), "ba", 1600, 4)
    assert tuple(tr.checkpoints) == (100, 200, 400, 800, 1600)
    assert tr.e_at[-1] == tr.edge_count
    assert tr.d0_at[-1] == tr.d0
    assert tr.increments.sum() == tr.e_at[-1] - tr.e_at[-2]


@pytest.mark.parametrize("model,alpha", [("classical", 0.0), ("hardcopy", 0.4), ("hardcopy", 0.7)])
def test_expected_edges_matches_simulation(model, alpha):
    p = ModelParams(alpha=alpha, zeta=1.0)
    T, R = 300, 1500
    e = np.array([run_vertex(p, model, T, s).edge_count for s in range(R)], dtype=float)
    mean = expected_edges(model, p, T)
    assert abs(e.mean() - mean) < 4 * e.std() / math.sqrt(R)


def test_expected_edges_simple_cases():
    assert expected_edges("ba", ModelParams(), 100) == pytest.approx(100.0)
    # classical with zeta >= n is the complete graph
    assert expected_edges("classical", ModelParams(alpha=0.0, zeta=100.0), 10) == pytest.approx(55.0)


def test_memory_cap():
    p = ModelParams(alpha=0.9)
    need = projected_memory_bytes("hardcopy", p, 5000, True)
    with pytest.raises(MemoryError, match="exceeds cap"):
        run_vertex(p, "hardcopy", 5000, 1, memory_cap_bytes=need // 2)


def test_cohort_check():
    g = run_vertex(ModelParams(), "ba", 20_000, 3).graph
    rep = cohort_degree_bound_check(g, 0.1)
    assert rep.all_cohorts_pass and rep.max_degree_pass
    assert len(rep.bounds) == g.t
    assert len(rep.failing) == 0
    with pytest.raises(ValueError):
        cohort_degree_bound_check(init_graph(), 0.1)


def test_edge_dump(tmp_path):
    tr = run_vertex(ModelParams(), "ba", 500, 2, plan=ObservationPlan((500,), (0, 0), True))
    path = tmp_path / "edges.txt"
    write_edge_list(tr.graph, path)
    ed = np.loadtxt(path, dtype=int).reshape(-1, 2)
    assert len(ed) == tr.edge_count
    assert np.all(ed[:, 0] < ed[:, 1])

import numpy as np
import pytest

from phasegraph.harness.config import parse_config
from phasegraph.harness.ensemble import ReplicaError, run_ensemble, run_ensemble_full, run_records
from phasegraph.process import run_process
from phasegraph.sampling import derive_seed
from phasegraph.vertex import run_vertex

BA = parse_config("model=ba\nsteps=3000\nreplicas=6\nseed=99")


def test_single_replica_equals_direct_run():
    c = BA.with_(replicas=1)
    s = run_ensemble(c, use_cache=False)
    tr = run_process(c.params, "ba", 3000, derive_seed(99, 0))
    assert np.array_equal(s.count_mean, tr.counts)
    assert s.e_final[0] == tr.edge_count
    assert s.seeds == (derive_seed(99, 0),)


def test_same_config_same_summary():
    a = run_ensemble(BA, use_cache=False)
    b = run_ensemble(BA, use_cache=False)
    assert np.array_equal(a.mean_fraction, b.mean_fraction)
    assert np.array_equal(a.increment_freq, b.increment_freq)


def test_parallel_equals_serial():
    a = run_ensemble(BA, use_cache=False, workers=1)
    b = run_ensemble(BA, use_cache=False, workers=3)
    assert np.array_equal(a.count_mean, b.count_mean)
    assert np.array_equal(a.e_matrix, b.e_matrix)
    assert a.seeds == b.seeds


def test_cache_returns_same_object():
    c = BA.with_(seed=1234)
    assert run_ensemble_full(c) is run_ensemble_full(c)
    assert run_ensemble_full(c, use_cache=False) is not run_ensemble_full(c)


def test_vertex_records():
    c = parse_config("model=ba\nsteps=2000\nreplicas=3\nseed=5\nbackend=vertex")
    recs = run_records(c, workers=1)
    for i, r in enumerate(recs):
        g = run_vertex(c.params, "ba", 2000, derive_seed(5, i)).graph
        assert r.giant == g.giant_size / 2001
        assert r.giant_matches_isolated and r.cohorts_pass and r.max_degree_pass
    s = run_ensemble(c, use_cache=False)
    assert s.giant is not None and len(s.giant) == 3


def test_replica_failure_names_index_and_seed():
    c = parse_config("model=hardcopy\nalpha=0.9\nsteps=5000\nreplicas=2\nseed=8\nmemory_cap_mb=0.01")
    with pytest.raises(ReplicaError) as e:
        run_ensemble(c, use_cache=False, workers=1)
    assert e.value.index == 0 and e.value.seed == derive_seed(8, 0)
    assert "seed" in str(e.value)


def test_edge_dump(tmp_path):
    c = parse_config(f"model=ba\nsteps=300\nreplicas=2\nbackend=vertex\nout_dir={tmp_path}", edge_dump=True)
    run_records(c, workers=1)
    assert sorted(p.name for p in tmp_path.iterdir()) == ["edges_0000.txt", "edges_0001.txt"]

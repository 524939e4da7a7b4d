"""Replica-level ensemble execution.

Replica ``i`` runs with ``derive_seed(master_seed, i)``. Replicas may run in
worker processes, but results are collected by index and aggregated in
index order, so the summary does not depend on scheduling.
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from ..estimators import EnsembleSummary, summarize
from ..params import ModelParams
from ..process import ObservationPlan, run_process
from ..sampling import derive_seed
from ..vertex import cohort_degree_bound_check, run_vertex
from .config import RunConfig


class ReplicaError(RuntimeError):
    def __init__(self, index: int, seed: int, cause: BaseException):
        self.index, self.seed = index, seed
        super().__init__(f"replica {index} (seed {seed}) failed: {cause!r}")


@dataclass
class ReplicaRecord:
    """What the harness keeps from one replica; the graph itself is dropped."""

    model: str
    params: ModelParams
    steps: int
    seed: int
    counts: np.ndarray
    edge_count: int
    max_degree: int
    checkpoints: np.ndarray
    e_at: np.ndarray
    d0_at: np.ndarray
    increment_window: tuple[int, int]
    increments: np.ndarray
    giant: float | None = None
    giant_matches_isolated: bool | None = None
    cohorts_pass: bool | None = None
    max_degree_pass: bool | None = None

    @property
    def d0(self) -> int:
        return int(self.counts[0]) if len(self.counts) else 0


def run_replica(config: RunConfig, index: int) -> ReplicaRecord:
    seed = derive_seed(config.seed, index)
    plan: ObservationPlan = config.plan
    if config.backend == "histogram":
        tr = run_process(config.params, config.model, config.steps, seed, plan)
        return ReplicaRecord(tr.model, tr.params, tr.steps, seed, tr.counts, tr.edge_count,
                             tr.max_degree, tr.checkpoints, tr.e_at, tr.d0_at,
                             tr.increment_window, tr.increments)
    tr = run_vertex(config.params, config.model, config.steps, seed, plan, method=config.method,
                    memory_cap_bytes=config.memory_cap_bytes)
    g = tr.graph
    counts = g.histogram()
    rec = ReplicaRecord(tr.model, tr.params, tr.steps, seed, counts, g.edge_count, g.max_degree,
                        tr.checkpoints, tr.e_at, tr.d0_at, tr.increment_window, tr.increments,
                        giant=g.giant_size / (g.t + 1))
    if config.model == "ba":
        # every non-isolated BA vertex sits in the component of x0
        rec.giant_matches_isolated = g.giant_size == g.t + 1 - int(counts[0])
        if g.t >= 3:
            rep = cohort_degree_bound_check(g, config.params.nu)
            rec.cohorts_pass = rep.all_cohorts_pass
            rec.max_degree_pass = rep.max_degree_pass
    if plan.edge_dump:
        from ..vertex import write_edge_list

        os.makedirs(config.out_dir, exist_ok=True)
        write_edge_list(g, os.path.join(config.out_dir, f"edges_{index:04d}.txt"))
    return rec


def _guarded(config: RunConfig, index: int) -> ReplicaRecord:
    try:
        return run_replica(config, index)
    except Exception as exc:  # noqa: BLE001 - re-raised with replica identity
        raise ReplicaError(index, derive_seed(config.seed, index), exc) from exc


def default_workers() -> int:
    return int(os.environ.get("PHASEGRAPH_WORKERS", os.cpu_count() or 1))


def run_records(config: RunConfig, workers: int | None = None) -> list[ReplicaRecord]:
    workers = default_workers() if workers is None else workers
    idx = range(config.replicas)
    if workers <= 1 or config.replicas == 1:
        return [_guarded(config, i) for i in idx]
    with ProcessPoolExecutor(max_workers=min(workers, config.replicas)) as pool:
        return list(pool.map(_guarded, [config] * config.replicas, idx))


@dataclass
class Ensemble:
    config: RunConfig
    summary: EnsembleSummary
    records: list[ReplicaRecord]


@lru_cache(maxsize=32)
def _cached(config: RunConfig) -> Ensemble:
    recs = run_records(config)
    return Ensemble(config, summarize(recs, [r.seed for r in recs]), recs)


def run_ensemble_full(config: RunConfig, use_cache: bool = True, workers: int | None = None) -> Ensemble:
    """Summary plus per-replica records. Cached per config unless ``use_cache`` is false."""
    if use_cache and workers is None:
        return _cached(config)
    recs = run_records(config, workers)
    return Ensemble(config, summarize(recs, [r.seed for r in recs]), recs)


def run_ensemble(config: RunConfig, use_cache: bool = True, workers: int | None = None) -> EnsembleSummary:
    """Run ``config.replicas`` replicas and aggregate them in index order."""
    return run_ensemble_full(config, use_cache, workers).summary


def clear_cache() -> None:
    _cached.cache_clear()

"""CSV and JSON writers.

Floats are written with ``repr`` so files round-trip exactly and two runs
of the same configuration produce identical bytes. Wall-clock timings go
to a separate ``timing.json`` so they never perturb the report itself.
"""

from __future__ import annotations

import csv
import json
import math
import os

import numpy as np

from ..estimators import EnsembleSummary
from ..recurrence import stationary_columns

DEGREE_COLUMNS = ("k", "count_mean", "fraction_mean", "ci_half", "d_lower", "d_upper", "d_plugin")
INCREMENT_COLUMNS = ("k", "frequency")
TRACE_COLUMNS = ("t", "e_mean", "e_min", "e_max")
SOLVE_COLUMNS = ("k", "d_lower", "d_upper", "d_plugin")


def _fmt(x) -> str:
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    if math.isnan(x):
        return "nan"
    if x.is_integer() and abs(x) < 2**53:
        return str(int(x))
    return repr(x)


def _write_rows(path, header, rows) -> None:
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])


def read_csv(path) -> dict[str, np.ndarray]:
    with open(path, newline="") as fh:
        r = csv.reader(fh)
        header = next(r)
        rows = [[float(v) for v in row] for row in r]
    arr = np.array(rows, dtype=float).reshape(-1, len(header))
    return {h: arr[:, i] for i, h in enumerate(header)}


def write_degree_csv(path, summary: EnsembleSummary) -> None:
    n = len(summary.mean_fraction)
    cols = stationary_columns(summary.model, summary.params, max(n - 1, 1), summary.increment_freq)
    rows = (
        (k, summary.count_mean[k], summary.mean_fraction[k], summary.ci[k],
         cols["d_lower"][k], cols["d_upper"][k], cols["d_plugin"][k])
        for k in range(n)
    )
    _write_rows(path, DEGREE_COLUMNS, rows)


def write_increment_csv(path, summary: EnsembleSummary) -> None:
    _write_rows(path, INCREMENT_COLUMNS, enumerate(summary.increment_freq))


def write_trace_csv(path, summary: EnsembleSummary) -> None:
    _write_rows(path, TRACE_COLUMNS, (tuple(r) for r in summary.e_trace))


def write_solve_csv(path, cols: dict[str, np.ndarray]) -> None:
    n = len(cols["d_upper"])
    _write_rows(path, SOLVE_COLUMNS,
                ((k, cols["d_lower"][k], cols["d_upper"][k], cols["d_plugin"][k]) for k in range(n)))


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return [_jsonable(v) for v in x.tolist()]
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return x if math.isfinite(x) else str(x)
    return x


def dumps(obj) -> str:
    return json.dumps(_jsonable(obj), indent=2) + "\n"


def write_json(path, obj) -> None:
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w") as fh:
        fh.write(dumps(obj))


def write_simulation(out_dir, summary: EnsembleSummary, config_echo: dict) -> dict[str, str]:
    """Write the degree, increment and trace CSVs plus a summary JSON."""
    paths = {
        "degree": os.path.join(out_dir, "degree.csv"),
        "increments": os.path.join(out_dir, "increments.csv"),
        "trace": os.path.join(out_dir, "trace.csv"),
        "summary": os.path.join(out_dir, "summary.json"),
    }
    write_degree_csv(paths["degree"], summary)
    write_increment_csv(paths["increments"], summary)
    write_trace_csv(paths["trace"], summary)
    write_json(paths["summary"], {
        "config": config_echo,
        "replica_seeds": list(summary.seeds),
        "mean_edges": float(summary.e_final.mean()),
        "mean_isolated_fraction": float(summary.d0_final.mean() / summary.steps),
        "max_degree": summary.max_degree,
        "giant_mean": summary.giant_mean,
    })
    return paths

"""Edge growth and degree tail of the hard-copy model.

Copying a vertex duplicates all of its edges, so the edge count per step
depends on the copy probability. Below one half the mean edges per step
settle at (1 - alpha) mu / (1 - 2 alpha), though the approach slows
as alpha nears one half; above one half they grow faster than linearly.

    python demos/hard_copy_growth.py
"""

from phasegraph import ModelParams, run_vertex
from phasegraph.estimators import fit_power_tail, summarize

STEPS = 20_000
REPLICAS = 5

for alpha in (0.2, 0.3, 0.4):
    params = ModelParams(alpha=alpha, mu=1.0)
    runs = [run_vertex(params, "hardcopy", STEPS, seed=s) for s in range(REPLICAS)]
    summary = summarize(runs, seeds=range(REPLICAS))
    limit = (1 - alpha) / (1 - 2 * alpha)
    fit = fit_power_tail(summary.mean_fraction, k_range=(5, 50))
    print(f"alpha={alpha}: edges/step {summary.e_final.mean() / STEPS:.3f} "
          f"(limit {limit:.3f}), tail slope {fit.value:.2f}")

"""Power law versus geometric tails in the mixed model.

Sweeps the probability of a preferential-attachment step. Whenever it is
positive the solved stationary sequence has a power-law tail whose ratio
d(2k)/d(k) tends to a constant. At zero the process is purely classical
and the ratio collapses as the tail becomes geometric.

    python demos/phase_transition.py
"""

from phasegraph import ModelParams
from phasegraph.recurrence import model_family, predicted_exponent, stationary_columns

K_MAX = 4000

print("alpha  family      d(2000)/d(1000)  predicted tail")
for alpha in (0.0, 0.1, 0.25, 0.5, 0.75, 1.0):
    params = ModelParams(alpha=alpha, mu=1.0, zeta=1.0)
    model = "classical" if alpha == 0.0 else "mixed"
    family = model_family(model, params)
    d = stationary_columns(model, params, K_MAX)["d_upper"]
    ratio = d[2000] / d[1000] if d[1000] > 0 else 0.0
    tail = predicted_exponent(params, family)
    print(f"{alpha:5.2f}  {family:10s}  {ratio:.3e}        {tail}")

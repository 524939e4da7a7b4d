"""Growing random graphs with preferential, classical and copying attachment.

Simulators (a degree-histogram backend and a per-vertex backend), the
master recurrences for the expected degree counts, and estimators that
compare the two.
"""

from .params import ModelParams, RegimeWarning
from .process import ObservationPlan, run_process
from .vertex import run_vertex

__all__ = ["ModelParams", "RegimeWarning", "ObservationPlan", "run_process", "run_vertex"]
__version__ = "0.1.0"

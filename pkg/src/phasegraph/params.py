"""Model parameters shared by every backend and by the recurrence engine."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

MODELS = ("ba", "classical", "mixed", "hardcopy")

# integer codes used inside the jitted kernels
MODEL_CODE = {"ba": 0, "classical": 1, "mixed": 2, "hardcopy": 3}


class RegimeWarning(UserWarning):
    """PA edge rate above 2, where the degree results are only conjectured."""


@dataclass(frozen=True)
class ModelParams:
    """Process parameters.

    Parameters
    ----------
    alpha : float
        Probability that a step uses the preferential-attachment manner
        (mixed model) or copies a vertex (hard-copy model).
    mu : float
        PA edge rate; also the classical rate of the hard-copy model.
    zeta : float
        Classical edge rate of the mixed model.
    nu : float
        Small exponent used by the degree-bound checks.
    """

    alpha: float = 1.0
    mu: float = 1.0
    zeta: float = 1.0
    nu: float = 0.1

    def __post_init__(self):
        for name in ("alpha", "mu", "zeta", "nu"):
            v = getattr(self, name)
            if not isinstance(v, (int, float)) or isinstance(v, bool) or not math.isfinite(v):
                raise ValueError(f"{name} must be a finite number, got {v!r}")
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError(f"alpha must lie in [0, 1], got {self.alpha}")
        if self.mu <= 0:
            raise ValueError(f"mu must be positive, got {self.mu}")
        if self.zeta <= 0:
            raise ValueError(f"zeta must be positive, got {self.zeta}")
        if not 0.0 < self.nu < 1.0:
            raise ValueError(f"nu must lie in (0, 1), got {self.nu}")
        if self.outside_proved_regime:
            warnings.warn(
                f"mu={self.mu} > 2: degree-sequence results are conjectural here",
                RegimeWarning,
                stacklevel=3,
            )

    @property
    def xi(self) -> float:
        """Mean number of edges added per step once t exceeds both rates."""
        return self.alpha * self.mu + (1.0 - self.alpha) * self.zeta

    @property
    def outside_proved_regime(self) -> bool:
        return self.mu > 2.0


def check_model(model: str) -> str:
    if model not in MODELS:
        raise ValueError(f"unknown model {model!r}; expected one of {MODELS}")
    return model

import math

import pytest

from phasegraph.params import ModelParams, RegimeWarning, check_model


def test_defaults_and_xi():
    p = ModelParams()
    assert (p.alpha, p.mu, p.zeta, p.nu) == (1.0, 1.0, 1.0, 0.1)
    q = ModelParams(alpha=0.25, mu=2.0, zeta=1.0)
    assert math.isclose(q.xi, 0.25 * 2.0 + 0.75 * 1.0)


@pytest.mark.parametrize("kw", [
    {"alpha": 1.5}, {"alpha": -0.1}, {"mu": 0.0}, {"zeta": -1.0}, {"nu": 0.0}, {"nu": 1.0},
    {"mu": float("nan")}, {"alpha": True},
])
def test_invalid_parameters_rejected(kw):
    with pytest.raises(ValueError):
        ModelParams(**kw)


def test_large_mu_warns_but_constructs():
    with pytest.warns(RegimeWarning):
        p = ModelParams(mu=3.0)
    assert p.outside_proved_regime


def test_check_model():
    assert check_model("ba") == "ba"
    with pytest.raises(ValueError):
        check_model("er")

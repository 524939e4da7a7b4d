import pytest

from phasegraph.harness.config import KEYS, OUT_DIR_ENV, ConfigError, RunConfig, parse_config
from phasegraph.params import ModelParams

HAPPY = "model=ba\nmu=1.0\nsteps=100000\nreplicas=50\nseed=42\nbackend=histogram"


def test_happy_path_defaults():
    c = parse_config(HAPPY)
    assert c.model == "ba" and c.steps == 100_000 and c.replicas == 50 and c.seed == 42
    assert c.params == ModelParams(mu=1.0)
    assert c.plan.checkpoints == (6250, 12500, 25000, 50000, 100000)
    assert c.plan.increment_window == (50000, 100000)
    assert c.memory_cap_mb is None


def test_comments_and_whitespace():
    c = parse_config("# header\n\n model = mixed   # inline\nalpha = 0.25\nsteps = 1e3\n")
    assert c.model == "mixed" and c.params.alpha == 0.25 and c.steps == 1000


def test_hardcopy_backend_rule():
    with pytest.raises(ConfigError, match="hardcopy requires vertex backend") as e:
        parse_config("model=hardcopy\nbackend=histogram\nsteps=10")
    assert e.value.line == 2
    assert parse_config("model=hardcopy\nsteps=10").backend == "vertex"


def test_range_error_has_line_number():
    with pytest.raises(ConfigError) as e:
        parse_config("model=ba\nsteps=10\nalpha=1.5")
    assert e.value.line == 3 and "alpha" in str(e.value)


@pytest.mark.parametrize("text,line", [
    ("model=ba\nsteps=10\nalpah=1", 3),
    ("model=ba\nsteps=ten", 2),
    ("model=ba\nsteps=10\nsteps=20", 3),
    ("model=ba\nsteps 10", 2),
    ("model=ba\nsteps=10\nreplicas=0", 3),
    ("model=ba\nsteps=10\nincrement_window=5", 3),
    ("model=ba\nsteps=10\ncheckpoints=0,5", 3),
    ("model=ba\nsteps=2.5", 2),
])
def test_errors_carry_line(text, line):
    with pytest.raises(ConfigError) as e:
        parse_config(text)
    assert e.value.line == line


def test_missing_required_key():
    with pytest.raises(ConfigError, match="steps"):
        parse_config("model=ba")


def test_out_dir_env(monkeypatch):
    monkeypatch.setenv(OUT_DIR_ENV, "/tmp/somewhere")
    assert parse_config("model=ba\nsteps=5").out_dir == "/tmp/somewhere"
    assert parse_config("model=ba\nsteps=5\nout_dir=x").out_dir == "x"


def test_lists_and_hex_seed():
    c = parse_config("model=ba\nsteps=100\ncheckpoints=10, 50 100\nincrement_window=20,80\nseed=0xff")
    assert c.plan.checkpoints == (10, 50, 100) and c.plan.increment_window == (20, 80)
    assert c.seed == 255


def test_config_is_hashable_and_echoes_all_keys():
    c = parse_config(HAPPY)
    assert hash(c) == hash(parse_config(HAPPY))
    echo = c.echo()
    assert set(KEYS) - {"out_dir"} <= set(echo)


def test_direct_construction_validates():
    with pytest.raises(ConfigError):
        RunConfig(model="ba", params=ModelParams(), steps=0)

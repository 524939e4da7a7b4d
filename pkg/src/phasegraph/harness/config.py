"""Flat ``key = value`` run configuration.

One assignment per line; ``#`` starts a comment. Keys are exactly those in
:data:`KEYS`; anything else is an error reported with its line number.
"""

from __future__ import annotations

import os
import warnings
from dataclasses import dataclass, replace

from ..params import MODELS, ModelParams
from ..process import ObservationPlan, default_checkpoints

KEYS = (
    "model", "alpha", "mu", "zeta", "nu", "steps", "replicas", "seed", "backend",
    "checkpoints", "increment_window", "out_dir", "memory_cap_mb",
)
REQUIRED = ("model", "steps")
BACKENDS = ("histogram", "vertex")
OUT_DIR_ENV = "PHASEGRAPH_OUT_DIR"


class ConfigError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


@dataclass(frozen=True)
class RunConfig:
    model: str
    params: ModelParams
    steps: int
    replicas: int = 1
    seed: int = 0
    backend: str = "histogram"
    checkpoints: tuple[int, ...] | None = None
    increment_window: tuple[int, int] | None = None
    edge_dump: bool = False
    out_dir: str = "out"
    memory_cap_mb: float | None = None
    method: str = "bucketed"

    def __post_init__(self):
        if self.model not in MODELS:
            raise ConfigError(f"unknown model {self.model!r}; expected one of {MODELS}")
        if self.backend not in BACKENDS:
            raise ConfigError(f"unknown backend {self.backend!r}; expected one of {BACKENDS}")
        if self.model == "hardcopy" and self.backend == "histogram":
            raise ConfigError("hardcopy requires vertex backend")
        if self.steps < 1:
            raise ConfigError(f"steps must be >= 1, got {self.steps}")
        if self.replicas < 1:
            raise ConfigError(f"replicas must be >= 1, got {self.replicas}")
        if not 0 <= self.seed < 2**64:
            raise ConfigError("seed must be a 64-bit unsigned integer")
        if self.memory_cap_mb is not None and self.memory_cap_mb <= 0:
            raise ConfigError("memory_cap_mb must be positive")
        try:
            self.plan
        except ValueError as exc:
            raise ConfigError(str(exc)) from None

    @property
    def plan(self) -> ObservationPlan:
        ck = self.checkpoints if self.checkpoints is not None else default_checkpoints(self.steps)
        win = self.increment_window if self.increment_window is not None else (self.steps // 2, self.steps)
        return ObservationPlan(tuple(ck), tuple(win), self.edge_dump).validated(self.steps)

    @property
    def memory_cap_bytes(self) -> int | None:
        return None if self.memory_cap_mb is None else int(self.memory_cap_mb * 2**20)

    def with_(self, **changes) -> RunConfig:
        return replace(self, **changes)

    def echo(self) -> dict:
        """Plain-data view, with defaults resolved, for reports."""
        p = self.plan
        return {
            "model": self.model, "alpha": self.params.alpha, "mu": self.params.mu,
            "zeta": self.params.zeta, "nu": self.params.nu, "steps": self.steps,
            "replicas": self.replicas, "seed": self.seed, "backend": self.backend,
            "method": self.method, "checkpoints": list(p.checkpoints),
            "increment_window": list(p.increment_window), "memory_cap_mb": self.memory_cap_mb,
        }


def _int(v: str) -> int:
    v = v.strip()
    if v.lower().startswith("0x"):
        return int(v, 16)
    f = float(v)
    if not f.is_integer():
        raise ValueError(f"expected an integer, got {v!r}")
    return int(v) if v.lstrip("+-").isdigit() else int(f)


def _int_list(v: str) -> tuple[int, ...]:
    parts = [p for p in v.replace(",", " ").split() if p]
    return tuple(_int(p) for p in parts)


def _window(v: str) -> tuple[int, int]:
    xs = _int_list(v)
    if len(xs) != 2:
        raise ValueError(f"increment_window needs two integers, got {v!r}")
    return xs[0], xs[1]


_CONVERTERS = {
    "model": str.strip, "alpha": float, "mu": float, "zeta": float, "nu": float,
    "steps": _int, "replicas": _int, "seed": _int, "backend": str.strip,
    "checkpoints": _int_list, "increment_window": _window, "out_dir": str.strip,
    "memory_cap_mb": float,
}


def read_pairs(text: str) -> dict[str, tuple[str, int]]:
    """``{key: (raw value, line number)}``; rejects unknown and repeated keys."""
    out: dict[str, tuple[str, int]] = {}
    for n, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"expected 'key = value', got {raw.strip()!r}", n)
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in KEYS:
            raise ConfigError(f"unknown key {key!r}", n)
        if key in out:
            raise ConfigError(f"duplicate key {key!r}", n)
        out[key] = (value, n)
    return out


def build_config(pairs: dict[str, tuple[str, int | None]], **extra) -> RunConfig:
    """Validate raw ``{key: (value, line)}`` pairs into a :class:`RunConfig`.

    ``extra`` carries fields that have no config-file key (``edge_dump``,
    ``method``).
    """
    vals = {}
    for key, (raw, line) in pairs.items():
        try:
            vals[key] = _CONVERTERS[key](raw)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad value for {key}: {exc}", line) from None
    for key in REQUIRED:
        if key not in vals:
            raise ConfigError(f"missing required key {key!r}")

    def line_of(key):
        return pairs[key][1] if key in pairs else None

    pkw = {k: vals[k] for k in ("alpha", "mu", "zeta", "nu") if k in vals}
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("default")
            params = ModelParams(**pkw)
    except ValueError as exc:
        bad = next((k for k in pkw if k in str(exc)), None)
        raise ConfigError(str(exc), line_of(bad) if bad else None) from None
    model = vals["model"]
    backend = vals.get("backend", "vertex" if model == "hardcopy" else "histogram")
    out_dir = vals.get("out_dir", os.environ.get(OUT_DIR_ENV, "out"))
    try:
        return RunConfig(
            model=model, params=params, steps=vals["steps"], replicas=vals.get("replicas", 1),
            seed=vals.get("seed", 0), backend=backend, checkpoints=vals.get("checkpoints"),
            increment_window=vals.get("increment_window"), out_dir=out_dir,
            memory_cap_mb=vals.get("memory_cap_mb"), **extra,
        )
    except ConfigError as exc:
        msg = str(exc)
        for key in ("backend", "steps", "replicas", "seed", "memory_cap_mb", "checkpoints",
                    "increment_window", "model"):
            if key in msg and key in pairs:
                raise ConfigError(msg, line_of(key)) from None
        if "hardcopy" in msg and "backend" in pairs:
            raise ConfigError(msg, line_of("backend")) from None
        raise


def parse_config(text: str, **extra) -> RunConfig:
    """Parse a key-value document into a validated :class:`RunConfig`."""
    return build_config(read_pairs(text), **extra)


"""Configuration, ensembles, output files and the verification suite."""

from .config import ConfigError, RunConfig, parse_config
from .ensemble import ReplicaError, run_ensemble

__all__ = ["ConfigError", "RunConfig", "parse_config", "ReplicaError", "run_ensemble"]

"""Experiment orchestration: configuration, seeded runs, CSV/JSON output,
parameter sweeps, and the command-line interface."""

from .config import (AgentSpec, ConfigError, ExperimentConfig, config_from_dict,
                     load_config, with_env)
from .runner import (CSV_HEADER, ExperimentResult, RunRecorder, RunResult,
                     comparison_table, format_table, greedy_agent,
                     random_agent, run_experiment, run_single, sweep)
from .selftest import run_selftest

__all__ = [
    "AgentSpec",
    "ConfigError",
    "ExperimentConfig",
    "config_from_dict",
    "load_config",
    "with_env",
    "CSV_HEADER",
    "ExperimentResult",
    "RunRecorder",
    "RunResult",
    "comparison_table",
    "format_table",
    "greedy_agent",
    "random_agent",
    "run_experiment",
    "run_single",
    "sweep",
    "run_selftest",
]

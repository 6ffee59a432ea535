"""Experiment configuration: defaults, YAML ingestion, CLI overrides.

The file format is a plain YAML tree mirroring the dataclasses below; every
key is optional and falls back to the defaults, which reproduce the standard
evaluation setup (p_access 0.8, p_protected 0.2, 20 MHz at 2 GHz, 50k slots).
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from pathlib import Path

import yaml

from ..dqn import DqnConfig
from ..env import EnvConfig
from ..qpolicy import QuantumAgentConfig

AGENT_KINDS = ("random", "greedy", "dql", "quantum")


class ConfigError(ValueError):
    """Invalid experiment configuration (CLI exit code 1)."""


@dataclass(frozen=True)
class AgentSpec:
    kind: str = "quantum"
    quantum: QuantumAgentConfig = field(default_factory=QuantumAgentConfig)
    dql: DqnConfig = field(default_factory=DqnConfig)

    def __post_init__(self):
        if self.kind not in AGENT_KINDS:
            raise ConfigError(
                f"unknown agent kind {self.kind!r}; expected one of {AGENT_KINDS}")

    def label(self) -> str:
        if self.kind == "quantum":
            return f"quantum{self.quantum.n_layers}"
        if self.kind == "dql":
            return "dql" + "x".join(str(h) for h in self.dql.hidden_sizes)
        return self.kind


@dataclass(frozen=True)
class ExperimentConfig:
    env: EnvConfig = field(default_factory=EnvConfig)
    agent: AgentSpec = field(default_factory=AgentSpec)
    total_steps: int = 50000
    eval_window: int = 1000
    record_every: int = 100
    seeds: tuple[int, ...] = (1, 2, 3, 4, 5)
    out: str = "results"

    def __post_init__(self):
        if self.total_steps < 1:
            raise ConfigError("total_steps must be positive")
        if not self.seeds:
            raise ConfigError("need at least one seed")
        if self.eval_window < 1 or self.record_every < 1:
            raise ConfigError("eval_window and record_every must be positive")

    def label(self) -> str:
        return self.agent.label()


def _build(cls, data: dict, where: str):
    """Construct a dataclass from a dict, rejecting unknown keys."""
    names = {f.name for f in dataclasses.fields(cls)}
    unknown = set(data) - names
    if unknown:
        raise ConfigError(f"unknown key(s) {sorted(unknown)} in {where}; "
                          f"expected a subset of {sorted(names)}")
    coerced = {}
    for f in dataclasses.fields(cls):
        if f.name not in data:
            continue
        value = data[f.name]
        if isinstance(value, list):
            value = tuple(tuple(v) if isinstance(v, list) else v for v in value)
        coerced[f.name] = value
    try:
        return cls(**coerced)
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid {where}: {exc}") from exc


def config_from_dict(data: dict) -> ExperimentConfig:
    if not isinstance(data, dict):
        raise ConfigError("config root must be a mapping")
    data = dict(data)
    env = _build(EnvConfig, data.pop("env", {}) or {}, "env")
    agent_data = dict(data.pop("agent", {}) or {})
    kind = agent_data.pop("kind", "quantum")
    if kind == "quantum":
        agent = AgentSpec(kind=kind,
                          quantum=_build(QuantumAgentConfig, agent_data, "agent"))
    elif kind == "dql":
        agent = AgentSpec(kind=kind, dql=_build(DqnConfig, agent_data, "agent"))
    else:
        if agent_data:
            raise ConfigError(
                f"agent kind {kind!r} takes no extra options, got {sorted(agent_data)}")
        agent = AgentSpec(kind=kind)
    cfg = _build(ExperimentConfig, {"env": env, "agent": agent, **data},
                 "experiment config")
    return cfg


def load_config(path: str | Path | None) -> ExperimentConfig:
    """Read a YAML config file; ``None`` gives the built-in defaults."""
    if path is None:
        return ExperimentConfig()
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    try:
        data = yaml.safe_load(path.read_text()) or {}
    except yaml.YAMLError as exc:
        raise ConfigError(f"could not parse {path}: {exc}") from exc
    return config_from_dict(data)


def with_env(cfg: ExperimentConfig, **env_overrides) -> ExperimentConfig:
    """Copy of ``cfg`` with some environment fields replaced."""
    try:
        env = dataclasses.replace(cfg.env, **env_overrides)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid environment override: {exc}") from exc
    return dataclasses.replace(cfg, env=env)

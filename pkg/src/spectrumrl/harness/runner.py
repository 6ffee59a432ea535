"""Seeded experiment execution: runs one agent per (config, seed), records the
per-slot reward stream, and emits CSV files plus JSON summaries.

CSV schema (one row every ``record_every`` slots)::

    step,reward,throughput,running_avg,epsilon,iter_seconds

``reward`` and ``throughput`` are window means (raw and clamped-at-zero, in
bit/s), ``running_avg`` is the cumulative clamped mean from slot 0, and
``epsilon`` is the exploration rate (empty for non-DQL agents). The
``iter_seconds`` column is reserved and left empty: per-iteration wall-clock
is inherently non-reproducible, so it is reported in the summary instead,
keeping re-runs of the same config and seed byte-identical.
"""

from __future__ import annotations

import dataclasses
import json
import time
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .. import dqn, qpolicy
from ..env import ACTIONS, EnvConfig, Environment, EnvState
from .config import AgentSpec, ConfigError, ExperimentConfig, with_env

CSV_HEADER = "step,reward,throughput,running_avg,epsilon,iter_seconds"

#: steps excluded from the mean per-iteration time (interpreter warm-up)
TIMING_WARMUP_STEPS = 100


def random_agent(state: EnvState, rng: np.random.Generator) -> int:
    """Uniformly random action."""
    return int(rng.integers(0, len(ACTIONS)))


def greedy_agent(state: EnvState) -> int:
    """Always access the shared spectrum and transmit actively."""
    return 1


class RunRecorder:
    """Accumulates the reward stream of one run into CSV rows and a summary."""

    def __init__(self, record_every: int, window: int,
                 warmup: int = TIMING_WARMUP_STEPS):
        self.record_every = record_every
        self.warmup = warmup
        self.rows: list[str] = []
        self.step_count = 0
        self._clamped_sum = 0.0
        self._win_reward_sum = 0.0
        self._win_clamped_sum = 0.0
        self._win_len = 0
        self._window = deque(maxlen=window)
        self._time_sum = 0.0
        self._time_count = 0
        self._last_time = time.perf_counter()
        self._last_epsilon = None

    def step(self, reward: float, epsilon: float | None = None) -> None:
        now = time.perf_counter()
        dt = now - self._last_time
        self._last_time = now
        self.step_count += 1
        if self.step_count > self.warmup:
            self._time_sum += dt
            self._time_count += 1
        clamped = reward if reward > 0.0 else 0.0
        self._clamped_sum += clamped
        self._win_reward_sum += reward
        self._win_clamped_sum += clamped
        self._win_len += 1
        self._window.append(clamped)
        self._last_epsilon = epsilon
        if self.step_count % self.record_every == 0:
            self._emit_row(epsilon)

    def _emit_row(self, epsilon) -> None:
        eps_text = "" if epsilon is None else f"{epsilon:.6f}"
        self.rows.append(
            f"{self.step_count},"
            f"{self._win_reward_sum / self._win_len:.6f},"
            f"{self._win_clamped_sum / self._win_len:.6f},"
            f"{self._clamped_sum / self.step_count:.6f},"
            f"{eps_text},"
        )
        self._win_reward_sum = 0.0
        self._win_clamped_sum = 0.0
        self._win_len = 0

    def running_avg(self) -> float:
        return self._clamped_sum / max(self.step_count, 1)

    def window_avg(self) -> float:
        if not self._window:
            return 0.0
        return sum(self._window) / len(self._window)

    def mean_iter_seconds(self) -> float:
        if self._time_count == 0:
            return 0.0
        return self._time_sum / self._time_count

    def csv_text(self) -> str:
        if self._win_len:  # ragged tail shorter than record_every
            self._emit_row(self._last_epsilon)
        return "\n".join([CSV_HEADER, *self.rows]) + "\n"


def _run_fixed_policy(env_config: EnvConfig, kind: str, total_steps: int,
                      seed: int, recorder: RunRecorder) -> dict:
    ss = np.random.SeedSequence(seed)
    env_rng, agent_rng = (np.random.default_rng(s) for s in ss.spawn(2))
    env = Environment(env_config, env_rng)
    steps = 0
    while steps < total_steps:
        state = env.reset()
        for _ in range(min(env_config.horizon, total_steps - steps)):
            if kind == "random":
                action = random_agent(state, agent_rng)
            else:
                action = greedy_agent(state)
            state, reward = env.step(action)
            steps += 1
            recorder.step(reward)
    return {"param_count": 0, "updates": 0}


@dataclass
class RunResult:
    """Outcome of one (config, seed) execution."""

    label: str
    seed: int
    total_steps: int
    final_running_avg: float
    final_window_avg: float
    mean_iter_seconds: float
    param_count: int
    updates: int
    csv_text: str
    csv_path: str | None = None
    extra: dict = field(default_factory=dict)

    def summary(self) -> dict:
        return {
            "label": self.label,
            "seed": self.seed,
            "total_steps": self.total_steps,
            "final_running_avg_bps": self.final_running_avg,
            "final_window_avg_bps": self.final_window_avg,
            "mean_iter_seconds": self.mean_iter_seconds,
            "param_count": self.param_count,
            "updates": self.updates,
            **self.extra,
        }

    def running_avg_at(self, step: int) -> float:
        """Cumulative running-average value recorded at a given step."""
        for line in self.csv_text.splitlines()[1:]:
            cells = line.split(",")
            if int(cells[0]) == step:
                return float(cells[3])
        raise KeyError(f"no CSV row at step {step}")


def run_single(config: ExperimentConfig, seed: int) -> RunResult:
    """Execute one seed of the configured experiment (no file I/O)."""
    recorder = RunRecorder(config.record_every, config.eval_window)
    agent = config.agent
    extra: dict = {}
    if agent.kind == "quantum":
        result = qpolicy.train(config.env, agent.quantum, config.total_steps,
                               seed, recorder)
        params, updates = result.param_count, result.updates
    elif agent.kind == "dql":
        result = dqn.train(config.env, agent.dql, config.total_steps, seed,
                           recorder)
        params, updates = result.param_count, result.updates
        extra["final_epsilon"] = result.final_epsilon
    else:
        info = _run_fixed_policy(config.env, agent.kind, config.total_steps,
                                 seed, recorder)
        params, updates = info["param_count"], info["updates"]
    return RunResult(
        label=config.label(),
        seed=seed,
        total_steps=config.total_steps,
        final_running_avg=recorder.running_avg(),
        final_window_avg=recorder.window_avg(),
        mean_iter_seconds=recorder.mean_iter_seconds(),
        param_count=params,
        updates=updates,
        csv_text=recorder.csv_text(),
        extra=extra,
    )


@dataclass
class ExperimentResult:
    label: str
    runs: list[RunResult]

    def finals(self) -> np.ndarray:
        return np.array([r.final_running_avg for r in self.runs])

    def aggregate(self) -> dict:
        finals = self.finals()
        windows = np.array([r.final_window_avg for r in self.runs])
        iters = np.array([r.mean_iter_seconds for r in self.runs])
        return {
            "final_running_avg_bps": {"mean": float(finals.mean()),
                                      "std": float(finals.std())},
            "final_window_avg_bps": {"mean": float(windows.mean()),
                                     "std": float(windows.std())},
            "mean_iter_seconds": float(iters.mean()),
            "param_count": self.runs[0].param_count,
        }

    def summary(self) -> dict:
        return {
            "label": self.label,
            "seeds": [r.seed for r in self.runs],
            "aggregate": self.aggregate(),
            "per_seed": [r.summary() for r in self.runs],
        }


def run_experiment(config: ExperimentConfig,
                   write: bool = True) -> ExperimentResult:
    """Run every configured seed; optionally write per-seed CSVs plus a
    ``summary.json`` under ``<out>/<label>/``."""
    runs = [run_single(config, seed) for seed in config.seeds]
    result = ExperimentResult(label=config.label(), runs=runs)
    if write:
        out_dir = Path(config.out) / config.label()
        out_dir.mkdir(parents=True, exist_ok=True)
        for run in runs:
            path = out_dir / f"seed{run.seed}.csv"
            path.write_text(run.csv_text)
            run.csv_path = str(path)
        (out_dir / "summary.json").write_text(
            json.dumps(result.summary(), indent=2) + "\n")
    return result


SWEEPABLE = ("p_access", "p_protected", "penalty")


def sweep(config: ExperimentConfig, param: str,
          values) -> list[tuple[float, ExperimentResult]]:
    """Run the experiment across a grid of one environment parameter and
    write a ``sweep_<param>.csv`` overview next to the per-point outputs."""
    if param not in SWEEPABLE:
        raise ConfigError(f"cannot sweep {param!r}; choose one of {SWEEPABLE}")
    points = []
    for value in values:
        point_cfg = with_env(config, **{param: float(value)})
        point_cfg = dataclasses.replace(
            point_cfg, out=str(Path(config.out) / f"{param}={value:g}"))
        points.append((float(value), run_experiment(point_cfg)))
    lines = [f"{param},label,final_running_avg_mean_bps,final_running_avg_std_bps"]
    for value, result in points:
        agg = result.aggregate()["final_running_avg_bps"]
        lines.append(f"{value:g},{result.label},{agg['mean']:.6f},{agg['std']:.6f}")
    out_dir = Path(config.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / f"sweep_{param}.csv").write_text("\n".join(lines) + "\n")
    return points


#: the five built-in method configurations compared in the summary table
TABLE_METHODS = (
    ("dql16", AgentSpec(kind="dql", dql=dqn.DqnConfig(hidden_sizes=(16, 16)))),
    ("dql32", AgentSpec(kind="dql", dql=dqn.DqnConfig(hidden_sizes=(32, 32)))),
    ("quantum1", AgentSpec(kind="quantum",
                           quantum=qpolicy.QuantumAgentConfig(n_layers=1))),
    ("quantum3", AgentSpec(kind="quantum",
                           quantum=qpolicy.QuantumAgentConfig(n_layers=3))),
    ("quantum5", AgentSpec(kind="quantum",
                           quantum=qpolicy.QuantumAgentConfig(n_layers=5))),
)


def comparison_table(config: ExperimentConfig, write: bool = True) -> list[dict]:
    """Train the five built-in methods on the same environment and summarize
    parameter counts, per-iteration cost, and final throughput."""
    rows = []
    for label, agent in TABLE_METHODS:
        method_cfg = dataclasses.replace(config, agent=agent)
        result = run_experiment(method_cfg, write=write)
        agg = result.aggregate()
        rows.append({
            "method": label,
            "param_count": agg["param_count"],
            "mean_iter_seconds": agg["mean_iter_seconds"],
            "throughput_mean_bps": agg["final_running_avg_bps"]["mean"],
            "throughput_std_bps": agg["final_running_avg_bps"]["std"],
        })
    if write:
        out_dir = Path(config.out)
        out_dir.mkdir(parents=True, exist_ok=True)
        lines = ["method,param_count,mean_iter_seconds,"
                 "throughput_mean_bps,throughput_std_bps"]
        for row in rows:
            lines.append(f"{row['method']},{row['param_count']},"
                         f"{row['mean_iter_seconds']:.6g},"
                         f"{row['throughput_mean_bps']:.6f},"
                         f"{row['throughput_std_bps']:.6f}")
        (out_dir / "comparison.csv").write_text("\n".join(lines) + "\n")
    return rows


def format_table(rows: list[dict]) -> str:
    header = f"{'method':<10} {'params':>7} {'iter (s)':>12} {'throughput (Mbps)':>20}"
    lines = [header, "-" * len(header)]
    for row in rows:
        mbps = row["throughput_mean_bps"] / 1e6
        std = row["throughput_std_bps"] / 1e6
        lines.append(f"{row['method']:<10} {row['param_count']:>7} "
                     f"{row['mean_iter_seconds']:>12.6f} "
                     f"{mbps:>14.3f} +- {std:.3f}")
    return "\n".join(lines)

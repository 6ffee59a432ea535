"""Command-line entry point.

Subcommands::

    spectrumrl run      one experiment (one agent, one or more seeds)
    spectrumrl sweep    grid over an environment parameter
    spectrumrl table1   the five-method comparison table
    spectrumrl selftest fast oracle/invariant suite

Exit codes: 0 success, 1 configuration error, 2 runtime failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import sys

from .. import qsim
from .config import (AgentSpec, ConfigError, ExperimentConfig, load_config,
                     with_env)
from .runner import comparison_table, format_table, run_experiment, sweep
from .selftest import run_selftest


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse defaults to exit code 2
        raise ConfigError(message)


def _parse_seeds(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(s) for s in text.split(",") if s.strip())
    except ValueError as exc:
        raise ConfigError(f"bad seed list {text!r}: {exc}") from exc


def _parse_values(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(v) for v in text.split(",") if v.strip())
    except ValueError as exc:
        raise ConfigError(f"bad value list {text!r}: {exc}") from exc


def _add_common(parser):
    parser.add_argument("--config", help="YAML config file")
    parser.add_argument("--agent", choices=("random", "greedy", "dql", "quantum"))
    parser.add_argument("--p-access", type=float, dest="p_access")
    parser.add_argument("--p-protected", type=float, dest="p_protected")
    parser.add_argument("--steps", type=int)
    parser.add_argument("--seed", type=int, help="single seed")
    parser.add_argument("--seeds", help="comma-separated seed list")
    parser.add_argument("--out", help="output directory")
    parser.add_argument("--layers", type=int, help="quantum layers")
    parser.add_argument("--hidden", help="DQL hidden sizes, e.g. 32,32")


def _apply_overrides(cfg: ExperimentConfig, args) -> ExperimentConfig:
    if args.agent:
        if args.agent == "quantum":
            layers = args.layers or cfg.agent.quantum.n_layers
            agent = AgentSpec(kind="quantum",
                              quantum=dataclasses.replace(cfg.agent.quantum,
                                                          n_layers=layers))
        elif args.agent == "dql":
            dql = cfg.agent.dql
            if args.hidden:
                sizes = tuple(int(h) for h in args.hidden.split(","))
                dql = dataclasses.replace(dql, hidden_sizes=sizes)
            agent = AgentSpec(kind="dql", dql=dql)
        else:
            agent = AgentSpec(kind=args.agent)
        cfg = dataclasses.replace(cfg, agent=agent)
    elif args.layers and cfg.agent.kind == "quantum":
        cfg = dataclasses.replace(
            cfg, agent=AgentSpec(kind="quantum",
                                 quantum=dataclasses.replace(
                                     cfg.agent.quantum, n_layers=args.layers)))
    env_overrides = {}
    if args.p_access is not None:
        env_overrides["p_access"] = args.p_access
    if args.p_protected is not None:
        env_overrides["p_protected"] = args.p_protected
    if env_overrides:
        cfg = with_env(cfg, **env_overrides)
    if args.steps:
        cfg = dataclasses.replace(cfg, total_steps=args.steps)
    if args.seed is not None and args.seeds:
        raise ConfigError("give either --seed or --seeds, not both")
    if args.seed is not None:
        cfg = dataclasses.replace(cfg, seeds=(args.seed,))
    elif args.seeds:
        cfg = dataclasses.replace(cfg, seeds=_parse_seeds(args.seeds))
    if args.out:
        cfg = dataclasses.replace(cfg, out=args.out)
    return cfg


def build_parser() -> _Parser:
    parser = _Parser(prog="spectrumrl",
                     description="Spectrum-access RL experiments")
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run one experiment")
    _add_common(run_p)

    sweep_p = sub.add_parser("sweep", help="grid over one env parameter")
    _add_common(sweep_p)
    sweep_p.add_argument("--param", required=True,
                         choices=("p_access", "p_protected", "penalty"))
    sweep_p.add_argument("--values", required=True,
                         help="comma-separated values")

    table_p = sub.add_parser("table1",
                             help="five-method comparison (params, time, throughput)")
    _add_common(table_p)

    sub.add_parser("selftest", help="fast verification suite")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command == "selftest":
            return 0 if run_selftest() else 2
        cfg = _apply_overrides(load_config(args.config), args)
        if args.command == "run":
            result = run_experiment(cfg)
            agg = result.aggregate()
            print(f"agent={result.label} backend={qsim.backend_name()} "
                  f"seeds={len(cfg.seeds)} steps={cfg.total_steps}")
            print(f"throughput: "
                  f"{agg['final_running_avg_bps']['mean'] / 1e6:.3f} "
                  f"+- {agg['final_running_avg_bps']['std'] / 1e6:.3f} Mbps "
                  f"(params={agg['param_count']}, "
                  f"iter={agg['mean_iter_seconds']:.6f}s)")
            print(f"wrote {cfg.out}/{result.label}/")
        elif args.command == "sweep":
            points = sweep(cfg, args.param, _parse_values(args.values))
            for value, result in points:
                agg = result.aggregate()["final_running_avg_bps"]
                print(f"{args.param}={value:g}: "
                      f"{agg['mean'] / 1e6:.3f} +- {agg['std'] / 1e6:.3f} Mbps")
            print(f"wrote {cfg.out}/sweep_{args.param}.csv")
        elif args.command == "table1":
            rows = comparison_table(cfg)
            print(format_table(rows))
            print(f"wrote {cfg.out}/comparison.csv")
        return 0
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

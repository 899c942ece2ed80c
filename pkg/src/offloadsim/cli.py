"""Command-line entry point.

Subcommands: simulate (one episode), envgen (write a datacenter file),
tune / train / evaluate (campaigns), summarize (recompute and verify
metrics from logs). Evaluation is the default mode; --train switches a
simulate run to training.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .agents import EVALUATE, TRAIN, AgentHyperparams
from .campaign import (
    DEFAULT_LR_GRID,
    run_evaluate_campaign,
    run_train_campaign,
    run_tune_campaign,
)
from .config import TOPOLOGIES, parse_inputs
from .domain import ServerSpec
from .envgen import GenParams, generate_environment
from .metrics import (
    read_csv_rows,
    read_summary,
    summarize_rows,
    write_aggregates,
    write_episode,
)
from .simulation import RunSettings, run_episode


def _add_hyperparam_flags(parser: argparse.ArgumentParser) -> None:
    group = parser.add_argument_group("agent hyperparameters")
    group.add_argument("--replay-capacity", type=int, default=100_000)
    group.add_argument("--batch-size", type=int, default=64)
    group.add_argument("--gamma", type=float, default=0.95)
    group.add_argument("--actor-lr", type=float, default=5e-4)
    group.add_argument("--critic-lr", type=float, default=5e-4)
    group.add_argument("--tau", type=float, default=0.005,
                       help="target network soft-update blend")
    group.add_argument("--updates-per-slot", type=int, default=1)
    group.add_argument("--noise-theta", type=float, default=0.15)
    group.add_argument("--noise-sigma", type=float, default=0.2)
    group.add_argument("--random-steps", type=int, default=500)
    group.add_argument("--random-episodes", type=int, default=4)
    group.add_argument("--energy-cost", type=float, default=1e-5,
                       help="cost per joule in the pricing profit")
    group.add_argument("--slot-length", type=float, default=5.0)
    group.add_argument("--normalize-state", action="store_true")


def _hyperparams(args: argparse.Namespace) -> AgentHyperparams:
    hp = AgentHyperparams(
        replay_capacity=args.replay_capacity,
        batch_size=args.batch_size,
        gamma=args.gamma,
        actor_lr=args.actor_lr,
        critic_lr=args.critic_lr,
        target_blend=args.tau,
        updates_per_slot=args.updates_per_slot,
        noise_theta=args.noise_theta,
        noise_sigma=args.noise_sigma,
        random_steps=args.random_steps,
        random_episodes=args.random_episodes,
        energy_cost_coeff=args.energy_cost,
        slot_length=args.slot_length,
        normalize_state=args.normalize_state,
    )
    hp.validate()
    return hp


def _add_scenario_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--input", required=True, help="scenario input folder")
    parser.add_argument("--output", required=True, help="folder for result CSVs")
    parser.add_argument("--models", help="folder for agent states")
    parser.add_argument("--seed", type=int, default=1)
    parser.add_argument("--topology", choices=TOPOLOGIES,
                        help="override orchestration_algorithms")
    parser.add_argument("--devices", type=int,
                        help="override number_of_edge_devices")


def _load_config(args: argparse.Namespace):
    config = parse_inputs(args.input)
    return config.with_overrides(topology=args.topology, devices=args.devices)


def _cmd_simulate(args: argparse.Namespace) -> int:
    config = _load_config(args)
    model_dir = None
    if args.models is not None:
        model_dir = Path(args.models) / config.scenario_id()
    settings = RunSettings(
        mode=TRAIN if args.train else EVALUATE,
        master_seed=args.seed,
        hyperparams=_hyperparams(args),
        model_dir=model_dir,
        pricing=args.pricing,
    )
    result = run_episode(config, settings)
    summary = write_episode(Path(args.output), result)
    print(f"scenario {config.scenario_id()}: {summary.generated} tasks, "
          f"{summary.offloaded_pct:.1f}% offloaded, "
          f"total return {summary.total_return:.4f}")
    return 0


def _cmd_envgen(args: argparse.Namespace) -> int:
    from .config import emit_datacenters

    params = GenParams(
        side=args.side,
        coverage=args.coverage,
        server_count=args.servers,
        cluster_count=args.clusters,
        seed=args.seed,
        twst_weight=args.twst_weight,
        link_add_weights=(args.w1, args.w2, args.w3),
        extra_edges=args.extra_edges,
        man_bandwidth=args.man_bandwidth,
        man_latency=args.man_latency,
        server_spec=ServerSpec(
            idle_power=args.server_idle,
            max_power=args.server_max,
            cores=args.server_cores,
            mips_per_core=args.server_mips,
            ram_mb=args.server_ram,
            storage_mb=args.server_storage,
        ),
    )
    layout = generate_environment(params)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(emit_datacenters(layout))
    print(f"wrote {out}: {len(layout.aps)} APs, {len(layout.servers)} servers, "
          f"{len(layout.links)} links")
    return 0


def _cmd_tune(args: argparse.Namespace) -> int:
    config = _load_config(args)
    out = run_tune_campaign(
        config, args.output, args.models, _hyperparams(args), args.seed,
        actor_grid=tuple(args.actor_lr_grid),
        critic_grid=tuple(args.critic_lr_grid),
        train_episodes=args.train_episodes,
        eval_episodes=args.eval_episodes,
    )
    print(f"tuning results under {out}")
    return 0


def _cmd_train(args: argparse.Namespace) -> int:
    config = _load_config(args)
    out = run_train_campaign(
        config, args.output, args.models, _hyperparams(args), args.seed,
        episodes=args.episodes, snapshot_every=args.snapshot_every,
    )
    print(f"training results under {out}")
    return 0


def _cmd_evaluate(args: argparse.Namespace) -> int:
    config = _load_config(args)
    out = run_evaluate_campaign(
        config, args.output, args.models, _hyperparams(args), args.seed,
        episodes=args.episodes, pricing=args.pricing,
    )
    print(f"evaluation results under {out}")
    return 0


def _cmd_summarize(args: argparse.Namespace) -> int:
    from .metrics import SUMMARY_COLUMNS, aggregate

    if args.run:
        run_dir = Path(args.run)
        rows = read_csv_rows(run_dir / "tasks.csv")
        stored = read_summary(run_dir / "summary.csv")
        agent_dir = run_dir / "agents"
        total_return = 0.0
        for csv_path in sorted(agent_dir.glob("*.csv")):
            agent_rows = read_csv_rows(csv_path)
            if agent_rows:
                total_return += agent_rows[-1]["cumulative_profit"]
        recount = summarize_rows(
            rows,
            total_return=total_return,
            total_energy_j=stored["total_energy_j"],
            mean_server_cpu_util_pct=stored["mean_server_cpu_util_pct"],
        )
        mismatches = []
        for column in SUMMARY_COLUMNS:
            fresh = getattr(recount, column)
            old = stored[column]
            if isinstance(fresh, float) and isinstance(old, (int, float)):
                if abs(fresh - old) > 1e-9:
                    mismatches.append(column)
            elif fresh != old:
                mismatches.append(column)
        for column in SUMMARY_COLUMNS:
            print(f"{column}: {getattr(recount, column)}")
        if mismatches:
            print(f"MISMATCH against stored summary: {', '.join(mismatches)}",
                  file=sys.stderr)
            return 1
        print("summary verified against logs")
        return 0
    campaign_dir = Path(args.campaign)
    summaries = sorted(campaign_dir.glob("ep_*/summary.csv"))
    if not summaries:
        print(f"no episode summaries under {campaign_dir}", file=sys.stderr)
        return 1
    per_metric: dict[str, list[float]] = {}
    for path in summaries:
        row = read_summary(path)
        for key, value in row.items():
            if isinstance(value, (int, float)) and not isinstance(value, bool):
                per_metric.setdefault(key, []).append(float(value))
    aggregates = [aggregate(k, v) for k, v in per_metric.items()]
    write_aggregates(campaign_dir / "aggregate.csv", aggregates)
    print(f"aggregated {len(summaries)} episodes into {campaign_dir / 'aggregate.csv'}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="offloadsim",
        description="Edge task-offloading simulator with learned per-MI pricing",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run one episode")
    _add_scenario_flags(sim)
    sim.add_argument("--train", action="store_true",
                     help="training mode (default is evaluation)")
    sim.add_argument("--pricing", choices=("model", "random"), default="model",
                     help="'random' prices uniformly, as a baseline")
    _add_hyperparam_flags(sim)
    sim.set_defaults(func=_cmd_simulate)

    env = sub.add_parser("envgen", help="generate an edge_datacenters.xml")
    env.add_argument("--side", type=float, default=1100.0)
    env.add_argument("--coverage", type=float, default=45.0)
    env.add_argument("--servers", type=int, required=True)
    env.add_argument("--clusters", type=int, required=True)
    env.add_argument("--twst-weight", type=float, default=1.0)
    env.add_argument("--extra-edges", type=int, default=0)
    env.add_argument("--w1", type=float, default=1.0)
    env.add_argument("--w2", type=float, default=1.0)
    env.add_argument("--w3", type=float, default=1.0)
    env.add_argument("--seed", type=int, default=1)
    env.add_argument("--out", required=True)
    env.add_argument("--man-bandwidth", type=float, default=1000.0)
    env.add_argument("--man-latency", type=float, default=0.005)
    env.add_argument("--server-idle", type=float, default=105.0)
    env.add_argument("--server-max", type=float, default=185.0)
    env.add_argument("--server-cores", type=int, default=15)
    env.add_argument("--server-mips", type=float, default=20000.0)
    env.add_argument("--server-ram", type=float, default=80000.0)
    env.add_argument("--server-storage", type=float, default=1280000.0)
    env.set_defaults(func=_cmd_envgen)

    tune = sub.add_parser("tune", help="learning-rate grid search campaign")
    _add_scenario_flags(tune)
    tune.add_argument("--train-episodes", type=int, default=10)
    tune.add_argument("--eval-episodes", type=int, default=5)
    tune.add_argument("--actor-lr-grid", type=float, nargs="+",
                      default=list(DEFAULT_LR_GRID))
    tune.add_argument("--critic-lr-grid", type=float, nargs="+",
                      default=list(DEFAULT_LR_GRID))
    _add_hyperparam_flags(tune)
    tune.set_defaults(func=_cmd_tune)

    train = sub.add_parser("train", help="multi-episode training campaign")
    _add_scenario_flags(train)
    train.add_argument("--episodes", type=int, default=100)
    train.add_argument("--snapshot-every", type=int, default=20)
    _add_hyperparam_flags(train)
    train.set_defaults(func=_cmd_train)

    ev = sub.add_parser("evaluate", help="evaluation campaign with trained models")
    _add_scenario_flags(ev)
    ev.add_argument("--episodes", type=int, default=5)
    ev.add_argument("--pricing", choices=("model", "random"), default="model")
    _add_hyperparam_flags(ev)
    ev.set_defaults(func=_cmd_evaluate)

    summ = sub.add_parser("summarize", help="recompute metrics from logs")
    target = summ.add_mutually_exclusive_group(required=True)
    target.add_argument("--run", help="episode folder with tasks.csv")
    target.add_argument("--campaign", help="folder of ep_* episode folders")
    summ.set_defaults(func=_cmd_summarize)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())

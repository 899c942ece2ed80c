"""Tuning, training and evaluation campaigns over one scenario.

A campaign is a deterministic tree of episodes: every episode's master seed
is derived from the campaign seed and the episode's role, so rerunning a
campaign against an empty model folder reproduces every CSV byte for byte.
Training episodes run sequentially because agent state carries over.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .agents import EVALUATE, TRAIN, AgentHyperparams, AgentStateError
from .config import ScenarioConfig
from .metrics import (
    Aggregate,
    RunSummary,
    aggregate,
    write_aggregates,
    write_csv,
    write_episode,
)
from .simulation import EpisodeResult, RunSettings, run_episode
from .seeding import SeedManager

DEFAULT_LR_GRID = (5e-4, 1e-3, 5e-3)

AGGREGATED_METRICS = (
    "total_return", "offloaded_pct", "edge_success_pct", "local_success_pct",
    "avg_network_time_s", "total_energy_j", "mean_server_cpu_util_pct",
)


class CampaignError(RuntimeError):
    pass


@dataclass
class EpisodeOutcome:
    summary: RunSummary
    result: EpisodeResult


def _run_and_write(
    config: ScenarioConfig, settings: RunSettings, out_dir: Path
) -> EpisodeOutcome:
    try:
        result = run_episode(config, settings)
    except AgentStateError as exc:
        raise CampaignError(f"scenario {config.scenario_id()}: {exc}") from exc
    summary = write_episode(out_dir, result)
    return EpisodeOutcome(summary, result)


def _aggregate_outcomes(outcomes: list[EpisodeOutcome]) -> list[Aggregate]:
    rows: list[Aggregate] = []
    for metric in AGGREGATED_METRICS:
        values = [
            getattr(o.summary, metric) for o in outcomes
            if getattr(o.summary, metric) is not None
        ]
        if values:
            rows.append(aggregate(metric, values))
    agent_ids = sorted(outcomes[0].result.agent_returns)
    for agent_id in agent_ids:
        rows.append(aggregate(
            f"return_{agent_id}",
            [o.result.agent_returns[agent_id] for o in outcomes],
        ))
    return rows


def run_evaluate_campaign(
    config: ScenarioConfig,
    output_root: str | Path,
    model_root: str | Path,
    hyperparams: AgentHyperparams,
    master_seed: int,
    episodes: int = 5,
    pricing: str = "model",
) -> Path:
    """Run evaluation episodes with trained models and aggregate them."""
    scenario = config.scenario_id()
    out = Path(output_root) / "eval" / scenario
    model_dir = Path(model_root) / scenario
    seeds = SeedManager(master_seed)
    outcomes = []
    for ep in range(episodes):
        settings = RunSettings(
            mode=EVALUATE,
            master_seed=seeds.derive_seed("eval-episode", ep),
            hyperparams=hyperparams,
            model_dir=model_dir,
            pricing=pricing,
        )
        outcomes.append(_run_and_write(config, settings, out / f"ep_{ep:03d}"))
    write_aggregates(out / "aggregate.csv", _aggregate_outcomes(outcomes))
    return out


def _progress_row(episode: int, outcome: EpisodeOutcome) -> dict:
    row: dict = {"episode": episode, "total_return": sum(
        outcome.result.agent_returns.values()
    )}
    for agent_id in sorted(outcome.result.agent_returns):
        row[f"return_{agent_id}"] = outcome.result.agent_returns[agent_id]
        prices = [r.price for r in outcome.result.agent_logs[agent_id]]
        row[f"mean_price_{agent_id}"] = float(np.mean(prices)) if prices else 0.0
    return row


def run_train_campaign(
    config: ScenarioConfig,
    output_root: str | Path,
    model_root: str | Path,
    hyperparams: AgentHyperparams,
    master_seed: int,
    episodes: int = 100,
    snapshot_every: int = 20,
) -> Path:
    """Train for `episodes` rounds, snapshotting progress every 20th."""
    scenario = config.scenario_id()
    out = Path(output_root) / "train" / scenario
    model_dir = Path(model_root) / scenario
    seeds = SeedManager(master_seed)
    progress: list[dict] = []
    columns: tuple[str, ...] | None = None
    for ep in range(episodes):
        settings = RunSettings(
            mode=TRAIN,
            master_seed=seeds.derive_seed("train-episode", ep),
            hyperparams=hyperparams,
            model_dir=model_dir,
        )
        outcome = _run_and_write(config, settings, out / f"ep_{ep:03d}")
        row = _progress_row(ep, outcome)
        if columns is None:
            columns = tuple(row.keys())
        progress.append(row)
        if snapshot_every > 0 and (ep + 1) % snapshot_every == 0:
            write_csv(out / f"progress_after_{ep + 1:03d}.csv", columns, progress)
    write_csv(out / "training_progress.csv", columns, progress)
    return out


def run_tune_campaign(
    config: ScenarioConfig,
    output_root: str | Path,
    model_root: str | Path,
    hyperparams: AgentHyperparams,
    master_seed: int,
    actor_grid: tuple[float, ...] = DEFAULT_LR_GRID,
    critic_grid: tuple[float, ...] = DEFAULT_LR_GRID,
    train_episodes: int = 10,
    eval_episodes: int = 5,
) -> Path:
    """Grid-search actor/critic learning rates: train then evaluate each combo."""
    scenario = config.scenario_id()
    out = Path(output_root) / "tune" / scenario
    seeds = SeedManager(master_seed)
    combo_rows: list[dict] = []
    for ai, actor_lr in enumerate(actor_grid):
        for ci, critic_lr in enumerate(critic_grid):
            combo = f"alr_{actor_lr:g}__clr_{critic_lr:g}"
            combo_out = out / combo
            combo_models = Path(model_root) / "tune" / scenario / combo
            combo_hp = replace(hyperparams, actor_lr=actor_lr, critic_lr=critic_lr)
            label = f"tune-{ai}-{ci}"
            for ep in range(train_episodes):
                settings = RunSettings(
                    mode=TRAIN,
                    master_seed=seeds.derive_seed(f"{label}-train", ep),
                    hyperparams=combo_hp,
                    model_dir=combo_models,
                )
                _run_and_write(config, settings, combo_out / f"train_ep_{ep:03d}")
            outcomes = []
            for ep in range(eval_episodes):
                settings = RunSettings(
                    mode=EVALUATE,
                    master_seed=seeds.derive_seed(f"{label}-eval", ep),
                    hyperparams=combo_hp,
                    model_dir=combo_models,
                )
                outcomes.append(
                    _run_and_write(config, settings, combo_out / f"eval_ep_{ep:03d}")
                )
            aggregates = _aggregate_outcomes(outcomes)
            write_aggregates(combo_out / "aggregate.csv", aggregates)
            total = next(a for a in aggregates if a.metric == "total_return")
            combo_rows.append({
                "combo": combo,
                "actor_lr": actor_lr,
                "critic_lr": critic_lr,
                "mean_total_return": total.mean,
                "ci_half_width": total.ci_half_width,
            })
    write_csv(
        out / "tuning_combos.csv",
        ("combo", "actor_lr", "critic_lr", "mean_total_return", "ci_half_width"),
        combo_rows,
    )
    return out

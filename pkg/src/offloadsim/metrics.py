"""Run summaries, cross-episode aggregation and the CSV log formats.

All logs are CSV with a header row, '.' decimals and a fixed column order;
floats are written with repr so identical runs produce identical bytes.
Undefined cells (for example average network time with zero offloads) are
emitted empty.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy import stats

from .domain import TaskStatus
from .simulation import EpisodeResult, TaskRecord


class ConservationError(RuntimeError):
    """Task accounting does not reconcile; a simulator bug, never data."""


@dataclass(frozen=True)
class RunSummary:
    generated: int
    offloaded: int
    offloaded_pct: float
    edge_success_pct: float | None     # None when no offloaded task finished
    local_success_pct: float | None
    avg_network_time_s: float | None
    total_return: float
    total_energy_j: float
    mean_server_cpu_util_pct: float
    done_success: int
    failed_latency: int
    failed_energy: int
    failed_resources: int
    failed_device_dead: int
    unfinished: int


@dataclass(frozen=True)
class Aggregate:
    metric: str
    mean: float
    ci_half_width: float
    episodes: int
    degenerate: bool      # single episode, interval width is meaningless


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return str(value)


def task_row(record: TaskRecord) -> dict:
    task = record.task
    if record.offloaded and task.delivered_time is not None:
        network_time = (
            task.server_arrival_time - task.offload_send_time
            + task.delivered_time - task.exec_end_time
        )
    else:
        network_time = None
    if task.status == TaskStatus.DONE_SUCCESS or task.status == TaskStatus.FAILED_LATENCY:
        end = task.delivered_time if record.offloaded else task.exec_end_time
        total_delay = None if end is None else end - task.creation_time
    else:
        total_delay = None
    return {
        "id": task.id,
        "device": task.origin_device,
        "profile": record.profile,
        "destination": record.destination_label,
        "server": record.server_name,
        "agent": record.agent_id,
        "length_mi": task.length_mi,
        "input_bits": task.input_bits,
        "output_bits": task.output_bits,
        "container_bits": task.container_bits,
        "max_delay_s": task.max_delay,
        "created_s": task.creation_time,
        "decision_price_per_mi": record.decision_price,
        "decision_cost": record.decision_cost,
        "fallback": record.fallback,
        "offload_send_s": task.offload_send_time,
        "server_arrival_s": task.server_arrival_time,
        "exec_start_s": task.exec_start_time,
        "exec_end_s": task.exec_end_time,
        "delivered_s": task.delivered_time,
        "status": task.status,
        "total_delay_s": total_delay,
        "network_time_s": network_time,
    }


TASK_COLUMNS = (
    "id", "device", "profile", "destination", "server", "agent",
    "length_mi", "input_bits", "output_bits", "container_bits", "max_delay_s",
    "created_s", "decision_price_per_mi", "decision_cost", "fallback",
    "offload_send_s", "server_arrival_s", "exec_start_s", "exec_end_s",
    "delivered_s", "status", "total_delay_s", "network_time_s",
)

AGENT_COLUMNS = (
    "slot", "queue_state", "arrival_rate", "price", "profit", "cumulative_profit"
)

SUMMARY_COLUMNS = (
    "generated", "offloaded", "offloaded_pct", "edge_success_pct",
    "local_success_pct", "avg_network_time_s", "total_return", "total_energy_j",
    "mean_server_cpu_util_pct", "done_success", "failed_latency", "failed_energy",
    "failed_resources", "failed_device_dead", "unfinished",
)

AGGREGATE_COLUMNS = ("metric", "mean", "ci_half_width", "episodes", "degenerate")


def summarize(result: EpisodeResult) -> RunSummary:
    """Fold an episode into its headline metrics; checks task conservation."""
    rows = [task_row(r) for r in result.tasks]
    return summarize_rows(
        rows,
        total_return=sum(result.agent_returns.values()),
        total_energy_j=result.total_energy_j,
        mean_server_cpu_util_pct=result.mean_server_utilization_pct,
    )


def summarize_rows(
    rows: list[dict],
    total_return: float,
    total_energy_j: float,
    mean_server_cpu_util_pct: float,
) -> RunSummary:
    generated = len(rows)
    by_status: dict[str, int] = {}
    for row in rows:
        by_status[row["status"]] = by_status.get(row["status"], 0) + 1
    accounted = sum(
        by_status.get(s, 0)
        for s in (
            TaskStatus.DONE_SUCCESS, TaskStatus.FAILED_LATENCY,
            TaskStatus.FAILED_ENERGY, TaskStatus.FAILED_RESOURCES,
            TaskStatus.FAILED_DEVICE_DEAD, TaskStatus.UNFINISHED,
        )
    )
    if accounted != generated:
        raise ConservationError(
            f"{generated} tasks generated but {accounted} accounted for: {by_status}"
        )
    offloaded_rows = [r for r in rows if r["destination"] != "local"]
    local_rows = [r for r in rows if r["destination"] == "local"]
    offloaded = len(offloaded_rows)

    def success_pct(subset: list[dict]) -> float | None:
        finished = [
            r for r in subset
            if r["status"] in (TaskStatus.DONE_SUCCESS, TaskStatus.FAILED_LATENCY)
        ]
        if not finished:
            return None
        good = sum(1 for r in finished if r["status"] == TaskStatus.DONE_SUCCESS)
        return good / len(finished) * 100.0

    network_times = [
        r["network_time_s"] for r in offloaded_rows if r["network_time_s"] is not None
    ]
    return RunSummary(
        generated=generated,
        offloaded=offloaded,
        offloaded_pct=(offloaded / generated * 100.0) if generated else 0.0,
        edge_success_pct=success_pct(offloaded_rows),
        local_success_pct=success_pct(local_rows),
        avg_network_time_s=(
            float(np.mean(network_times)) if network_times else None
        ),
        total_return=total_return,
        total_energy_j=total_energy_j,
        mean_server_cpu_util_pct=mean_server_cpu_util_pct,
        done_success=by_status.get(TaskStatus.DONE_SUCCESS, 0),
        failed_latency=by_status.get(TaskStatus.FAILED_LATENCY, 0),
        failed_energy=by_status.get(TaskStatus.FAILED_ENERGY, 0),
        failed_resources=by_status.get(TaskStatus.FAILED_RESOURCES, 0),
        failed_device_dead=by_status.get(TaskStatus.FAILED_DEVICE_DEAD, 0),
        unfinished=by_status.get(TaskStatus.UNFINISHED, 0),
    )


def aggregate(metric: str, values: list[float]) -> Aggregate:
    """Mean and 95% Student-t confidence half-width over episodes."""
    if not values:
        raise ValueError("aggregate needs at least one value")
    n = len(values)
    mean = float(np.mean(values))
    if n == 1:
        return Aggregate(metric, mean, 0.0, 1, degenerate=True)
    sd = float(np.std(values, ddof=1))
    half = float(stats.t.ppf(0.975, n - 1) * sd / math.sqrt(n))
    return Aggregate(metric, mean, half, n, degenerate=False)


# -- CSV writing ---------------------------------------------------------------


def write_csv(path: Path, columns: tuple[str, ...], rows: list[dict]) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_fmt(row.get(c)) for c in columns])


def write_episode(directory: str | Path, result: EpisodeResult) -> RunSummary:
    """Emit tasks.csv, agents/<id>.csv and summary.csv for one episode."""
    directory = Path(directory)
    write_csv(directory / "tasks.csv", TASK_COLUMNS, [task_row(r) for r in result.tasks])
    for agent_id, rows in result.agent_logs.items():
        write_csv(
            directory / "agents" / f"{agent_id}.csv",
            AGENT_COLUMNS,
            [vars(r) for r in rows],
        )
    summary = summarize(result)
    write_csv(directory / "summary.csv", SUMMARY_COLUMNS, [vars(summary).copy()])
    return summary


def write_aggregates(path: Path, aggregates: list[Aggregate]) -> None:
    write_csv(
        path,
        AGGREGATE_COLUMNS,
        [
            {
                "metric": a.metric,
                "mean": a.mean,
                "ci_half_width": a.ci_half_width,
                "episodes": a.episodes,
                "degenerate": a.degenerate,
            }
            for a in aggregates
        ],
    )


# -- CSV reading (for the summarize tool and tests) -----------------------------


def _parse_cell(text: str):
    if text == "":
        return None
    if text in ("true", "false"):
        return text == "true"
    try:
        f = float(text)
    except ValueError:
        return text
    if f.is_integer() and "." not in text and "e" not in text and "E" not in text:
        return int(f)
    return f


def read_csv_rows(path: str | Path) -> list[dict]:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        return [{k: _parse_cell(v) for k, v in row.items()} for row in reader]


def read_summary(path: str | Path) -> dict:
    rows = read_csv_rows(path)
    if len(rows) != 1:
        raise ValueError(f"{path}: expected exactly one summary row")
    return rows[0]

"""Computing-node state: mobility, FIFO multi-core CPU, queues and energy.

Queue pressure is tracked in MIs and includes the remaining work of tasks
already executing, so estimates move continuously as tasks start.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .domain import DeviceTypeSpec, ImportanceWeights, Location, ServerSpec, Task


@dataclass
class MobilityState:
    """Move/pause cycle toward uniformly drawn waypoints inside the square."""

    phase: str = "paused"          # "paused" or "moving"
    phase_end: float = 0.0
    waypoint: Location | None = None


@dataclass
class EnergyState:
    battery_remaining_j: float = math.inf   # devices only; inf for mains power
    consumed_total_j: float = 0.0

    def charge(self, joules: float) -> None:
        self.consumed_total_j += joules
        if self.battery_remaining_j != math.inf:
            self.battery_remaining_j = max(0.0, self.battery_remaining_j - joules)


@dataclass
class _Executing:
    task: Task
    finish_time: float


class CpuState:
    """FIFO scheduler; one task occupies exactly one core for length/f seconds."""

    def __init__(self, cores: int, mips_per_core: float):
        self.cores = cores
        self.mips_per_core = mips_per_core
        self.busy: dict[int, _Executing] = {}   # task id -> slot
        self.queue: list[Task] = []
        self.busy_core_seconds: float = 0.0     # exact accumulation at finish

    def exec_seconds(self, task: Task) -> float:
        return task.length_mi / self.mips_per_core

    def submit(self, task: Task, now: float) -> float | None:
        """Start the task if a core is free, else queue it.

        Returns the exact finish time when execution starts, else None.
        """
        if len(self.busy) < self.cores:
            finish = now + self.exec_seconds(task)
            self.busy[task.id] = _Executing(task, finish)
            return finish
        self.queue.append(task)
        return None

    def finish(self, task_id: int, now: float) -> tuple[Task, Task | None, float | None]:
        """Complete a task; returns (done, started_next, next_finish_time)."""
        slot = self.busy.pop(task_id)
        self.busy_core_seconds += self.exec_seconds(slot.task)
        if self.queue:
            nxt = self.queue.pop(0)
            finish = now + self.exec_seconds(nxt)
            self.busy[nxt.id] = _Executing(nxt, finish)
            return slot.task, nxt, finish
        return slot.task, None, None

    def queued_mi(self, now: float) -> float:
        """Waiting MIs plus the remaining MIs of everything executing."""
        total = sum(t.length_mi for t in self.queue)
        for slot in self.busy.values():
            total += max(0.0, slot.finish_time - now) * self.mips_per_core
        return total

    def task_count(self) -> int:
        return len(self.queue) + len(self.busy)

    def busy_cores(self) -> int:
        return len(self.busy)


class ComputingNode:
    """Shared behaviour for edge devices and edge servers."""

    def __init__(self, node_id: int, name: str, location: Location,
                 cores: int, mips_per_core: float,
                 idle_power: float, max_power: float):
        self.id = node_id
        self.name = name
        self.location = location
        self.cpu = CpuState(cores, mips_per_core)
        self.energy = EnergyState()
        self.idle_power = idle_power
        self.max_power = max_power

    def utilization_power(self) -> float:
        """Instantaneous draw: idle plus the busy-core share of the span."""
        share = self.cpu.busy_cores() / self.cpu.cores
        return self.idle_power + (self.max_power - self.idle_power) * share


def energy_tick_joules(node: ComputingNode, dt: float) -> float:
    """Energy drawn over dt at the node's current core occupancy."""
    return dt * node.utilization_power()


def tx_rx_energy(tx_power: float, rx_power: float,
                 d_in_bits: float, d_out_bits: float,
                 uplink_bps: float, downlink_bps: float) -> float:
    """Device-side radio energy for sending d_in and receiving d_out."""
    return tx_power * d_in_bits / uplink_bps + rx_power * d_out_bits / downlink_bps


def local_exec_energy(max_power: float, length_mi: float, total_mips: float) -> float:
    """Energy to run a task flat out on the device's whole CPU."""
    return max_power * length_mi / total_mips


class EdgeServer(ComputingNode):
    def __init__(self, node_id: int, name: str, location: Location, spec: ServerSpec,
                 vertex: int, cluster: int, is_head: bool):
        super().__init__(node_id, name, location, spec.cores, spec.mips_per_core,
                         spec.idle_power, spec.max_power)
        self.spec = spec
        self.vertex = vertex          # index in the MAN graph
        self.cluster = cluster
        self.is_head = is_head
        self.free_ram_mb = spec.ram_mb
        self.free_storage_mb = spec.storage_mb
        self.published_queue_estimate = 0.0   # refreshed at each price slot

    def admit(self, task: Task) -> bool:
        """Reserve RAM/storage for the task's container, or reject."""
        need_mb = task.container_bits / 8000.0 / 1000.0
        if need_mb > self.free_ram_mb or need_mb > self.free_storage_mb:
            return False
        self.free_ram_mb -= need_mb
        self.free_storage_mb -= need_mb
        return True

    def release(self, task: Task) -> None:
        need_mb = task.container_bits / 8000.0 / 1000.0
        self.free_ram_mb += need_mb
        self.free_storage_mb += need_mb

    def queue_time_estimate(self, now: float) -> float:
        """Own queue drain time: queued MIs over total capacity."""
        return self.cpu.queued_mi(now) / self.spec.total_mips


def cluster_queue_time_estimate(members: list[EdgeServer], now: float) -> float:
    """Cluster drain time: summed MIs over the cluster's total capacity."""
    total_mi = sum(s.cpu.queued_mi(now) for s in members)
    total_capacity = sum(s.spec.total_mips for s in members)
    return total_mi / total_capacity


class EdgeDevice(ComputingNode):
    def __init__(self, node_id: int, name: str, location: Location,
                 spec: DeviceTypeSpec, weights: ImportanceWeights):
        super().__init__(node_id, name, location, spec.cores, spec.mips_per_core,
                         spec.idle_power, spec.max_power)
        self.spec = spec
        self.weights = weights
        self.mobility = MobilityState()
        self.ap: int = -1              # current access point vertex
        self.dead = False
        if spec.battery_powered:
            self.energy.battery_remaining_j = (
                spec.battery_capacity_j * spec.initial_battery_pct / 100.0
            )

    @property
    def is_static(self) -> bool:
        return self.spec.speed <= 0.0

    def local_queue_time(self, now: float) -> float:
        return self.cpu.queued_mi(now) / self.spec.total_mips


def update_mobility(device: EdgeDevice, dt: float, side: float,
                    rng: np.random.Generator) -> bool:
    """Advance one move/pause tick; returns True if the device moved.

    Phase lengths are uniform over the type's ranges; a new uniform waypoint
    is drawn whenever the current one is reached mid-phase.
    """
    if device.is_static or device.dead:
        return False
    mob = device.mobility
    now_end = mob.phase_end
    if now_end <= 0.0 and mob.waypoint is None and mob.phase == "paused":
        # first tick: start with a pause so arrival bursts do not all move
        mob.phase_end = _uniform_range(device.spec.pause_range, rng)
    if mob.phase == "paused":
        mob.phase_end -= dt
        if mob.phase_end <= 0.0:
            mob.phase = "moving"
            mob.phase_end = _uniform_range(device.spec.mobility_range, rng)
            mob.waypoint = _uniform_point(side, rng)
        return False
    # moving
    travel = device.spec.speed * dt
    moved = False
    while travel > 0.0:
        if mob.waypoint is None:
            mob.waypoint = _uniform_point(side, rng)
        dx = mob.waypoint.x - device.location.x
        dy = mob.waypoint.y - device.location.y
        dist = math.hypot(dx, dy)
        if dist <= travel:
            device.location = mob.waypoint
            mob.waypoint = _uniform_point(side, rng)
            travel -= dist
            moved = True
        else:
            device.location = Location(
                device.location.x + dx / dist * travel,
                device.location.y + dy / dist * travel,
            )
            travel = 0.0
            moved = True
    mob.phase_end -= dt
    if mob.phase_end <= 0.0:
        mob.phase = "paused"
        mob.phase_end = _uniform_range(device.spec.pause_range, rng)
        mob.waypoint = None
    return moved


def _uniform_range(bounds: tuple[float, float], rng: np.random.Generator) -> float:
    return bounds[0] + (bounds[1] - bounds[0]) * rng.random()


def _uniform_point(side: float, rng: np.random.Generator) -> Location:
    u, v = rng.random(2)
    return Location(u * side, v * side)

"""Core records and stochastic generators for tasks, applications and devices.

Pure value types plus samplers over caller-supplied numpy Generators; nothing
in here touches shared state, so everything is safe to reuse across threads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

BITS_PER_KB = 8000.0  # network rates are decimal Mbps, so 1 kB = 8000 bits


@dataclass(frozen=True)
class Location:
    x: float
    y: float

    def distance_to(self, other: "Location") -> float:
        return math.hypot(self.x - other.x, self.y - other.y)


@dataclass(frozen=True)
class ApplicationProfile:
    """Stochastic task profile shared by all devices of one application type."""

    name: str
    poisson_rate: float            # expected task arrivals per second
    latency_constraint: float      # max tolerable delay per task, seconds
    input_range_kb: tuple[float, float]
    container_range_kb: tuple[float, float]   # (0, 0) means container = input
    output_ratio_range: tuple[float, float]
    expected_length_mi: float      # mean of the exponential task length
    device_share: float            # percent of task-generating devices

    def validate(self) -> None:
        if self.poisson_rate <= 0:
            raise ValueError(f"profile {self.name}: poisson rate must be > 0")
        if self.latency_constraint <= 0:
            raise ValueError(f"profile {self.name}: latency constraint must be > 0")
        if self.expected_length_mi <= 0:
            raise ValueError(f"profile {self.name}: expected task length must be > 0")
        for label, rng in (
            ("input size", self.input_range_kb),
            ("container size", self.container_range_kb),
            ("output ratio", self.output_ratio_range),
        ):
            if rng[0] > rng[1]:
                raise ValueError(f"profile {self.name}: {label} range has min > max")
            if rng[0] < 0:
                raise ValueError(f"profile {self.name}: {label} range is negative")

    @property
    def container_follows_input(self) -> bool:
        return self.container_range_kb == (0.0, 0.0)


@dataclass(frozen=True)
class DeviceTypeSpec:
    """One row of the edge-device type table."""

    name: str
    share: float                   # percent of all devices
    speed: float                   # m/s; 0 means static
    pause_range: tuple[float, float]      # seconds
    mobility_range: tuple[float, float]   # seconds
    battery_capacity_wh: float
    idle_power: float              # W
    max_power: float               # W
    cores: int
    mips_per_core: float
    ram_mb: float
    storage_mb: float
    tx_power: float = 1.3          # W, spent while uploading
    rx_power: float = 1.0          # W, spent while downloading
    battery_powered: bool = True
    initial_battery_pct: float = 100.0
    generates_tasks: bool = True
    can_orchestrate: bool = True
    connectivity: str = "wifi"

    def validate(self) -> None:
        if not (0 <= self.idle_power <= self.max_power):
            raise ValueError(f"device type {self.name}: need 0 <= idle <= max power")
        if self.cores < 1:
            raise ValueError(f"device type {self.name}: cores must be >= 1")
        if self.mips_per_core <= 0:
            raise ValueError(f"device type {self.name}: mips per core must be > 0")
        if self.speed < 0:
            raise ValueError(f"device type {self.name}: speed must be >= 0")
        for label, rng in (("pause", self.pause_range), ("mobility", self.mobility_range)):
            if rng[0] > rng[1] or rng[0] < 0:
                raise ValueError(f"device type {self.name}: bad {label} range")

    @property
    def battery_capacity_j(self) -> float:
        return self.battery_capacity_wh * 3600.0

    @property
    def total_mips(self) -> float:
        return self.cores * self.mips_per_core


@dataclass(frozen=True)
class ServerSpec:
    """Homogeneous edge-server hardware description."""

    idle_power: float
    max_power: float
    cores: int
    mips_per_core: float
    ram_mb: float
    storage_mb: float

    def validate(self) -> None:
        if self.idle_power > self.max_power:
            raise ValueError("server spec: idle power exceeds max power")
        if self.cores < 1:
            raise ValueError("server spec: cores must be >= 1")
        if self.mips_per_core <= 0:
            raise ValueError("server spec: mips per core must be > 0")

    @property
    def total_mips(self) -> float:
        return self.cores * self.mips_per_core


@dataclass(frozen=True)
class ImportanceWeights:
    """Per-device normalized preference weights for delay, energy and price."""

    delay: float
    energy: float
    price: float

    def validate(self) -> None:
        total = self.delay + self.energy + self.price
        if abs(total - 1.0) > 1e-12:
            raise ValueError(f"importance weights sum to {total!r}, expected 1")
        if min(self.delay, self.energy, self.price) < 0:
            raise ValueError("importance weights must be non-negative")


class TaskStatus:
    """Task lifecycle states; transitions are monotone along the lifecycle."""

    CREATED = "created"
    QUEUED = "queued"
    EXECUTING = "executing"
    DONE_SUCCESS = "done-success"
    FAILED_LATENCY = "failed-latency"
    FAILED_ENERGY = "failed-energy"
    FAILED_DEVICE_DEAD = "failed-device-dead"
    FAILED_RESOURCES = "failed-resources"   # server rejected for RAM/storage
    UNFINISHED = "unfinished"               # still in flight at simulation end

    TERMINAL = frozenset(
        {DONE_SUCCESS, FAILED_LATENCY, FAILED_ENERGY, FAILED_DEVICE_DEAD,
         FAILED_RESOURCES, UNFINISHED}
    )


@dataclass
class Task:
    """One offloadable unit of work and its lifecycle timestamps."""

    id: int
    length_mi: float               # computational demand, MIs
    input_bits: float
    output_bits: float
    container_bits: float
    max_delay: float               # seconds
    origin_device: int
    creation_time: float
    status: str = TaskStatus.CREATED
    destination: int | None = None   # node id, or origin_device for local
    # timestamps, None until the corresponding step happens
    offload_send_time: float | None = None
    server_arrival_time: float | None = None
    exec_start_time: float | None = None
    exec_end_time: float | None = None
    delivered_time: float | None = None

    def validate(self) -> None:
        if self.length_mi <= 0:
            raise ValueError(f"task {self.id}: length must be > 0")
        if min(self.input_bits, self.output_bits, self.container_bits) < 0:
            raise ValueError(f"task {self.id}: sizes must be >= 0")
        if self.max_delay <= 0:
            raise ValueError(f"task {self.id}: max delay must be > 0")


def _exponential(mean: float, rng: np.random.Generator) -> float:
    """Inverse-CDF exponential draw; redraws the zero-probability edge case."""
    while True:
        u = rng.random()
        value = -mean * math.log1p(-u)
        if value > 0.0:
            return value


def _uniform(bounds: tuple[float, float], u: float) -> float:
    return bounds[0] + (bounds[1] - bounds[0]) * u


def sample_task(
    profile: ApplicationProfile,
    device_id: int,
    now: float,
    task_id: int,
    rng: np.random.Generator,
) -> Task:
    """Draw one task from a profile on the device's dedicated stream.

    Input size is uniform over the profile range (kB, converted at 8000
    bits/kB), output is a uniform ratio of the input, length is exponential
    with the profile mean, and a (0, 0) container range reuses the input
    size as the container size.
    """
    u_in, u_ratio, u_container = rng.random(3)
    input_kb = _uniform(profile.input_range_kb, u_in)
    ratio = _uniform(profile.output_ratio_range, u_ratio)
    if profile.container_follows_input:
        container_kb = input_kb
    else:
        container_kb = _uniform(profile.container_range_kb, u_container)
    length = _exponential(profile.expected_length_mi, rng)
    return Task(
        id=task_id,
        length_mi=length,
        input_bits=input_kb * BITS_PER_KB,
        output_bits=ratio * input_kb * BITS_PER_KB,
        container_bits=container_kb * BITS_PER_KB,
        max_delay=profile.latency_constraint,
        origin_device=device_id,
        creation_time=now,
    )


def generate_weights(rng: np.random.Generator) -> ImportanceWeights:
    """Uniform sample on the 2-simplex via two sorted uniforms (gap method)."""
    u, v = rng.random(2)
    lo, hi = (u, v) if u <= v else (v, u)
    return ImportanceWeights(delay=lo, energy=hi - lo, price=1.0 - hi)


def poisson_arrivals(
    rate: float, horizon: float, rng: np.random.Generator
) -> list[float]:
    """Strictly increasing Poisson arrival times in (0, horizon].

    Inter-arrival gaps are inverse-CDF exponential with mean 1/rate so the
    sequence only depends on the stream, never on consumer order.
    """
    if rate <= 0:
        raise ValueError("poisson rate must be > 0")
    times: list[float] = []
    t = 0.0
    while True:
        t += _exponential(1.0 / rate, rng)
        if t > horizon:
            return times
        times.append(t)

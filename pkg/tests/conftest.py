"""Shared builders for scenario configs and small layouts."""

from __future__ import annotations

import sys
from dataclasses import replace
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))
sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from offloadsim.config import (
    ApRecord,
    CloudRecord,
    DatacenterLayout,
    LinkRecord,
    ScenarioConfig,
    ServerRecord,
    SimulationParams,
)
from offloadsim.domain import ApplicationProfile, DeviceTypeSpec, Location, ServerSpec

SAMPLES = Path(__file__).resolve().parents[1] / "samples"

HIGH_CAPACITY = ServerSpec(idle_power=105.0, max_power=185.0, cores=15,
                           mips_per_core=20000.0, ram_mb=80000.0,
                           storage_mb=1280000.0)

LOW_CAPACITY = ServerSpec(idle_power=45.0, max_power=95.0, cores=6,
                          mips_per_core=10000.0, ram_mb=16000.0,
                          storage_mb=256000.0)

MOBILE_TYPE = DeviceTypeSpec(
    name="type1", share=50.0, speed=1.1, pause_range=(60.0, 300.0),
    mobility_range=(60.0, 300.0), battery_capacity_wh=19.25,
    idle_power=0.9, max_power=6.2, cores=6, mips_per_core=6000.0,
    ram_mb=6000.0, storage_mb=128000.0,
)

STATIC_TYPE = DeviceTypeSpec(
    name="type4", share=50.0, speed=0.0, pause_range=(0.0, 0.0),
    mobility_range=(0.0, 0.0), battery_capacity_wh=56.5,
    idle_power=1.7, max_power=23.6, cores=6, mips_per_core=7000.0,
    ram_mb=8000.0, storage_mb=256000.0,
)

DEFAULT_PROFILE = ApplicationProfile(
    name="default", poisson_rate=1.0, latency_constraint=0.5,
    input_range_kb=(100.0, 1000.0), container_range_kb=(0.0, 0.0),
    output_ratio_range=(0.2, 0.8), expected_length_mi=2000.0,
    device_share=100.0,
)

CLOUD = (CloudRecord(name="cloud1", idle_power=500.0, max_power=1000.0, cores=64,
                     mips_per_core=40000.0, ram_mb=512000.0, storage_mb=10000000.0),)


def line_layout(
    n_aps: int,
    server_hosts: list[int],
    clusters: list[int] | None = None,
    heads: list[bool] | None = None,
    spacing: float = 100.0,
    man_latency: float = 0.005,
    man_bandwidth: float = 1000.0,
    spec: ServerSpec = HIGH_CAPACITY,
) -> DatacenterLayout:
    """APs on a horizontal line, servers hung off the given AP indices."""
    aps = tuple(
        ApRecord(f"ap{i + 1}", Location(spacing * i, 0.0)) for i in range(n_aps)
    )
    if clusters is None:
        clusters = list(range(len(server_hosts)))
    if heads is None:
        heads = [True] * len(server_hosts)
    servers = tuple(
        ServerRecord(
            name=f"dc{i + 1}",
            location=Location(spacing * host, 0.0),
            cluster=clusters[i],
            is_head=heads[i],
            spec=spec,
        )
        for i, host in enumerate(server_hosts)
    )
    links = [
        LinkRecord(f"ap{i + 1}", f"ap{i + 2}", man_latency, man_bandwidth)
        for i in range(n_aps - 1)
    ]
    links += [
        LinkRecord(f"dc{i + 1}", f"ap{host + 1}", 0.0, man_bandwidth)
        for i, host in enumerate(server_hosts)
    ]
    return DatacenterLayout(aps=aps, servers=servers, links=tuple(links))


def make_params(
    minutes: float = 1.0,
    devices: int = 4,
    side: float = 400.0,
    topology: str = "DECENTRALIZED",
    wifi_bandwidth: float = 1300.0,
    wifi_latency: float = 0.0025,
    update_interval: float = 1.0,
    network_update_interval: float = 1.0,
) -> SimulationParams:
    return SimulationParams(
        simulation_time=minutes,
        update_interval=update_interval,
        enable_orchestrators=False,
        network_update_interval=network_update_interval,
        man_bandwidth=1000.0,
        man_latency=0.005,
        wifi_bandwidth=wifi_bandwidth,
        wifi_latency=wifi_latency,
        orchestration_architectures="EDGE_ONLY",
        orchestration_algorithms=topology,
        number_of_edge_devices=devices,
        simulation_area_side=side,
    )


def make_config(
    layout: DatacenterLayout,
    device_types=(MOBILE_TYPE, STATIC_TYPE),
    profiles=(DEFAULT_PROFILE,),
    **param_kwargs,
) -> ScenarioConfig:
    return ScenarioConfig(
        layout=layout,
        cloud=CLOUD,
        device_types=tuple(device_types),
        profiles=tuple(profiles),
        params=make_params(**param_kwargs),
    )


@pytest.fixture
def smoke_config():
    from offloadsim.config import parse_inputs

    return parse_inputs(SAMPLES / "smoke")


def shrink(config: ScenarioConfig, minutes: float | None = None,
           devices: int | None = None, topology: str | None = None) -> ScenarioConfig:
    params = config.params
    if minutes is not None:
        params = replace(params, simulation_time=minutes)
    if devices is not None:
        params = replace(params, number_of_edge_devices=devices)
    if topology is not None:
        params = replace(params, orchestration_algorithms=topology)
    return replace(config, params=params)

"""Regenerate the shipped sample scenarios (samples/smoke, samples/city)."""

from pathlib import Path

from offloadsim.config import (
    CloudRecord,
    ScenarioConfig,
    SimulationParams,
    write_scenario,
)
from offloadsim.domain import ApplicationProfile, DeviceTypeSpec, ServerSpec
from offloadsim.envgen import GenParams, generate_environment

ROOT = Path(__file__).resolve().parents[1]

DEVICE_TYPES = (
    DeviceTypeSpec(
        name="type1", share=30.0, speed=1.1, pause_range=(60.0, 300.0),
        mobility_range=(60.0, 300.0), battery_capacity_wh=19.25,
        idle_power=0.9, max_power=6.2, cores=6, mips_per_core=6000.0,
        ram_mb=6000.0, storage_mb=128000.0,
    ),
    DeviceTypeSpec(
        name="type2", share=40.0, speed=1.1, pause_range=(60.0, 300.0),
        mobility_range=(60.0, 300.0), battery_capacity_wh=15.4,
        idle_power=0.6, max_power=5.5, cores=4, mips_per_core=4000.0,
        ram_mb=4000.0, storage_mb=64000.0,
    ),
    DeviceTypeSpec(
        name="type3", share=20.0, speed=0.6, pause_range=(180.0, 600.0),
        mobility_range=(60.0, 300.0), battery_capacity_wh=25.9,
        idle_power=1.1, max_power=6.5, cores=4, mips_per_core=3000.0,
        ram_mb=2000.0, storage_mb=32000.0,
    ),
    DeviceTypeSpec(
        name="type4", share=10.0, speed=0.0, pause_range=(0.0, 0.0),
        mobility_range=(0.0, 0.0), battery_capacity_wh=56.5,
        idle_power=1.7, max_power=23.6, cores=6, mips_per_core=7000.0,
        ram_mb=8000.0, storage_mb=256000.0,
    ),
)

PROFILES = (
    ApplicationProfile(
        name="default", poisson_rate=1.0, latency_constraint=0.5,
        input_range_kb=(100.0, 1000.0), container_range_kb=(0.0, 0.0),
        output_ratio_range=(0.2, 0.8), expected_length_mi=2000.0,
        device_share=100.0,
    ),
)

CLOUD = (
    CloudRecord(name="cloud1", idle_power=500.0, max_power=1000.0, cores=64,
                mips_per_core=40000.0, ram_mb=512000.0, storage_mb=10000000.0),
)

HIGH_CAPACITY = ServerSpec(idle_power=105.0, max_power=185.0, cores=15,
                           mips_per_core=20000.0, ram_mb=80000.0,
                           storage_mb=1280000.0)


def params(minutes, devices, side, topology):
    return SimulationParams(
        simulation_time=float(minutes),
        update_interval=1.0,
        enable_orchestrators=False,
        network_update_interval=1.0,
        man_bandwidth=1000.0,
        man_latency=0.005,
        wifi_bandwidth=1300.0,
        wifi_latency=0.0025,
        orchestration_architectures="EDGE_ONLY",
        orchestration_algorithms=topology,
        number_of_edge_devices=devices,
        simulation_area_side=float(side),
    )


def main():
    smoke_layout = generate_environment(GenParams(
        side=500.0, coverage=60.0, server_count=5, cluster_count=2, seed=7,
        twst_weight=0.7, extra_edges=4, server_spec=HIGH_CAPACITY,
    ))
    write_scenario(ROOT / "samples" / "smoke", ScenarioConfig(
        layout=smoke_layout, cloud=CLOUD, device_types=DEVICE_TYPES,
        profiles=PROFILES, params=params(10, 50, 500, "DECENTRALIZED"),
    ))

    city_layout = generate_environment(GenParams(
        side=1100.0, coverage=45.0, server_count=20, cluster_count=8, seed=11,
        twst_weight=0.7, extra_edges=20, server_spec=HIGH_CAPACITY,
    ))
    write_scenario(ROOT / "samples" / "city", ScenarioConfig(
        layout=city_layout, cloud=CLOUD, device_types=DEVICE_TYPES,
        profiles=PROFILES, params=params(60, 1000, 1100, "HYBRID"),
    ))
    print("samples written")


if __name__ == "__main__":
    main()

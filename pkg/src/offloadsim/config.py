"""Input-file parsing, validation and canonical emission.

A scenario is defined by five files in one folder: cloud.xml,
edge_datacenters.xml, edge_devices.xml, applications.xml and
simulation_parameters.properties. Parsers validate eagerly and report the
file, element and rule violated; emitters write a canonical form so that
emit(parse(file)) round-trips byte-identically for shipped samples.
"""

from __future__ import annotations

import xml.etree.ElementTree as ET
from dataclasses import dataclass, replace
from pathlib import Path

from .domain import ApplicationProfile, DeviceTypeSpec, Location, ServerSpec

CENTRALIZED = "CENTRALIZED"
HYBRID = "HYBRID"
DECENTRALIZED = "DECENTRALIZED"
TOPOLOGIES = (CENTRALIZED, HYBRID, DECENTRALIZED)

INPUT_FILES = (
    "cloud.xml",
    "edge_datacenters.xml",
    "edge_devices.xml",
    "applications.xml",
    "simulation_parameters.properties",
)


class ConfigError(ValueError):
    """Input problem; message carries file, element and violated rule."""


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    return repr(float(value))


@dataclass(frozen=True)
class ApRecord:
    name: str
    location: Location
    periphery: bool = True


@dataclass(frozen=True)
class ServerRecord:
    name: str
    location: Location
    cluster: int
    is_head: bool
    spec: ServerSpec
    periphery: bool = False


@dataclass(frozen=True)
class LinkRecord:
    from_name: str
    to_name: str
    latency: float
    bandwidth: float


@dataclass(frozen=True)
class CloudRecord:
    name: str
    idle_power: float
    max_power: float
    cores: int
    mips_per_core: float
    ram_mb: float
    storage_mb: float


@dataclass(frozen=True)
class DatacenterLayout:
    aps: tuple[ApRecord, ...]
    servers: tuple[ServerRecord, ...]
    links: tuple[LinkRecord, ...]


@dataclass(frozen=True)
class SimulationParams:
    simulation_time: float            # minutes, as in the input file
    update_interval: float            # seconds, mobility + energy rounds
    enable_orchestrators: bool
    network_update_interval: float    # seconds
    man_bandwidth: float              # Mbps
    man_latency: float                # seconds
    wifi_bandwidth: float             # Mbps
    wifi_latency: float               # seconds
    orchestration_architectures: str
    orchestration_algorithms: str
    number_of_edge_devices: int
    simulation_area_side: float       # meters

    @property
    def horizon_seconds(self) -> float:
        return self.simulation_time * 60.0


@dataclass
class ScenarioConfig:
    """Everything one episode needs, input files plus command-line knobs."""

    layout: DatacenterLayout
    cloud: tuple[CloudRecord, ...]
    device_types: tuple[DeviceTypeSpec, ...]
    profiles: tuple[ApplicationProfile, ...]
    params: SimulationParams
    input_folder: Path | None = None

    @property
    def topology(self) -> str:
        return self.params.orchestration_algorithms

    @property
    def server_spec(self) -> ServerSpec:
        return self.layout.servers[0].spec

    def scenario_id(self) -> str:
        return (
            f"{self.topology.lower()}_{len(self.layout.servers)}s_"
            f"{self.params.number_of_edge_devices}d"
        )

    def with_overrides(self, topology: str | None = None,
                       devices: int | None = None) -> "ScenarioConfig":
        params = self.params
        if topology is not None:
            if topology not in TOPOLOGIES:
                raise ConfigError(f"unknown topology {topology!r}; expected one of {TOPOLOGIES}")
            params = replace(params, orchestration_algorithms=topology)
        if devices is not None:
            if devices < 1:
                raise ConfigError("device count must be >= 1")
            params = replace(params, number_of_edge_devices=devices)
        return replace(self, params=params)


# -- small parse helpers ----------------------------------------------------


def _child_text(filename: str, parent: ET.Element, tag: str) -> str:
    node = parent.find(tag)
    if node is None or node.text is None:
        ident = parent.get("name") or parent.get("type") or parent.tag
        raise ConfigError(f"{filename}: element {ident!r} is missing <{tag}>")
    return node.text.strip()


def _child_float(filename: str, parent: ET.Element, tag: str) -> float:
    text = _child_text(filename, parent, tag)
    try:
        return float(text)
    except ValueError as exc:
        raise ConfigError(f"{filename}: <{tag}> value {text!r} is not a number") from exc


def _child_int(filename: str, parent: ET.Element, tag: str) -> int:
    text = _child_text(filename, parent, tag)
    try:
        return int(text)
    except ValueError as exc:
        raise ConfigError(f"{filename}: <{tag}> value {text!r} is not an integer") from exc


def _child_bool(filename: str, parent: ET.Element, tag: str) -> bool:
    text = _child_text(filename, parent, tag).lower()
    if text not in ("true", "false"):
        raise ConfigError(f"{filename}: <{tag}> must be true or false, got {text!r}")
    return text == "true"


def _parse_root(path: Path, expected_root: str) -> ET.Element:
    try:
        tree = ET.parse(path)
    except ET.ParseError as exc:
        raise ConfigError(f"{path.name}: malformed XML: {exc}") from exc
    root = tree.getroot()
    if root.tag != expected_root:
        raise ConfigError(f"{path.name}: root element must be <{expected_root}>")
    return root


# -- file parsers -------------------------------------------------------------


def parse_datacenters(path: Path) -> DatacenterLayout:
    root = _parse_root(path, "edge_datacenters")
    fname = path.name
    aps: list[ApRecord] = []
    servers: list[ServerRecord] = []
    for dc in root.findall("datacenter"):
        name = dc.get("name")
        if not name:
            raise ConfigError(f"{fname}: datacenter element without a name attribute")
        loc_el = dc.find("location")
        if loc_el is None:
            raise ConfigError(f"{fname}: datacenter {name!r} is missing <location>")
        location = Location(
            _child_float(fname, loc_el, "x"), _child_float(fname, loc_el, "y")
        )
        periphery = _child_bool(fname, dc, "periphery")
        if "dc" in name:
            spec = ServerSpec(
                idle_power=_child_float(fname, dc, "idleConsumption"),
                max_power=_child_float(fname, dc, "maxConsumption"),
                cores=_child_int(fname, dc, "cores"),
                mips_per_core=_child_float(fname, dc, "mipsPerCore"),
                ram_mb=_child_float(fname, dc, "ram"),
                storage_mb=_child_float(fname, dc, "storage"),
            )
            try:
                spec.validate()
            except ValueError as exc:
                raise ConfigError(f"{fname}: datacenter {name!r}: {exc}") from exc
            cluster = _child_int(fname, dc, "cluster")
            if cluster < 0:
                raise ConfigError(f"{fname}: datacenter {name!r}: cluster must be >= 0")
            servers.append(ServerRecord(
                name=name, location=location, cluster=cluster,
                is_head=_child_bool(fname, dc, "isClusterHead"),
                spec=spec, periphery=periphery,
            ))
        elif "ap" in name:
            aps.append(ApRecord(name=name, location=location, periphery=periphery))
        else:
            raise ConfigError(
                f"{fname}: node name {name!r} must contain 'dc' (server) or 'ap' (access point)"
            )
    if not servers:
        raise ConfigError(f"{fname}: no edge servers defined")
    first = servers[0].spec
    for record in servers[1:]:
        if record.spec != first:
            raise ConfigError(
                f"{fname}: servers must share one spec; {record.name!r} differs"
            )
    links: list[LinkRecord] = []
    links_el = root.find("network_links")
    if links_el is None:
        raise ConfigError(f"{fname}: missing <network_links> section")
    names = {r.name for r in aps} | {r.name for r in servers}
    for link in links_el.findall("link"):
        from_name = _child_text(fname, link, "from")
        to_name = _child_text(fname, link, "to")
        for endpoint in (from_name, to_name):
            if endpoint not in names:
                raise ConfigError(f"{fname}: link references unknown node {endpoint!r}")
        latency = _child_float(fname, link, "latency")
        bandwidth = _child_float(fname, link, "bandwidth")
        if bandwidth <= 0 or latency < 0:
            raise ConfigError(
                f"{fname}: link {from_name}-{to_name} needs bandwidth > 0 and latency >= 0"
            )
        links.append(LinkRecord(from_name, to_name, latency, bandwidth))
    return DatacenterLayout(tuple(aps), tuple(servers), tuple(links))


def parse_devices(path: Path) -> tuple[DeviceTypeSpec, ...]:
    root = _parse_root(path, "edge_devices")
    fname = path.name
    types: list[DeviceTypeSpec] = []
    for dev in root.findall("device"):
        name = dev.get("type")
        if not name:
            raise ConfigError(f"{fname}: device element without a type attribute")
        spec = DeviceTypeSpec(
            name=name,
            share=_child_float(fname, dev, "percentage"),
            speed=_child_float(fname, dev, "speed"),
            pause_range=(
                _child_float(fname, dev, "minPauseDuration"),
                _child_float(fname, dev, "maxPauseDuration"),
            ),
            mobility_range=(
                _child_float(fname, dev, "minMobilityDuration"),
                _child_float(fname, dev, "maxMobilityDuration"),
            ),
            battery_capacity_wh=_child_float(fname, dev, "batteryCapacity"),
            idle_power=_child_float(fname, dev, "idleConsumption"),
            max_power=_child_float(fname, dev, "maxConsumption"),
            cores=_child_int(fname, dev, "cores"),
            mips_per_core=_child_float(fname, dev, "mipsPerCore"),
            ram_mb=_child_float(fname, dev, "ram"),
            storage_mb=_child_float(fname, dev, "storage"),
            tx_power=_child_float(fname, dev, "txPower"),
            rx_power=_child_float(fname, dev, "rxPower"),
            battery_powered=_child_bool(fname, dev, "battery"),
            initial_battery_pct=_child_float(fname, dev, "initialBatteryLevel"),
            generates_tasks=_child_bool(fname, dev, "generatesTasks"),
            can_orchestrate=_child_bool(fname, dev, "canOrchestrate"),
            connectivity=_child_text(fname, dev, "connectivity"),
        )
        try:
            spec.validate()
        except ValueError as exc:
            raise ConfigError(f"{fname}: {exc}") from exc
        if spec.connectivity not in ("wifi", "cellular", "ethernet"):
            raise ConfigError(
                f"{fname}: device type {name!r}: unknown connectivity "
                f"{spec.connectivity!r}"
            )
        types.append(spec)
    if not types:
        raise ConfigError(f"{fname}: no device types defined")
    total = sum(t.share for t in types)
    if abs(total - 100.0) > 1e-9:
        raise ConfigError(
            f"{fname}: device type percentages sum to {total}, expected 100"
        )
    return tuple(types)


def parse_applications(path: Path) -> tuple[ApplicationProfile, ...]:
    root = _parse_root(path, "applications")
    fname = path.name
    profiles: list[ApplicationProfile] = []
    for app in root.findall("application"):
        name = app.get("name")
        if not name:
            raise ConfigError(f"{fname}: application element without a name attribute")
        profile = ApplicationProfile(
            name=name,
            poisson_rate=_child_float(fname, app, "poissonRate"),
            latency_constraint=_child_float(fname, app, "latency"),
            input_range_kb=(
                _child_float(fname, app, "minInputSize"),
                _child_float(fname, app, "maxInputSize"),
            ),
            container_range_kb=(
                _child_float(fname, app, "minContainerSize"),
                _child_float(fname, app, "maxContainerSize"),
            ),
            output_ratio_range=(
                _child_float(fname, app, "minOutputRatio"),
                _child_float(fname, app, "maxOutputRatio"),
            ),
            expected_length_mi=_child_float(fname, app, "taskLength"),
            device_share=_child_float(fname, app, "usagePercentage"),
        )
        try:
            profile.validate()
        except ValueError as exc:
            raise ConfigError(f"{fname}: {exc}") from exc
        profiles.append(profile)
    if not profiles:
        raise ConfigError(f"{fname}: no application profiles defined")
    total = sum(p.device_share for p in profiles)
    if abs(total - 100.0) > 1e-9:
        raise ConfigError(
            f"{fname}: application usage percentages sum to {total}, expected 100"
        )
    return tuple(profiles)


def parse_cloud(path: Path) -> tuple[CloudRecord, ...]:
    root = _parse_root(path, "cloud_datacenters")
    fname = path.name
    records = []
    for dc in root.findall("datacenter"):
        name = dc.get("name")
        if not name:
            raise ConfigError(f"{fname}: datacenter element without a name attribute")
        records.append(CloudRecord(
            name=name,
            idle_power=_child_float(fname, dc, "idleConsumption"),
            max_power=_child_float(fname, dc, "maxConsumption"),
            cores=_child_int(fname, dc, "cores"),
            mips_per_core=_child_float(fname, dc, "mipsPerCore"),
            ram_mb=_child_float(fname, dc, "ram"),
            storage_mb=_child_float(fname, dc, "storage"),
        ))
    return tuple(records)


_PARAM_KEYS = (
    "simulation_time",
    "update_interval",
    "enable_orchestrators",
    "network_update_interval",
    "man_bandwidth",
    "man_latency",
    "wifi_bandwidth",
    "wifi_latency",
    "orchestration_architectures",
    "orchestration_algorithms",
    "number_of_edge_devices",
    "simulation_area_side",
)


def parse_properties(path: Path) -> SimulationParams:
    fname = path.name
    values: dict[str, str] = {}
    for lineno, raw in enumerate(path.read_text().splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"{fname}:{lineno}: expected key=value, got {line!r}")
        key, value = line.split("=", 1)
        values[key.strip()] = value.strip()
    missing = [k for k in _PARAM_KEYS if k not in values]
    if missing:
        raise ConfigError(f"{fname}: missing keys: {', '.join(missing)}")

    def fnum(key: str) -> float:
        try:
            return float(values[key])
        except ValueError as exc:
            raise ConfigError(f"{fname}: {key} value {values[key]!r} is not a number") from exc

    algorithm = values["orchestration_algorithms"]
    if "," in algorithm or algorithm not in TOPOLOGIES:
        raise ConfigError(
            f"{fname}: orchestration_algorithms must be exactly one of "
            f"{', '.join(TOPOLOGIES)}; got {algorithm!r}"
        )
    architectures = values["orchestration_architectures"]
    if architectures != "EDGE_ONLY":
        raise ConfigError(
            f"{fname}: orchestration_architectures must be EDGE_ONLY, got {architectures!r}"
        )
    enable = values["enable_orchestrators"].lower()
    if enable not in ("true", "false"):
        raise ConfigError(f"{fname}: enable_orchestrators must be true or false")
    if enable == "true":
        raise ConfigError(
            f"{fname}: enable_orchestrators=true is not supported; devices orchestrate"
        )
    params = SimulationParams(
        simulation_time=fnum("simulation_time"),
        update_interval=fnum("update_interval"),
        enable_orchestrators=False,
        network_update_interval=fnum("network_update_interval"),
        man_bandwidth=fnum("man_bandwidth"),
        man_latency=fnum("man_latency"),
        wifi_bandwidth=fnum("wifi_bandwidth"),
        wifi_latency=fnum("wifi_latency"),
        orchestration_architectures=architectures,
        orchestration_algorithms=algorithm,
        number_of_edge_devices=int(fnum("number_of_edge_devices")),
        simulation_area_side=fnum("simulation_area_side"),
    )
    if params.simulation_time < 0:
        raise ConfigError(f"{fname}: simulation_time must be >= 0")
    for key in ("update_interval", "network_update_interval",
                "man_bandwidth", "wifi_bandwidth"):
        if getattr(params, key) <= 0:
            raise ConfigError(f"{fname}: {key} must be > 0")
    if params.man_latency < 0 or params.wifi_latency < 0:
        raise ConfigError(f"{fname}: link latencies must be >= 0")
    if params.number_of_edge_devices < 1:
        raise ConfigError(f"{fname}: number_of_edge_devices must be >= 1")
    if params.simulation_area_side <= 0:
        raise ConfigError(f"{fname}: simulation_area_side must be > 0")
    return params


def parse_inputs(folder: str | Path) -> ScenarioConfig:
    """Parse and validate the five input files of a scenario folder."""
    folder = Path(folder)
    missing = [name for name in INPUT_FILES if not (folder / name).exists()]
    if missing:
        raise ConfigError(f"{folder}: missing input files: {', '.join(missing)}")
    layout = parse_datacenters(folder / "edge_datacenters.xml")
    cloud = parse_cloud(folder / "cloud.xml")
    device_types = parse_devices(folder / "edge_devices.xml")
    profiles = parse_applications(folder / "applications.xml")
    params = parse_properties(folder / "simulation_parameters.properties")
    return ScenarioConfig(
        layout=layout, cloud=cloud, device_types=device_types,
        profiles=profiles, params=params, input_folder=folder,
    )


# -- canonical emitters -------------------------------------------------------


def emit_datacenters(layout: DatacenterLayout) -> str:
    lines = ['<?xml version="1.0" encoding="UTF-8"?>', "<edge_datacenters>"]
    for server in layout.servers:
        lines += [
            f'  <datacenter name="{server.name}">',
            f"    <periphery>{_fmt(server.periphery)}</periphery>",
            "    <location>",
            f"      <x>{_fmt(server.location.x)}</x>",
            f"      <y>{_fmt(server.location.y)}</y>",
            "    </location>",
            f"    <cluster>{server.cluster}</cluster>",
            f"    <isClusterHead>{_fmt(server.is_head)}</isClusterHead>",
            f"    <idleConsumption>{_fmt(server.spec.idle_power)}</idleConsumption>",
            f"    <maxConsumption>{_fmt(server.spec.max_power)}</maxConsumption>",
            f"    <cores>{server.spec.cores}</cores>",
            f"    <mipsPerCore>{_fmt(server.spec.mips_per_core)}</mipsPerCore>",
            f"    <ram>{_fmt(server.spec.ram_mb)}</ram>",
            f"    <storage>{_fmt(server.spec.storage_mb)}</storage>",
            "  </datacenter>",
        ]
    for ap in layout.aps:
        lines += [
            f'  <datacenter name="{ap.name}">',
            f"    <periphery>{_fmt(ap.periphery)}</periphery>",
            "    <location>",
            f"      <x>{_fmt(ap.location.x)}</x>",
            f"      <y>{_fmt(ap.location.y)}</y>",
            "    </location>",
            "  </datacenter>",
        ]
    lines.append("  <network_links>")
    for link in layout.links:
        lines += [
            "    <link>",
            f"      <from>{link.from_name}</from>",
            f"      <to>{link.to_name}</to>",
            f"      <latency>{_fmt(link.latency)}</latency>",
            f"      <bandwidth>{_fmt(link.bandwidth)}</bandwidth>",
            "    </link>",
        ]
    lines += ["  </network_links>", "</edge_datacenters>", ""]
    return "\n".join(lines)


def emit_devices(types: tuple[DeviceTypeSpec, ...]) -> str:
    lines = ['<?xml version="1.0" encoding="UTF-8"?>', "<edge_devices>"]
    for t in types:
        lines += [
            f'  <device type="{t.name}">',
            f"    <percentage>{_fmt(t.share)}</percentage>",
            f"    <speed>{_fmt(t.speed)}</speed>",
            f"    <minPauseDuration>{_fmt(t.pause_range[0])}</minPauseDuration>",
            f"    <maxPauseDuration>{_fmt(t.pause_range[1])}</maxPauseDuration>",
            f"    <minMobilityDuration>{_fmt(t.mobility_range[0])}</minMobilityDuration>",
            f"    <maxMobilityDuration>{_fmt(t.mobility_range[1])}</maxMobilityDuration>",
            f"    <battery>{_fmt(t.battery_powered)}</battery>",
            f"    <batteryCapacity>{_fmt(t.battery_capacity_wh)}</batteryCapacity>",
            f"    <initialBatteryLevel>{_fmt(t.initial_battery_pct)}</initialBatteryLevel>",
            f"    <idleConsumption>{_fmt(t.idle_power)}</idleConsumption>",
            f"    <maxConsumption>{_fmt(t.max_power)}</maxConsumption>",
            f"    <cores>{t.cores}</cores>",
            f"    <mipsPerCore>{_fmt(t.mips_per_core)}</mipsPerCore>",
            f"    <ram>{_fmt(t.ram_mb)}</ram>",
            f"    <storage>{_fmt(t.storage_mb)}</storage>",
            f"    <txPower>{_fmt(t.tx_power)}</txPower>",
            f"    <rxPower>{_fmt(t.rx_power)}</rxPower>",
            f"    <connectivity>{t.connectivity}</connectivity>",
            f"    <generatesTasks>{_fmt(t.generates_tasks)}</generatesTasks>",
            f"    <canOrchestrate>{_fmt(t.can_orchestrate)}</canOrchestrate>",
            "  </device>",
        ]
    lines += ["</edge_devices>", ""]
    return "\n".join(lines)


def emit_applications(profiles: tuple[ApplicationProfile, ...]) -> str:
    lines = ['<?xml version="1.0" encoding="UTF-8"?>', "<applications>"]
    for p in profiles:
        lines += [
            f'  <application name="{p.name}">',
            f"    <usagePercentage>{_fmt(p.device_share)}</usagePercentage>",
            f"    <poissonRate>{_fmt(p.poisson_rate)}</poissonRate>",
            f"    <latency>{_fmt(p.latency_constraint)}</latency>",
            f"    <minInputSize>{_fmt(p.input_range_kb[0])}</minInputSize>",
            f"    <maxInputSize>{_fmt(p.input_range_kb[1])}</maxInputSize>",
            f"    <minContainerSize>{_fmt(p.container_range_kb[0])}</minContainerSize>",
            f"    <maxContainerSize>{_fmt(p.container_range_kb[1])}</maxContainerSize>",
            f"    <minOutputRatio>{_fmt(p.output_ratio_range[0])}</minOutputRatio>",
            f"    <maxOutputRatio>{_fmt(p.output_ratio_range[1])}</maxOutputRatio>",
            f"    <taskLength>{_fmt(p.expected_length_mi)}</taskLength>",
            "  </application>",
        ]
    lines += ["</applications>", ""]
    return "\n".join(lines)


def emit_cloud(records: tuple[CloudRecord, ...]) -> str:
    lines = ['<?xml version="1.0" encoding="UTF-8"?>', "<cloud_datacenters>"]
    for r in records:
        lines += [
            f'  <datacenter name="{r.name}">',
            f"    <idleConsumption>{_fmt(r.idle_power)}</idleConsumption>",
            f"    <maxConsumption>{_fmt(r.max_power)}</maxConsumption>",
            f"    <cores>{r.cores}</cores>",
            f"    <mipsPerCore>{_fmt(r.mips_per_core)}</mipsPerCore>",
            f"    <ram>{_fmt(r.ram_mb)}</ram>",
            f"    <storage>{_fmt(r.storage_mb)}</storage>",
            "  </datacenter>",
        ]
    lines += ["</cloud_datacenters>", ""]
    return "\n".join(lines)


def emit_properties(params: SimulationParams) -> str:
    pairs = (
        ("simulation_time", _fmt(params.simulation_time)),
        ("update_interval", _fmt(params.update_interval)),
        ("enable_orchestrators", _fmt(params.enable_orchestrators)),
        ("network_update_interval", _fmt(params.network_update_interval)),
        ("man_bandwidth", _fmt(params.man_bandwidth)),
        ("man_latency", _fmt(params.man_latency)),
        ("wifi_bandwidth", _fmt(params.wifi_bandwidth)),
        ("wifi_latency", _fmt(params.wifi_latency)),
        ("orchestration_architectures", params.orchestration_architectures),
        ("orchestration_algorithms", params.orchestration_algorithms),
        ("number_of_edge_devices", str(params.number_of_edge_devices)),
        ("simulation_area_side", _fmt(params.simulation_area_side)),
    )
    return "".join(f"{k}={v}\n" for k, v in pairs)


def write_scenario(folder: str | Path, config: ScenarioConfig) -> None:
    folder = Path(folder)
    folder.mkdir(parents=True, exist_ok=True)
    (folder / "edge_datacenters.xml").write_text(emit_datacenters(config.layout))
    (folder / "cloud.xml").write_text(emit_cloud(config.cloud))
    (folder / "edge_devices.xml").write_text(emit_devices(config.device_types))
    (folder / "applications.xml").write_text(emit_applications(config.profiles))
    (folder / "simulation_parameters.properties").write_text(
        emit_properties(config.params)
    )

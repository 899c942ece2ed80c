"""One simulation episode: node creation, event handlers and logging.

An episode is strictly single-threaded and a pure function of
(scenario config, run settings, master seed). Devices orchestrate their own
tasks; pricing agents (one per cluster head) act once per slot; the network
carries uploads and result downloads through the shared fluid fabric.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import orchestration
from .agents import EVALUATE, TRAIN, AgentHyperparams, PricingAgent, slot_profit
from .config import DECENTRALIZED, HYBRID, ConfigError, ScenarioConfig
from .domain import (
    Location,
    Task,
    TaskStatus,
    generate_weights,
    poisson_arrivals,
    sample_task,
)
from .engine import EventKind, EventLoop
from .envgen import betweenness_centrality
from .network import (
    DOWNLOAD_RESULT,
    UPLOAD_INPUT,
    ManGraph,
    NetworkFabric,
    Transfer,
)
from .nodes import (
    EdgeDevice,
    EdgeServer,
    cluster_queue_time_estimate,
    energy_tick_joules,
    local_exec_energy,
    tx_rx_energy,
    update_mobility,
)
from .orchestration import LOCAL, DestinationQuote
from .seeding import SeedManager

PRICING_MODEL = "model"
PRICING_RANDOM = "random"


@dataclass
class RunSettings:
    """Per-run knobs that do not live in the input files."""

    mode: str = EVALUATE                      # TRAIN or EVALUATE
    master_seed: int = 1
    hyperparams: AgentHyperparams = field(default_factory=AgentHyperparams)
    model_dir: Path | None = None             # per-scenario folder of agent states
    pricing: str = PRICING_MODEL              # "random" = uniform baseline, no models
    collect_debug: bool = False               # keep per-tick utilization rows


@dataclass
class SlotLogRow:
    slot: int
    queue_state: float
    arrival_rate: float
    price: float
    profit: float
    cumulative_profit: float


@dataclass
class TaskRecord:
    """Everything the per-task CSV carries; one row per generated task."""

    task: Task
    profile: str
    destination_label: str = "local"
    server_name: str = ""
    agent_id: str = ""
    decision_price: float = 0.0
    decision_cost: float = 0.0
    fallback: bool = False

    @property
    def offloaded(self) -> bool:
        return self.destination_label != "local"


@dataclass
class EpisodeResult:
    tasks: list[TaskRecord]
    agent_logs: dict[str, list[SlotLogRow]]
    agent_returns: dict[str, float]
    total_energy_j: float
    mean_server_utilization_pct: float
    trace_hash: str
    price_updates_per_agent: dict[str, int]
    mobility_rounds: int
    network_rounds: int
    horizon: float
    debug_utilization: list[tuple[float, str, int]] = field(default_factory=list)


@dataclass
class _TxEnd:
    """Payload of a predicted transmission-end event; stale if outdated."""

    transfer_id: int
    generation: int


@dataclass
class _Arrival:
    task_id: int
    node_id: int          # server index for uploads, device id for downloads


@dataclass
class _AgentSlotState:
    offloaded_mi: float = 0.0
    arrivals: int = 0
    price: float = 0.0
    prev_state: np.ndarray | None = None
    cumulative: float = 0.0
    closed_slots: int = 0
    updates: int = 0


class Simulation:
    """Builds and runs one episode over a parsed scenario."""

    def __init__(self, config: ScenarioConfig, settings: RunSettings):
        if settings.mode not in (TRAIN, EVALUATE):
            raise ValueError(f"unknown mode {settings.mode!r}")
        if settings.pricing not in (PRICING_MODEL, PRICING_RANDOM):
            raise ValueError(f"unknown pricing policy {settings.pricing!r}")
        self.config = config
        self.settings = settings
        self.hp = settings.hyperparams
        self.seeds = SeedManager(settings.master_seed)
        self.horizon = config.params.horizon_seconds
        self.loop = EventLoop(self.horizon)
        self._build_graph()
        self._build_servers()
        self._build_clusters()
        self._build_devices()
        self._build_agents()
        self.fabric = NetworkFabric(
            self.graph, config.params.wifi_bandwidth, config.params.wifi_latency
        )
        # transfer bookkeeping
        self._transfer_task: dict[int, Task] = {}
        self._transfer_target: dict[int, int] = {}
        # logs and counters
        self.task_records: dict[int, TaskRecord] = {}
        self.agent_logs: dict[str, list[SlotLogRow]] = {a: [] for a in self.agents}
        self.price_update_counts: dict[str, int] = {a: 0 for a in self.agents}
        self.mobility_rounds = 0
        self.network_rounds = 0
        self.debug_utilization: list[tuple[float, str, int]] = []
        self._next_task_id = 0
        self._register_handlers()

    # -- construction -------------------------------------------------------

    def _build_graph(self) -> None:
        layout = self.config.layout
        self.graph = ManGraph()
        for server in layout.servers:
            self.graph.add_vertex(server.name, server.location, is_server=True)
        for ap in layout.aps:
            self.graph.add_vertex(ap.name, ap.location, is_server=False)
        for link in layout.links:
            self.graph.add_link(
                self.graph.index_of(link.from_name),
                self.graph.index_of(link.to_name),
                link.latency,
                link.bandwidth,
            )
        self.graph.check_connected()

    def _build_servers(self) -> None:
        self.servers: list[EdgeServer] = []
        for idx, record in enumerate(self.config.layout.servers):
            self.servers.append(EdgeServer(
                node_id=idx,
                name=record.name,
                location=record.location,
                spec=record.spec,
                vertex=self.graph.index_of(record.name),
                cluster=record.cluster,
                is_head=record.is_head,
            ))

    def _server_host_ap(self, server: EdgeServer) -> int:
        """The AP vertex a server hangs off (its lowest-latency neighbor)."""
        neighbors = self.graph.adjacency[server.vertex]
        if not neighbors:
            raise ConfigError(f"server {server.name} has no links")
        return min(neighbors, key=lambda vl: (vl[1].latency, vl[0]))[0]

    def _build_clusters(self) -> None:
        """Resolve pricing domains: heads and members per control topology."""
        topology = self.config.topology
        self.cluster_members: dict[int, list[EdgeServer]] = {}
        self.head_of_server: dict[int, int] = {}
        if topology == DECENTRALIZED:
            for server in self.servers:
                self.cluster_members[server.id] = [server]
                self.head_of_server[server.id] = server.id
        elif topology == HYBRID:
            by_cluster: dict[int, list[EdgeServer]] = {}
            for server in self.servers:
                by_cluster.setdefault(server.cluster, []).append(server)
            for cluster_id, members in sorted(by_cluster.items()):
                heads = [s for s in members if s.is_head]
                if len(heads) != 1:
                    raise ConfigError(
                        f"cluster {cluster_id} has {len(heads)} heads; expected exactly 1"
                    )
                head = heads[0]
                self.cluster_members[head.id] = members
                for member in members:
                    self.head_of_server[member.id] = head.id
        else:  # CENTRALIZED: one domain, head picked like a cluster head
            ap_adjacency: dict[int, list[int]] = {
                i: [] for i in range(len(self.graph.names)) if not self.graph.is_server[i]
            }
            for link in self.graph.links:
                if link.a in ap_adjacency and link.b in ap_adjacency:
                    ap_adjacency[link.a].append(link.b)
                    ap_adjacency[link.b].append(link.a)
            centrality = betweenness_centrality(ap_adjacency) if ap_adjacency else {}
            head = max(
                self.servers,
                key=lambda s: (centrality.get(self._server_host_ap(s), 0.0), -s.id),
            )
            self.cluster_members[head.id] = list(self.servers)
            for server in self.servers:
                self.head_of_server[server.id] = head.id

    def _build_devices(self) -> None:
        params = self.config.params
        n = params.number_of_edge_devices
        type_of = _largest_remainder_assignment(
            [t.share for t in self.config.device_types], n
        )
        profile_of = _largest_remainder_assignment(
            [p.device_share for p in self.config.profiles], n
        )
        self.devices: list[EdgeDevice] = []
        self.device_profiles = []
        side = params.simulation_area_side
        for i in range(n):
            spec = self.config.device_types[type_of[i]]
            placement = self.seeds.derive_stream("placement", i)
            u, v = placement.random(2)
            weights = generate_weights(self.seeds.derive_stream("weights", i))
            device = EdgeDevice(
                node_id=i,
                name=f"dev{i}",
                location=Location(u * side, v * side),
                spec=spec,
                weights=weights,
            )
            device.ap = self.graph.nearest_ap(device.location)
            self.devices.append(device)
            self.device_profiles.append(self.config.profiles[profile_of[i]])
        self._mobility_rngs = [
            self.seeds.derive_stream("mobility", i) for i in range(n)
        ]
        self._taskgen_rngs = [
            self.seeds.derive_stream("taskgen", i) for i in range(n)
        ]
        self._arrival_times: list[list[float]] = []
        self._arrival_cursor = [0] * n
        for i, device in enumerate(self.devices):
            if device.spec.generates_tasks:
                times = poisson_arrivals(
                    self.device_profiles[i].poisson_rate,
                    self.horizon,
                    self._taskgen_rngs[i],
                )
            else:
                times = []
            self._arrival_times.append(times)

    def _build_agents(self) -> None:
        self.agents: dict[str, PricingAgent] = {}
        self.agent_server: dict[str, EdgeServer] = {}
        self.agent_state: dict[str, _AgentSlotState] = {}
        self._baseline_rngs: dict[str, np.random.Generator] = {}
        self._cluster_estimates: dict[str, float] = {}
        head_ids = sorted(self.cluster_members)
        for head_id in head_ids:
            head = self.servers[head_id]
            agent = PricingAgent(
                head.name, self.hp, self.seeds.derive_stream("agent-init", head_id)
            )
            if self.settings.pricing == PRICING_MODEL:
                state_dir = self._agent_dir(head.name)
                if state_dir is not None and (state_dir / "state.npz").exists():
                    agent.load(state_dir)
                elif self.settings.mode == EVALUATE:
                    agent.load(state_dir if state_dir is not None else Path("."))
            agent.begin_episode(
                noise_rng=self.seeds.derive_stream("noise", head_id),
                explore_rng=self.seeds.derive_stream("explore", head_id),
                replay_rng=self.seeds.derive_stream("replay", head_id),
            )
            self.agents[head.name] = agent
            self.agent_server[head.name] = head
            self.agent_state[head.name] = _AgentSlotState()
            self._baseline_rngs[head.name] = self.seeds.derive_stream("baseline", head_id)
            self._cluster_estimates[head.name] = 0.0
        self.agent_of_server: dict[int, str] = {
            s.id: self.servers[self.head_of_server[s.id]].name for s in self.servers
        }

    def _agent_dir(self, agent_id: str) -> Path | None:
        if self.settings.model_dir is None:
            if self.settings.mode == EVALUATE and self.settings.pricing == PRICING_MODEL:
                raise ConfigError("evaluation mode needs a model folder")
            return None
        return Path(self.settings.model_dir) / agent_id

    def _register_handlers(self) -> None:
        self.loop.on(EventKind.TASK_GENERATION, self._on_task_generation)
        self.loop.on(EventKind.PRICE_UPDATE, self._on_price_update)
        self.loop.on(EventKind.MOBILITY_ENERGY_UPDATE, self._on_mobility_energy)
        self.loop.on(EventKind.NETWORK_UPDATE, self._on_network_update)
        self.loop.on(EventKind.TASK_ARRIVED_AT_NODE, self._on_task_arrived)
        self.loop.on(EventKind.EXECUTION_FINISHED, self._on_execution_finished)
        self.loop.on(EventKind.RESULT_DELIVERED, self._on_result_delivered)
        self.loop.on(EventKind.SIMULATION_END, self._on_simulation_end)

    # -- run ---------------------------------------------------------------

    def run(self) -> EpisodeResult:
        params = self.config.params
        self.loop.schedule(self.horizon, EventKind.SIMULATION_END)
        if self.horizon > 0:
            for agent_id in self.agents:
                self.loop.schedule(0.0, EventKind.PRICE_UPDATE, agent_id)
            if params.update_interval <= self.horizon + 1e-9:
                self.loop.schedule(
                    params.update_interval, EventKind.MOBILITY_ENERGY_UPDATE, 1
                )
            if params.network_update_interval <= self.horizon + 1e-9:
                self.loop.schedule(
                    params.network_update_interval, EventKind.NETWORK_UPDATE, 1
                )
            for device in self.devices:
                self._schedule_next_arrival(device.id)
        self.loop.run()
        return self._result()

    def _result(self) -> EpisodeResult:
        util = 0.0
        if self.servers and self.horizon > 0:
            util = float(np.mean([
                s.cpu.busy_core_seconds / (s.cpu.cores * self.horizon)
                for s in self.servers
            ])) * 100.0
        total_energy = sum(s.energy.consumed_total_j for s in self.servers)
        total_energy += sum(d.energy.consumed_total_j for d in self.devices)
        return EpisodeResult(
            tasks=[self.task_records[k] for k in sorted(self.task_records)],
            agent_logs=self.agent_logs,
            agent_returns={
                a: self.agent_state[a].cumulative for a in self.agents
            },
            total_energy_j=total_energy,
            mean_server_utilization_pct=util,
            trace_hash=self.loop.trace_hash(),
            price_updates_per_agent=dict(self.price_update_counts),
            mobility_rounds=self.mobility_rounds,
            network_rounds=self.network_rounds,
            horizon=self.horizon,
            debug_utilization=self.debug_utilization,
        )

    # -- task generation and offload decision -------------------------------

    def _schedule_next_arrival(self, device_id: int) -> None:
        cursor = self._arrival_cursor[device_id]
        times = self._arrival_times[device_id]
        if cursor < len(times):
            self._arrival_cursor[device_id] += 1
            self.loop.schedule(times[cursor], EventKind.TASK_GENERATION, device_id)

    def _on_task_generation(self, event) -> None:
        device = self.devices[event.payload]
        if device.dead:
            return
        now = self.loop.clock.now
        profile = self.device_profiles[device.id]
        task = sample_task(
            profile, device.id, now, self._next_task_id, self._taskgen_rngs[device.id]
        )
        self._next_task_id += 1
        record = TaskRecord(task=task, profile=profile.name)
        self.task_records[task.id] = record
        self._decide_and_dispatch(device, task, record, now)
        self._schedule_next_arrival(device.id)

    def _access_rate(self, device: EdgeDevice) -> float:
        return self.fabric.estimate_access_rate(device.ap)

    def _propagation(self, device: EdgeDevice, server: EdgeServer) -> float:
        _, latency = self._routes_to_server(server)[device.ap]
        return self.config.params.wifi_latency + latency

    def _routes_to_server(self, server: EdgeServer):
        cache = getattr(self, "_route_cache", None)
        if cache is None:
            cache = self._route_cache = {}
        routes = cache.get(server.id)
        if routes is None:
            routes = cache[server.id] = self.graph.routes_from(server.vertex)
        return routes

    def _local_quote(self, device: EdgeDevice, task: Task, now: float) -> DestinationQuote:
        delay = (
            task.length_mi / device.spec.mips_per_core
            + device.local_queue_time(now)
        )
        energy = local_exec_energy(
            device.spec.max_power, task.length_mi, device.spec.total_mips
        )
        return DestinationQuote(LOCAL, delay, energy, 0.0)

    def _offload_quote(
        self, device: EdgeDevice, task: Task, server: EdgeServer,
        queue_estimate: float, price: float, destination: int, rate: float,
    ) -> DestinationQuote:
        delay = (
            task.input_bits / rate
            + task.output_bits / rate
            + self._propagation(device, server)
            + task.length_mi / server.spec.mips_per_core
            + queue_estimate
        )
        energy = tx_rx_energy(
            device.spec.tx_power, device.spec.rx_power,
            task.input_bits, task.output_bits, rate, rate,
        )
        return DestinationQuote(destination, delay, energy, price)

    def _decide_and_dispatch(
        self, device: EdgeDevice, task: Task, record: TaskRecord, now: float
    ) -> None:
        topology = self.config.topology
        rate = self._access_rate(device)
        local = self._local_quote(device, task, now)
        battery = device.energy.battery_remaining_j
        if topology == DECENTRALIZED:
            quotes = [
                self._offload_quote(
                    device, task, s, s.published_queue_estimate,
                    self.agent_state[self.agent_of_server[s.id]].price, s.id, rate,
                )
                for s in self.servers
            ]
            decision = orchestration.decide_decentralized(
                local, quotes, device.weights, task.max_delay, battery
            )
            target = None if decision.destination == LOCAL \
                else self.servers[decision.destination]
        elif topology == HYBRID:
            heads = sorted(self.cluster_members)
            quotes = [
                self._offload_quote(
                    device, task, self.servers[head],
                    self._cluster_estimates[self.servers[head].name],
                    self.agent_state[self.servers[head].name].price,
                    cluster_index, rate,
                )
                for cluster_index, head in enumerate(heads)
            ]
            decision = orchestration.decide_hybrid(
                local, quotes, device.weights, task.max_delay, battery
            )
            target = None if decision.destination == LOCAL \
                else self.servers[heads[decision.destination]]
        else:  # CENTRALIZED
            head_name = next(iter(self.agents))
            price = self.agent_state[head_name].price
            quotes = [
                self._offload_quote(
                    device, task, s, s.published_queue_estimate, price, s.id, rate
                )
                for s in self.servers
            ]
            decision = orchestration.decide_centralized(
                local, quotes, device.weights, task.max_delay, battery
            )
            target = None if decision.destination == LOCAL \
                else self.servers[decision.destination]

        record.decision_cost = decision.cost if math.isfinite(decision.cost) else 0.0
        record.fallback = not decision.feasible
        if target is None:
            task.destination = device.id
            self._start_local(device, task, now)
            return
        if topology == HYBRID:
            record.destination_label = f"cluster{decision.destination}"
        else:
            record.destination_label = target.name
        record.decision_price = self.agent_state[self.agent_of_server[target.id]].price
        task.destination = target.id
        task.offload_send_time = now
        task.status = TaskStatus.QUEUED
        self._start_upload(device, task, target, now)

    def _start_local(self, device: EdgeDevice, task: Task, now: float) -> None:
        task.status = TaskStatus.QUEUED
        finish = device.cpu.submit(task, now)
        if finish is not None:
            task.status = TaskStatus.EXECUTING
            task.exec_start_time = now
            self.loop.schedule(
                finish, EventKind.EXECUTION_FINISHED, ("device", device.id, task.id)
            )

    def _start_upload(
        self, device: EdgeDevice, task: Task, target: EdgeServer, now: float
    ) -> None:
        path_vertices, latency = self._routes_to_server(target)[device.ap]
        man_links = self.graph.path_links(list(reversed(path_vertices)))
        links = [self.fabric.wifi_link(device.ap)] + man_links
        propagation = self.config.params.wifi_latency + latency
        transfer, changed = self.fabric.start_transfer(
            task.id, UPLOAD_INPUT, links, task.input_bits, now, propagation
        )
        self._transfer_task[transfer.id] = task
        self._transfer_target[transfer.id] = target.id
        self._schedule_transfer_events(changed)

    def _start_download(self, server: EdgeServer, task: Task, now: float) -> None:
        device = self.devices[task.origin_device]
        path_vertices, latency = self._routes_to_server(server)[device.ap]
        man_links = self.graph.path_links(path_vertices)
        links = man_links + [self.fabric.wifi_link(device.ap)]
        propagation = latency + self.config.params.wifi_latency
        transfer, changed = self.fabric.start_transfer(
            task.id, DOWNLOAD_RESULT, links, task.output_bits, now, propagation
        )
        self._transfer_task[transfer.id] = task
        self._transfer_target[transfer.id] = task.origin_device
        self._schedule_transfer_events(changed)

    def _schedule_transfer_events(self, changed: list[tuple[Transfer, float]]) -> None:
        for transfer, complete_at in changed:
            kind = (
                EventKind.TASK_ARRIVED_AT_NODE
                if transfer.direction == UPLOAD_INPUT
                else EventKind.RESULT_DELIVERED
            )
            fire = max(complete_at, self.loop.clock.now)
            self.loop.schedule(fire, kind, _TxEnd(transfer.id, transfer.generation))

    # -- transfers ----------------------------------------------------------

    def _finish_transfer_if_current(self, payload: _TxEnd) -> Transfer | None:
        transfer = self.fabric.transfers.get(payload.transfer_id)
        if transfer is None or transfer.generation != payload.generation:
            return None
        now = self.loop.clock.now
        changed = self.fabric.finish_transfer(transfer, now)
        self._schedule_transfer_events(changed)
        return transfer

    def _on_task_arrived(self, event) -> None:
        now = self.loop.clock.now
        if isinstance(event.payload, _TxEnd):
            transfer = self._finish_transfer_if_current(event.payload)
            if transfer is None:
                return
            task = self._transfer_task.pop(transfer.id)
            target = self._transfer_target.pop(transfer.id)
            device = self.devices[task.origin_device]
            if not device.dead:
                device.energy.charge(
                    device.spec.tx_power * (now - transfer.started)
                )
            self.loop.schedule(
                now + transfer.propagation,
                EventKind.TASK_ARRIVED_AT_NODE,
                _Arrival(task.id, target),
            )
            return
        payload: _Arrival = event.payload
        record = self.task_records[payload.task_id]
        task = record.task
        server = self.servers[payload.node_id]
        task.server_arrival_time = now
        if self.config.topology == HYBRID and server.is_head:
            members = self.cluster_members[server.id]
            loads = {m.id: m.cpu.task_count() for m in members}
            server = self.servers[orchestration.pick_least_loaded(loads)]
        if not server.admit(task):
            task.status = TaskStatus.FAILED_RESOURCES
            record.server_name = server.name
            return
        task.destination = server.id   # the executing server, after allocation
        record.server_name = server.name
        record.agent_id = self.agent_of_server[server.id]
        state = self.agent_state[record.agent_id]
        state.offloaded_mi += task.length_mi
        state.arrivals += 1
        finish = server.cpu.submit(task, now)
        if finish is not None:
            task.status = TaskStatus.EXECUTING
            task.exec_start_time = now
            self.loop.schedule(
                finish, EventKind.EXECUTION_FINISHED, ("server", server.id, task.id)
            )

    def _on_execution_finished(self, event) -> None:
        node_kind, node_id, task_id = event.payload
        now = self.loop.clock.now
        task = self.task_records[task_id].task
        if task.status in TaskStatus.TERMINAL:
            return   # failed earlier (for instance, device died mid-queue)
        node = self.devices[node_id] if node_kind == "device" else self.servers[node_id]
        done, started, next_finish = node.cpu.finish(task_id, now)
        done.exec_end_time = now
        if started is not None:
            started.status = TaskStatus.EXECUTING
            started.exec_start_time = now
            self.loop.schedule(
                next_finish, EventKind.EXECUTION_FINISHED,
                (node_kind, node_id, started.id),
            )
        if node_kind == "device":
            device: EdgeDevice = node
            if not device.dead:
                device.energy.charge(local_exec_energy(
                    device.spec.max_power, done.length_mi, device.spec.total_mips
                ))
            delay = now - done.creation_time
            done.status = (
                TaskStatus.DONE_SUCCESS if delay <= done.max_delay
                else TaskStatus.FAILED_LATENCY
            )
        else:
            server: EdgeServer = node
            server.release(done)
            self._start_download(server, done, now)

    def _on_result_delivered(self, event) -> None:
        now = self.loop.clock.now
        if isinstance(event.payload, _TxEnd):
            transfer = self._finish_transfer_if_current(event.payload)
            if transfer is None:
                return
            task = self._transfer_task.pop(transfer.id)
            device_id = self._transfer_target.pop(transfer.id)
            device = self.devices[device_id]
            if not device.dead:
                device.energy.charge(
                    device.spec.rx_power * (now - transfer.started)
                )
            self.loop.schedule(
                now + transfer.propagation,
                EventKind.RESULT_DELIVERED,
                _Arrival(task.id, device_id),
            )
            return
        payload: _Arrival = event.payload
        task = self.task_records[payload.task_id].task
        task.delivered_time = now
        delay = now - task.creation_time
        task.status = (
            TaskStatus.DONE_SUCCESS if delay <= task.max_delay
            else TaskStatus.FAILED_LATENCY
        )

    # -- slots ---------------------------------------------------------------

    def _slot_state(self, agent_id: str, now: float) -> np.ndarray:
        head = self.agent_server[agent_id]
        members = self.cluster_members[head.id]
        state = self.agent_state[agent_id]
        if self.config.topology == DECENTRALIZED:
            queue_metric = float(head.cpu.task_count())
        else:
            queue_metric = float(np.mean([m.cpu.task_count() for m in members]))
        arrival_rate = state.arrivals / self.hp.slot_length
        return np.array([queue_metric, arrival_rate])

    def _close_slot(self, agent_id: str, new_state: np.ndarray) -> None:
        """Reward the slot that just ended and log it."""
        state = self.agent_state[agent_id]
        head = self.agent_server[agent_id]
        members = self.cluster_members[head.id]
        reward = slot_profit(
            state.price, state.offloaded_mi, head.spec,
            self.hp.energy_cost_coeff, self.hp.slot_length, len(members),
        )
        state.cumulative += reward
        prev = state.prev_state
        self.agent_logs[agent_id].append(SlotLogRow(
            slot=state.closed_slots,
            queue_state=float(prev[0]),
            arrival_rate=float(prev[1]),
            price=state.price,
            profit=reward,
            cumulative_profit=state.cumulative,
        ))
        if self.settings.mode == TRAIN and self.settings.pricing == PRICING_MODEL:
            self.agents[agent_id].observe(prev, state.price, reward, new_state)
        state.closed_slots += 1

    def _refresh_estimates(self, agent_id: str, now: float) -> None:
        head = self.agent_server[agent_id]
        members = self.cluster_members[head.id]
        for member in members:
            member.published_queue_estimate = member.queue_time_estimate(now)
        self._cluster_estimates[agent_id] = cluster_queue_time_estimate(members, now)

    def _on_price_update(self, event) -> None:
        agent_id = event.payload
        now = self.loop.clock.now
        state = self.agent_state[agent_id]
        agent = self.agents[agent_id]
        new_state = self._slot_state(agent_id, now)
        if state.prev_state is not None:
            self._close_slot(agent_id, new_state)
        if self.settings.mode == TRAIN and self.settings.pricing == PRICING_MODEL:
            for _ in range(self.hp.updates_per_slot):
                if agent.update():
                    state.updates += 1
        if self.settings.pricing == PRICING_RANDOM:
            price = float(self._baseline_rngs[agent_id].random())
        else:
            price = agent.act(new_state, self.settings.mode)
        state.price = price
        state.prev_state = new_state
        state.offloaded_mi = 0.0
        state.arrivals = 0
        self._refresh_estimates(agent_id, now)
        self.price_update_counts[agent_id] += 1
        next_slot_time = (state.closed_slots + 1) * self.hp.slot_length
        if next_slot_time < self.horizon - 1e-9:
            self.loop.schedule(next_slot_time, EventKind.PRICE_UPDATE, agent_id)

    # -- mobility, energy, network ticks -------------------------------------

    def _on_mobility_energy(self, event) -> None:
        round_index = event.payload
        now = self.loop.clock.now
        dt = self.config.params.update_interval
        side = self.config.params.simulation_area_side
        for device in self.devices:
            if device.dead:
                continue
            moved = update_mobility(device, dt, side, self._mobility_rngs[device.id])
            if moved:
                new_ap = self.graph.nearest_ap(device.location)
                if new_ap != device.ap:
                    device.ap = new_ap
                    self._reroute_downloads(device, now)
            device.energy.charge(device.spec.idle_power * dt)
            if device.energy.battery_remaining_j < device.spec.idle_power * dt:
                self._kill_device(device)
        for server in self.servers:
            server.energy.charge(energy_tick_joules(server, dt))
            if self.settings.collect_debug:
                self.debug_utilization.append(
                    (now, server.name, server.cpu.busy_cores())
                )
        self.mobility_rounds += 1
        next_time = (round_index + 1) * dt
        if next_time <= self.horizon + 1e-9:
            self.loop.schedule(
                next_time, EventKind.MOBILITY_ENERGY_UPDATE, round_index + 1
            )

    def _reroute_downloads(self, device: EdgeDevice, now: float) -> None:
        for transfer in list(self.fabric.transfers.values()):
            if transfer.direction != DOWNLOAD_RESULT:
                continue
            task = self._transfer_task.get(transfer.id)
            if task is None or task.origin_device != device.id:
                continue
            server = self.servers[task.destination]
            path_vertices, latency = self._routes_to_server(server)[device.ap]
            man_links = self.graph.path_links(path_vertices)
            links = man_links + [self.fabric.wifi_link(device.ap)]
            propagation = latency + self.config.params.wifi_latency
            changed = self.fabric.reroute(transfer, links, propagation, now)
            self._schedule_transfer_events(changed)

    def _kill_device(self, device: EdgeDevice) -> None:
        device.dead = True
        pending = list(device.cpu.queue) + [
            slot.task for slot in device.cpu.busy.values()
        ]
        for task in pending:
            task.status = TaskStatus.FAILED_DEVICE_DEAD
        device.cpu.queue.clear()
        device.cpu.busy.clear()

    def _on_network_update(self, event) -> None:
        round_index = event.payload
        now = self.loop.clock.now
        changed = self.fabric.tick(now)
        self._schedule_transfer_events(changed)
        self.network_rounds += 1
        dt = self.config.params.network_update_interval
        next_time = (round_index + 1) * dt
        if next_time <= self.horizon + 1e-9:
            self.loop.schedule(next_time, EventKind.NETWORK_UPDATE, round_index + 1)

    # -- episode end ----------------------------------------------------------

    def _on_simulation_end(self, event) -> None:
        now = self.loop.clock.now
        completed_slots = int(self.horizon / self.hp.slot_length + 1e-9)
        for agent_id, state in self.agent_state.items():
            if state.prev_state is not None and state.closed_slots < completed_slots:
                self._close_slot(agent_id, self._slot_state(agent_id, now))
        for record in self.task_records.values():
            if record.task.status not in TaskStatus.TERMINAL:
                record.task.status = TaskStatus.UNFINISHED
        for server in self.servers:
            for slot in server.cpu.busy.values():
                start = slot.finish_time - server.cpu.exec_seconds(slot.task)
                server.cpu.busy_core_seconds += max(0.0, now - start)
        for device in self.devices:
            for slot in device.cpu.busy.values():
                start = slot.finish_time - device.cpu.exec_seconds(slot.task)
                device.cpu.busy_core_seconds += max(0.0, now - start)
        if self.settings.mode == TRAIN and self.settings.pricing == PRICING_MODEL:
            for agent_id, agent in self.agents.items():
                agent.end_episode()
                target = self._agent_dir(agent_id)
                if target is not None:
                    agent.save(target)
        self.loop.stop()


def _largest_remainder_assignment(shares: list[float], n: int) -> list[int]:
    """Map n items onto categories matching percentage shares exactly."""
    exact = [s / 100.0 * n for s in shares]
    counts = [int(math.floor(e)) for e in exact]
    leftover = n - sum(counts)
    remainders = sorted(
        range(len(shares)), key=lambda i: (-(exact[i] - counts[i]), i)
    )
    for i in range(leftover):
        counts[remainders[i % len(shares)]] += 1
    out: list[int] = []
    for idx, count in enumerate(counts):
        out.extend([idx] * count)
    return out


def run_episode(
    config: ScenarioConfig, settings: RunSettings
) -> EpisodeResult:
    """Build and run one episode; see Simulation for the mechanics."""
    return Simulation(config, settings).run()

"""Metro network graph, latency-shortest routing and fair-share transfers.

Transfers follow a fluid model: a transfer's rate is the minimum over its
path links of (link bandwidth / active transfers on that link). Rates only
change when a transfer starts, completes or is rerouted, so completions are
predicted exactly and scheduled as events; a generation counter invalidates
predictions that a later rate change made stale. Propagation latency is paid
once per transfer, after its last bit leaves the sending side.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field

import numpy as np

from .domain import Location


class RoutingError(RuntimeError):
    pass


@dataclass(eq=False)
class Link:
    """Undirected capacity shared by both directions and all active transfers."""

    a: int
    b: int
    bandwidth_mbps: float
    latency: float
    active: dict[int, "Transfer"] = field(default_factory=dict)

    @property
    def bandwidth_bps(self) -> float:
        return self.bandwidth_mbps * 1e6

    def fair_rate(self) -> float:
        return self.bandwidth_bps / max(1, len(self.active))


UPLOAD_INPUT = "upload-input"
DOWNLOAD_RESULT = "download-result"


@dataclass(eq=False)
class Transfer:
    """One in-flight payload with exact lazily-advanced remaining bits."""

    id: int
    task_id: int
    direction: str
    links: list[Link]
    remaining_bits: float
    started: float
    propagation: float
    rate: float = 0.0
    checkpoint: float = 0.0
    generation: int = 0

    def advance_to(self, now: float) -> None:
        if now > self.checkpoint and self.rate > 0.0:
            self.remaining_bits -= self.rate * (now - self.checkpoint)
            if self.remaining_bits < 0.0:
                self.remaining_bits = 0.0
        self.checkpoint = now


class ManGraph:
    """APs and edge servers with latency/bandwidth-weighted links."""

    def __init__(self):
        self.names: list[str] = []
        self.locations: list[Location] = []
        self.is_server: list[bool] = []
        self.adjacency: list[list[tuple[int, Link]]] = []
        self.links: list[Link] = []
        self._index: dict[str, int] = {}
        self._ap_coords: np.ndarray | None = None

    def add_vertex(self, name: str, location: Location, is_server: bool) -> int:
        if name in self._index:
            raise ValueError(f"duplicate vertex name {name!r}")
        idx = len(self.names)
        self.names.append(name)
        self.locations.append(location)
        self.is_server.append(is_server)
        self.adjacency.append([])
        self._index[name] = idx
        self._ap_coords = None
        return idx

    def index_of(self, name: str) -> int:
        return self._index[name]

    def add_link(self, a: int, b: int, latency: float, bandwidth_mbps: float) -> Link:
        if a == b:
            raise ValueError("self-links are not allowed")
        if bandwidth_mbps <= 0 or latency < 0:
            raise ValueError("link needs bandwidth > 0 and latency >= 0")
        link = Link(a, b, bandwidth_mbps, latency)
        self.links.append(link)
        self.adjacency[a].append((b, link))
        self.adjacency[b].append((a, link))
        return link

    @property
    def server_indices(self) -> list[int]:
        return [i for i, s in enumerate(self.is_server) if s]

    @property
    def ap_indices(self) -> list[int]:
        return [i for i, s in enumerate(self.is_server) if not s]

    def check_connected(self) -> None:
        if not self.names:
            return
        seen = {0}
        frontier = [0]
        while frontier:
            v = frontier.pop()
            for w, _ in self.adjacency[v]:
                if w not in seen:
                    seen.add(w)
                    frontier.append(w)
        if len(seen) != len(self.names):
            missing = [self.names[i] for i in range(len(self.names)) if i not in seen]
            raise RoutingError(f"graph is disconnected; unreachable: {missing[:5]}")

    def route(self, src: int, dst: int) -> tuple[list[int], list[Link], float]:
        """Latency-shortest path; ties resolved to the lexicographically
        smallest vertex-index sequence. Returns (vertices, links, latency)."""
        if src == dst:
            return [src], [], 0.0
        heap: list[tuple[float, tuple[int, ...]]] = [(0.0, (src,))]
        settled: set[int] = set()
        while heap:
            dist, path = heapq.heappop(heap)
            v = path[-1]
            if v in settled:
                continue
            settled.add(v)
            if v == dst:
                links = self._links_for(path)
                return list(path), links, dist
            for w, link in self.adjacency[v]:
                if w not in settled:
                    heapq.heappush(heap, (dist + link.latency, path + (w,)))
        raise RoutingError(f"no path between {self.names[src]} and {self.names[dst]}")

    def routes_from(self, src: int) -> dict[int, tuple[list[int], float]]:
        """Shortest paths from src to every vertex, same tie-break as route()."""
        out: dict[int, tuple[list[int], float]] = {}
        heap: list[tuple[float, tuple[int, ...]]] = [(0.0, (src,))]
        while heap:
            dist, path = heapq.heappop(heap)
            v = path[-1]
            if v in out:
                continue
            out[v] = (list(path), dist)
            for w, link in self.adjacency[v]:
                if w not in out:
                    heapq.heappush(heap, (dist + link.latency, path + (w,)))
        if len(out) != len(self.names):
            raise RoutingError("graph is disconnected")
        return out

    def _links_for(self, path: tuple[int, ...]) -> list[Link]:
        links = []
        for u, v in zip(path, path[1:]):
            for w, link in self.adjacency[u]:
                if w == v:
                    links.append(link)
                    break
            else:
                raise RoutingError(f"missing link {u}-{v}")
        return links

    def path_links(self, path: list[int]) -> list[Link]:
        return self._links_for(tuple(path))

    def nearest_ap(self, point: Location) -> int:
        """AP index with minimum Euclidean distance; first index wins ties."""
        if self._ap_coords is None:
            aps = self.ap_indices
            self._ap_index_list = aps
            self._ap_coords = np.array(
                [[self.locations[i].x, self.locations[i].y] for i in aps]
            )
        d = self._ap_coords - np.array([point.x, point.y])
        return self._ap_index_list[int(np.argmin(np.einsum("ij,ij->i", d, d)))]


class NetworkFabric:
    """Owns wifi access links and all in-flight transfers."""

    def __init__(self, graph: ManGraph, wifi_bandwidth_mbps: float, wifi_latency: float):
        self.graph = graph
        self.wifi_bandwidth_mbps = wifi_bandwidth_mbps
        self.wifi_latency = wifi_latency
        self.wifi_links: dict[int, Link] = {}
        self.transfers: dict[int, Transfer] = {}
        self._next_id = 0

    def wifi_link(self, ap: int) -> Link:
        link = self.wifi_links.get(ap)
        if link is None:
            link = Link(-1, ap, self.wifi_bandwidth_mbps, self.wifi_latency)
            self.wifi_links[ap] = link
        return link

    def wifi_active_count(self, ap: int) -> int:
        link = self.wifi_links.get(ap)
        return 0 if link is None else len(link.active)

    def estimate_access_rate(self, ap: int) -> float:
        """Decision-time rate guess: nominal wifi bandwidth over current users."""
        return self.wifi_bandwidth_mbps * 1e6 / max(1, self.wifi_active_count(ap))

    def start_transfer(
        self,
        task_id: int,
        direction: str,
        links: list[Link],
        bits: float,
        now: float,
        propagation: float,
    ) -> tuple[Transfer, list[tuple[Transfer, float]]]:
        """Register a transfer; returns it plus all new completion predictions."""
        transfer = Transfer(
            id=self._next_id,
            task_id=task_id,
            direction=direction,
            links=links,
            remaining_bits=bits,
            started=now,
            propagation=propagation,
            checkpoint=now,
        )
        self._next_id += 1
        self.transfers[transfer.id] = transfer
        for link in links:
            link.active[transfer.id] = transfer
        return transfer, self._recompute(now)

    def finish_transfer(self, transfer: Transfer, now: float) -> list[tuple[Transfer, float]]:
        """Remove a completed transfer from its links and repredict the rest."""
        transfer.advance_to(now)
        transfer.remaining_bits = 0.0
        for link in transfer.links:
            link.active.pop(transfer.id, None)
        del self.transfers[transfer.id]
        return self._recompute(now)

    def reroute(
        self, transfer: Transfer, new_links: list[Link], new_propagation: float, now: float
    ) -> list[tuple[Transfer, float]]:
        """Swap an in-flight transfer onto a new path, bits preserved."""
        transfer.advance_to(now)
        for link in transfer.links:
            link.active.pop(transfer.id, None)
        transfer.links = new_links
        transfer.propagation = new_propagation
        for link in new_links:
            link.active[transfer.id] = transfer
        return self._recompute(now)

    def tick(self, now: float) -> list[tuple[Transfer, float]]:
        """Periodic update round; a no-op unless something changed rates."""
        return self._recompute(now)

    def _recompute(self, now: float) -> list[tuple[Transfer, float]]:
        changed: list[tuple[Transfer, float]] = []
        for transfer in self.transfers.values():
            new_rate = min(link.fair_rate() for link in transfer.links)
            if new_rate != transfer.rate:
                transfer.advance_to(now)
                transfer.rate = new_rate
                transfer.generation += 1
                changed.append((transfer, now + transfer.remaining_bits / new_rate))
        return changed

    def link_load_ok(self) -> bool:
        """True iff no link hands out more rate than its bandwidth."""
        for link in list(self.graph.links) + list(self.wifi_links.values()):
            granted = sum(t.rate for t in link.active.values())
            if granted > link.bandwidth_bps * (1 + 1e-9):
                return False
        return True

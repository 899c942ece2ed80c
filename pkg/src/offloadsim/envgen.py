"""Environment generation: AP grid, metro topology, servers and clusters.

The pipeline places access points on a hexagonal cell grid, spans them with
a tunable-weight tree (weight 1 is exactly a minimum spanning tree, lower
weights pull edges toward the current best-connected hub), optionally adds
extra links biased by proximity, degree product and chance, places servers
on APs with degree-proportional probability, groups servers by average-
linkage agglomeration over path distances, and elects per-cluster heads by
betweenness centrality. The result serializes to the datacenter input file.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .config import ApRecord, DatacenterLayout, LinkRecord, ServerRecord
from .domain import Location, ServerSpec

SQRT3 = math.sqrt(3.0)


@dataclass(frozen=True)
class GenParams:
    side: float
    coverage: float
    server_count: int
    cluster_count: int
    seed: int
    twst_weight: float = 1.0
    link_add_weights: tuple[float, float, float] = (1.0, 1.0, 1.0)
    extra_edges: int = 0
    man_bandwidth: float = 1000.0
    man_latency: float = 0.005
    server_spec: ServerSpec = field(
        default_factory=lambda: ServerSpec(
            idle_power=105.0, max_power=185.0, cores=15,
            mips_per_core=20000.0, ram_mb=80000.0, storage_mb=1280000.0,
        )
    )

    def validate(self) -> None:
        if self.side <= 0 or self.coverage <= 0:
            raise ValueError("side and coverage must be > 0")
        if self.server_count < 1:
            raise ValueError("need at least one server")
        if not (1 <= self.cluster_count <= self.server_count):
            raise ValueError("cluster count must lie in [1, server count]")
        if not (0.0 <= self.twst_weight <= 1.0):
            raise ValueError("tree weight must lie in [0, 1]")
        if self.extra_edges < 0:
            raise ValueError("extra edge budget must be >= 0")


def place_aps(side: float, coverage: float) -> list[Location]:
    """Hexagonal cell grid of circumradius `coverage` over [0, side]^2.

    First center sits at (coverage, coverage * sqrt(3)/2); rows are 1.5 *
    coverage apart with odd rows shifted half the sqrt(3) * coverage pitch.
    Centers are kept while their cell still intersects the square, ordered
    row-major.
    """
    if side <= 0 or coverage <= 0:
        raise ValueError("side and coverage must be > 0")
    x_pitch = SQRT3 * coverage
    y_pitch = 1.5 * coverage
    centers: list[Location] = []
    k = 0
    while True:
        y = coverage * SQRT3 / 2.0 + k * y_pitch
        if y - coverage * SQRT3 / 2.0 > side:
            break
        j = 0
        while True:
            x = coverage + (j + 0.5 * (k % 2)) * x_pitch
            if x - coverage > side:
                break
            centers.append(Location(x, y))
            j += 1
        k += 1
    return centers


def _distance_matrix(locations: list[Location]) -> np.ndarray:
    pts = np.array([[p.x, p.y] for p in locations])
    diff = pts[:, None, :] - pts[None, :, :]
    return np.sqrt((diff ** 2).sum(axis=2))


def build_twst(
    locations: list[Location],
    twst_weight: float,
    rng: np.random.Generator | None = None,
) -> list[tuple[int, int]]:
    """Grow a spanning tree, trading edge length against hub proximity.

    At each step every (tree vertex v, outside vertex u) pair is scored
        twst_weight * dist(u, v) + (1 - twst_weight) * dist(v, hub)
    where hub is the current highest-degree tree vertex (lowest index on
    ties), and the cheapest pair attaches u at v. Weight 1 is Prim's MST;
    weight 0 attaches everything at the hub, giving a star. Ties resolve by
    (cost, dist(u, v), v, u). The stream argument is accepted for interface
    symmetry; the construction is deterministic.
    """
    n = len(locations)
    if n < 2:
        raise ValueError("need at least two locations to span")
    dist = _distance_matrix(locations)
    in_tree = np.zeros(n, dtype=bool)
    in_tree[0] = True
    degree = np.zeros(n, dtype=int)
    edges: list[tuple[int, int]] = []
    hub = 0
    for _ in range(n - 1):
        tree_ids = np.flatnonzero(in_tree)
        out_ids = np.flatnonzero(~in_tree)
        cost = (
            twst_weight * dist[np.ix_(tree_ids, out_ids)]
            + (1.0 - twst_weight) * dist[tree_ids, hub][:, None]
        )
        flat = cost.ravel()
        best = flat.min()
        candidates = np.flatnonzero(flat == best)
        best_key = None
        best_pair = None
        for c in candidates:
            v = int(tree_ids[c // len(out_ids)])
            u = int(out_ids[c % len(out_ids)])
            key = (dist[u, v], v, u)
            if best_key is None or key < best_key:
                best_key = key
                best_pair = (v, u)
        v, u = best_pair
        edges.append((min(v, u), max(v, u)))
        in_tree[u] = True
        degree[v] += 1
        degree[u] += 1
        hub = int(np.argmax(degree))   # argmax takes the lowest index on ties
    return edges


def add_links(
    locations: list[Location],
    tree_edges: list[tuple[int, int]],
    weights: tuple[float, float, float],
    extra_edges: int,
    rng: np.random.Generator,
) -> list[tuple[int, int]]:
    """Add `extra_edges` non-tree edges, sampled with probability
    proportional to w1/distance + w2*deg(u)*deg(v) + w3*uniform. The graph
    stays simple; returns tree plus additions in creation order."""
    n = len(locations)
    dist = _distance_matrix(locations)
    edges = list(tree_edges)
    present = set(edges)
    degree = np.zeros(n, dtype=float)
    for a, b in edges:
        degree[a] += 1
        degree[b] += 1
    w1, w2, w3 = weights
    for _ in range(extra_edges):
        candidates = [
            (u, v) for u in range(n) for v in range(u + 1, n)
            if (u, v) not in present
        ]
        if not candidates:
            break
        scores = np.array([
            w1 / dist[u, v] + w2 * degree[u] * degree[v] + w3 * rng.random()
            for u, v in candidates
        ])
        total = scores.sum()
        if total <= 0:
            scores = np.ones(len(candidates))
            total = scores.sum()
        pick = np.searchsorted(np.cumsum(scores) / total, rng.random(), side="right")
        pick = min(pick, len(candidates) - 1)
        u, v = candidates[pick]
        edges.append((u, v))
        present.add((u, v))
        degree[u] += 1
        degree[v] += 1
    return edges


def place_servers(
    edges: list[tuple[int, int]],
    ap_count: int,
    server_count: int,
    rng: np.random.Generator,
) -> list[int]:
    """Sample host APs without replacement, probability proportional to
    degree at every draw. Returns hosts sorted ascending."""
    if server_count > ap_count:
        raise ValueError("cannot place more servers than APs")
    degree = np.zeros(ap_count, dtype=float)
    for a, b in edges:
        degree[a] += 1
        degree[b] += 1
    available = list(range(ap_count))
    chosen: list[int] = []
    for _ in range(server_count):
        weights = degree[available]
        if weights.sum() <= 0:
            weights = np.ones(len(available))
        cumulative = np.cumsum(weights) / weights.sum()
        pick = np.searchsorted(cumulative, rng.random(), side="right")
        pick = min(pick, len(available) - 1)
        chosen.append(available.pop(pick))
    return sorted(chosen)


def betweenness_centrality(adjacency: dict[int, list[int]]) -> dict[int, float]:
    """Brandes betweenness over unweighted shortest paths (undirected,
    unnormalized; each unordered pair counted once)."""
    nodes = sorted(adjacency)
    centrality = {v: 0.0 for v in nodes}
    for source in nodes:
        stack: list[int] = []
        predecessors: dict[int, list[int]] = {v: [] for v in nodes}
        sigma = {v: 0.0 for v in nodes}
        sigma[source] = 1.0
        dist = {v: -1 for v in nodes}
        dist[source] = 0
        queue = deque([source])
        while queue:
            v = queue.popleft()
            stack.append(v)
            for w in adjacency[v]:
                if dist[w] < 0:
                    dist[w] = dist[v] + 1
                    queue.append(w)
                if dist[w] == dist[v] + 1:
                    sigma[w] += sigma[v]
                    predecessors[w].append(v)
        delta = {v: 0.0 for v in nodes}
        while stack:
            w = stack.pop()
            for v in predecessors[w]:
                delta[v] += sigma[v] / sigma[w] * (1.0 + delta[w])
            if w != source:
                centrality[w] += delta[w]
    return {v: c / 2.0 for v, c in centrality.items()}


def weighted_shortest_distances(
    adjacency: dict[int, dict[int, float]], source: int
) -> dict[int, float]:
    """Dijkstra over weighted adjacency {u: {v: weight}}."""
    import heapq

    dist = {source: 0.0}
    heap = [(0.0, source)]
    done: set[int] = set()
    while heap:
        d, v = heapq.heappop(heap)
        if v in done:
            continue
        done.add(v)
        for w, weight in adjacency[v].items():
            nd = d + weight
            if w not in dist or nd < dist[w]:
                dist[w] = nd
                heapq.heappush(heap, (nd, w))
    return dist


def server_path_distances(
    locations: list[Location],
    edges: list[tuple[int, int]],
    hosts: list[int],
) -> np.ndarray:
    """Pairwise server distance: shortest path over the AP graph with each
    edge weighted by the Euclidean distance of its endpoints."""
    adjacency: dict[int, dict[int, float]] = {i: {} for i in range(len(locations))}
    for a, b in edges:
        w = locations[a].distance_to(locations[b])
        adjacency[a][b] = w
        adjacency[b][a] = w
    out = np.zeros((len(hosts), len(hosts)))
    for i, src in enumerate(hosts):
        dist = weighted_shortest_distances(adjacency, src)
        for j, dst in enumerate(hosts):
            if dst not in dist:
                raise ValueError("server hosts are not mutually reachable")
            out[i, j] = dist[dst]
    return out


def average_linkage_clusters(distances: np.ndarray, k: int) -> list[list[int]]:
    """Agglomerate singletons until k clusters remain.

    The merge step joins the pair with the smallest mean pairwise distance,
    breaking ties by the smallest (i, j) position in the current cluster
    list; the merged cluster replaces position i.
    """
    n = distances.shape[0]
    if not (1 <= k <= n):
        raise ValueError("cluster count must lie in [1, item count]")
    clusters: list[list[int]] = [[i] for i in range(n)]
    while len(clusters) > k:
        best = None
        best_pair = None
        for i in range(len(clusters)):
            for j in range(i + 1, len(clusters)):
                total = sum(
                    distances[a, b] for a in clusters[i] for b in clusters[j]
                )
                avg = total / (len(clusters[i]) * len(clusters[j]))
                if best is None or avg < best:
                    best = avg
                    best_pair = (i, j)
        i, j = best_pair
        clusters[i] = clusters[i] + clusters[j]
        del clusters[j]
    return clusters


def cluster_servers(
    locations: list[Location],
    edges: list[tuple[int, int]],
    hosts: list[int],
    k: int,
) -> tuple[list[int], list[int]]:
    """Group servers into k clusters and elect heads.

    Returns (cluster index per server, head flag source: list of head server
    positions). Cluster ids are assigned by each cluster's smallest member.
    Heads carry the highest betweenness centrality, evaluated at the host AP
    on the AP graph (servers hang off their AP, so the AP's centrality is
    the meaningful routing measure); ties go to the smallest server index.
    """
    distances = server_path_distances(locations, edges, hosts)
    raw_clusters = average_linkage_clusters(distances, k)
    ordered = sorted(raw_clusters, key=min)
    adjacency: dict[int, list[int]] = {i: [] for i in range(len(locations))}
    for a, b in edges:
        adjacency[a].append(b)
        adjacency[b].append(a)
    centrality = betweenness_centrality(adjacency)
    assignment = [0] * len(hosts)
    heads: list[int] = []
    for cluster_id, members in enumerate(ordered):
        for m in members:
            assignment[m] = cluster_id
        head = max(members, key=lambda m: (centrality[hosts[m]], -m))
        heads.append(head)
    return assignment, heads


def generate_environment(params: GenParams) -> DatacenterLayout:
    """Run the whole pipeline and return a serializable datacenter layout."""
    params.validate()
    rng = np.random.Generator(np.random.PCG64(params.seed))
    locations = place_aps(params.side, params.coverage)
    if params.server_count > len(locations):
        raise ValueError(
            f"{params.server_count} servers but only {len(locations)} APs"
        )
    if len(locations) < 2:
        edges: list[tuple[int, int]] = []
    else:
        tree = build_twst(locations, params.twst_weight, rng)
        edges = add_links(
            locations, tree, params.link_add_weights, params.extra_edges, rng
        )
    hosts = place_servers(edges, len(locations), params.server_count, rng)
    assignment, heads = cluster_servers(locations, edges, hosts, params.cluster_count)

    aps = tuple(
        ApRecord(name=f"ap{i + 1}", location=loc) for i, loc in enumerate(locations)
    )
    servers = tuple(
        ServerRecord(
            name=f"dc{i + 1}",
            location=locations[host],
            cluster=assignment[i],
            is_head=i in heads,
            spec=params.server_spec,
        )
        for i, host in enumerate(hosts)
    )
    links = [
        LinkRecord(f"ap{a + 1}", f"ap{b + 1}", params.man_latency, params.man_bandwidth)
        for a, b in edges
    ]
    links += [
        LinkRecord(f"dc{i + 1}", f"ap{host + 1}", 0.0, params.man_bandwidth)
        for i, host in enumerate(hosts)
    ]
    return DatacenterLayout(aps=aps, servers=servers, links=tuple(links))

"""Environment generation: lattice, tree, links, placement, clustering."""

import math

import numpy as np
import pytest

from conftest import HIGH_CAPACITY
from offloadsim.config import parse_datacenters, emit_datacenters
from offloadsim.domain import Location
from offloadsim.envgen import (
    GenParams,
    add_links,
    average_linkage_clusters,
    betweenness_centrality,
    build_twst,
    cluster_servers,
    generate_environment,
    place_aps,
    place_servers,
)
from oracles import (
    brute_betweenness,
    brute_force_two_partition,
    kruskal_mst_length,
    lance_williams_average_linkage,
)


def rng(seed=1):
    return np.random.Generator(np.random.PCG64(seed))


class TestPlaceAps:
    def test_city_scale_count_is_247(self):
        # side 1100 m, coverage 45 m: the fixed lattice convention lands on
        # exactly the documented 247 access points
        assert len(place_aps(1100.0, 45.0)) == 247

    def test_count_within_documented_band(self):
        assert 222 <= len(place_aps(1100.0, 45.0)) <= 272

    def test_tiny_area_single_cell(self):
        assert len(place_aps(10.0, 45.0)) == 1

    def test_centers_near_the_square(self):
        side, coverage = 800.0, 60.0
        for ap in place_aps(side, coverage):
            assert -coverage <= ap.x <= side + coverage
            assert -coverage <= ap.y <= side + coverage

    def test_row_major_ordering(self):
        aps = place_aps(500.0, 60.0)
        rows = [ap.y for ap in aps]
        assert rows == sorted(rows) or all(
            a <= b or abs(a - b) > 1 for a, b in zip(rows, rows[1:])
        )
        # within a row, x strictly increases
        by_row: dict[float, list[float]] = {}
        for ap in aps:
            by_row.setdefault(round(ap.y, 6), []).append(ap.x)
        for xs in by_row.values():
            assert xs == sorted(xs)


class TestBuildTwst:
    def test_collinear_points_weight_one_gives_chain(self):
        points = [Location(0, 0), Location(1, 0), Location(2, 0)]
        edges = build_twst(points, 1.0)
        assert sorted(edges) == [(0, 1), (1, 2)]

    def test_tree_properties(self):
        stream = rng(3)
        points = [Location(*stream.random(2) * 100) for _ in range(25)]
        edges = build_twst(points, 0.5)
        assert len(edges) == 24
        adjacency = {i: [] for i in range(25)}
        for a, b in edges:
            adjacency[a].append(b)
            adjacency[b].append(a)
        seen = {0}
        stack = [0]
        while stack:
            v = stack.pop()
            for w in adjacency[v]:
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        assert len(seen) == 25

    def test_weight_one_matches_mst_oracle_length(self):
        for seed in range(5):
            stream = rng(seed)
            pts = [(float(x), float(y)) for x, y in stream.random((20, 2)) * 1000]
            edges = build_twst([Location(x, y) for x, y in pts], 1.0)
            total = sum(
                math.hypot(pts[a][0] - pts[b][0], pts[a][1] - pts[b][1])
                for a, b in edges
            )
            assert total == pytest.approx(kruskal_mst_length(pts), abs=1e-9)

    def test_weight_zero_concentrates_degree(self):
        stream = rng(17)
        pts = [(float(x), float(y)) for x, y in stream.random((20, 2)) * 1000]
        points = [Location(x, y) for x, y in pts]
        star = build_twst(points, 0.0)
        mst = build_twst(points, 1.0)

        def max_degree(edges):
            degree = [0] * 20
            for a, b in edges:
                degree[a] += 1
                degree[b] += 1
            return max(degree)

        assert max_degree(star) >= max_degree(mst)
        assert max_degree(star) == 19   # weight zero always attaches at the hub


class TestAddLinks:
    def make_tree(self, n=10, seed=4):
        stream = rng(seed)
        points = [Location(*stream.random(2) * 100) for _ in range(n)]
        return points, build_twst(points, 1.0)

    def test_zero_budget_returns_tree(self):
        points, tree = self.make_tree()
        assert add_links(points, tree, (1, 1, 1), 0, rng(9)) == tree

    def test_budget_adds_exactly_and_stays_simple(self):
        points, tree = self.make_tree()
        edges = add_links(points, tree, (1, 1, 1), 3, rng(9))
        assert len(edges) == len(tree) + 3
        assert len(set(edges)) == len(edges)
        for a, b in edges:
            assert a < b

    def test_degree_weight_prefers_high_degree_endpoints(self):
        # with w2 dominant, added edges should connect well-connected nodes
        hits = 0
        trials = 100
        for seed in range(trials):
            points, tree = self.make_tree(n=12, seed=seed)
            degree = [0] * 12
            for a, b in tree:
                degree[a] += 1
                degree[b] += 1
            added = add_links(points, tree, (0.0, 100.0, 0.0), 1, rng(seed))[-1]
            product = degree[added[0]] * degree[added[1]]
            non_edges = [
                (u, v) for u in range(12) for v in range(u + 1, 12)
                if (u, v) not in set(tree)
            ]
            median = float(np.median([degree[u] * degree[v] for u, v in non_edges]))
            if product >= median:
                hits += 1
        assert hits >= 80


class TestPlaceServers:
    def test_all_aps_chosen_when_counts_match(self):
        points, tree = TestAddLinks().make_tree(n=8)
        assert place_servers(tree, 8, 8, rng(1)) == list(range(8))

    def test_equal_degrees_sample_uniformly(self):
        # ring graph: all degrees 2; chi-square over 10^4 single draws
        n = 8
        ring = [(i, (i + 1) % n) for i in range(n)]
        counts = np.zeros(n)
        for seed in range(10_000):
            counts[place_servers(ring, n, 1, rng(seed))[0]] += 1
        expected = 10_000 / n
        chi2 = float(((counts - expected) ** 2 / expected).sum())
        # 99.9th percentile of chi2 with 7 dof is 24.3
        assert chi2 < 24.3

    def test_star_center_frequency_proportional_to_degree(self):
        n = 9
        star = [(0, i) for i in range(1, n)]
        hits = sum(
            1 for seed in range(10_000)
            if place_servers(star, n, 1, rng(seed))[0] == 0
        )
        p = (n - 1) / (2 * (n - 1))   # degree 8 of total degree 16
        sigma = math.sqrt(10_000 * p * (1 - p))
        assert abs(hits - 10_000 * p) < 3 * sigma


class TestBetweenness:
    def test_path_graph_middle_dominates(self):
        adjacency = {0: [1], 1: [0, 2], 2: [1]}
        scores = betweenness_centrality(adjacency)
        assert scores[1] == pytest.approx(1.0)
        assert scores[0] == scores[2] == 0.0

    def test_matches_brute_force_on_random_graphs(self):
        for seed in range(20):
            stream = rng(seed)
            n = int(stream.integers(4, 13))
            adjacency = {i: [] for i in range(n)}
            edges = set()
            for i in range(1, n):
                j = int(stream.integers(0, i))
                edges.add((j, i))
            extra = int(stream.integers(0, n))
            while len(edges) < n - 1 + extra:
                a, b = sorted(stream.integers(0, n, 2).tolist())
                if a != b:
                    edges.add((a, b))
            for a, b in edges:
                adjacency[a].append(b)
                adjacency[b].append(a)
            fast = betweenness_centrality(adjacency)
            brute = brute_betweenness(adjacency)
            for v in adjacency:
                assert fast[v] == pytest.approx(brute[v], abs=1e-9)


class TestClustering:
    def test_square_corners_pair_adjacent(self):
        # 4-cycle of APs with servers at every corner, k=2: adjacent pairs
        points = [Location(0, 0), Location(100, 0), Location(100, 100), Location(0, 100)]
        edges = [(0, 1), (1, 2), (2, 3), (0, 3)]
        assignment, _ = cluster_servers(points, edges, [0, 1, 2, 3], 2)
        groups = {}
        for server, cluster in enumerate(assignment):
            groups.setdefault(cluster, set()).add(server)
        pair_sets = sorted(tuple(sorted(g)) for g in groups.values())
        # brute force over all 2-partitions by average linkage separation
        from offloadsim.envgen import server_path_distances

        distances = server_path_distances(points, edges, [0, 1, 2, 3])
        best_a, best_b = brute_force_two_partition(distances.tolist())
        assert pair_sets == sorted([tuple(best_a), tuple(best_b)])
        for group in pair_sets:
            a, b = group
            assert (a, b) in [(0, 1), (2, 3), (1, 2), (0, 3)]

    def test_k_equals_n_gives_singletons(self):
        points = [Location(i * 10.0, 0) for i in range(5)]
        edges = [(i, i + 1) for i in range(4)]
        assignment, heads = cluster_servers(points, edges, list(range(5)), 5)
        assert sorted(assignment) == list(range(5))
        assert sorted(heads) == list(range(5))

    def test_path_head_is_the_middle(self):
        points = [Location(0, 0), Location(10, 0), Location(20, 0)]
        edges = [(0, 1), (1, 2)]
        assignment, heads = cluster_servers(points, edges, [0, 1, 2], 1)
        assert assignment == [0, 0, 0]
        assert heads == [1]

    def test_average_linkage_matches_lance_williams(self):
        for seed in range(10):
            stream = rng(seed)
            n = int(stream.integers(4, 11))
            pts = stream.random((n, 2)) * 100
            distances = np.sqrt(
                ((pts[:, None, :] - pts[None, :, :]) ** 2).sum(axis=2)
            )
            for k in range(1, n + 1):
                mine = average_linkage_clusters(distances, k)
                oracle = lance_williams_average_linkage(distances.tolist(), k)
                assert [sorted(c) for c in mine] == [sorted(c) for c in oracle]


class TestGenerateEnvironment:
    def params(self, **overrides):
        base = dict(side=500.0, coverage=60.0, server_count=6, cluster_count=3,
                    seed=5, twst_weight=0.7, extra_edges=4,
                    server_spec=HIGH_CAPACITY)
        base.update(overrides)
        return GenParams(**base)

    def test_connected_with_exactly_k_heads(self):
        layout = generate_environment(self.params())
        assert len(layout.servers) == 6
        assert sum(s.is_head for s in layout.servers) == 3
        clusters = {s.cluster for s in layout.servers}
        assert clusters == {0, 1, 2}
        heads_per_cluster = {}
        for s in layout.servers:
            if s.is_head:
                heads_per_cluster[s.cluster] = heads_per_cluster.get(s.cluster, 0) + 1
        assert all(v == 1 for v in heads_per_cluster.values())

    def test_city_preset_head_count(self):
        layout = generate_environment(self.params(
            side=1100.0, coverage=45.0, server_count=20, cluster_count=8, seed=11,
            extra_edges=20,
        ))
        assert len(layout.aps) == 247
        assert sum(s.is_head for s in layout.servers) == 8

    def test_names_carry_node_kind(self):
        layout = generate_environment(self.params())
        assert all("ap" in a.name for a in layout.aps)
        assert all("dc" in s.name for s in layout.servers)

    def test_emission_roundtrip_is_byte_identical(self, tmp_path):
        layout = generate_environment(self.params())
        text = emit_datacenters(layout)
        path = tmp_path / "edge_datacenters.xml"
        path.write_text(text)
        parsed = parse_datacenters(path)
        assert emit_datacenters(parsed) == text

    def test_deterministic_given_seed(self):
        a = generate_environment(self.params())
        b = generate_environment(self.params())
        assert emit_datacenters(a) == emit_datacenters(b)
        c = generate_environment(self.params(seed=6))
        assert emit_datacenters(a) != emit_datacenters(c)

"""Offloading decisions against exhaustive enumeration oracles."""

import numpy as np
import pytest

from offloadsim.domain import ImportanceWeights
from offloadsim.orchestration import (
    LOCAL,
    DestinationQuote,
    decide_centralized,
    decide_decentralized,
    decide_hybrid,
    destination_cost,
    pick_least_loaded,
)
from oracles import enumerate_argmin, enumerate_centralized

W = ImportanceWeights


def quotes_from(options):
    return [DestinationQuote(i, d, e, p) for i, d, e, p in options]


class TestDestinationCost:
    def test_price_only_local_is_free(self):
        cost = destination_cost(
            DestinationQuote(LOCAL, 1.0, 1.0, 0.0), W(0, 0, 1), 0.5, 100.0
        )
        assert cost == 0.0

    def test_hand_evaluated_mixture(self):
        cost = destination_cost(
            DestinationQuote(3, 0.25, 0.1, 0.005), W(0.5, 0.3, 0.2), 0.5, 100.0
        )
        assert cost == pytest.approx(0.5 * 0.5 + 0.3 * 0.001 + 0.2 * 0.5, abs=1e-12)
        assert cost == pytest.approx(0.3503, abs=1e-9)

    def test_energy_beyond_battery_is_infeasible(self):
        battery = 100.0
        quote = DestinationQuote(1, 0.1, battery * (1 + 1e-9), 0.0)
        assert destination_cost(quote, W(1, 0, 0), 0.5, battery) is None


class TestDecentralized:
    def test_local_only(self):
        decision = decide_decentralized(
            DestinationQuote(LOCAL, 0.2, 0.1, 0.0), [], W(1, 0, 0), 0.5, 100.0
        )
        assert decision.destination == LOCAL and decision.feasible

    def test_faster_server_wins_on_pure_delay(self):
        decision = decide_decentralized(
            DestinationQuote(LOCAL, 1.0, 0.1, 0.0),
            quotes_from([(0, 0.4, 0.01, 0.005)]),
            W(1, 0, 0), 0.5, 100.0,
        )
        assert decision.destination == 0

    def test_tie_prefers_local_then_lowest_id(self):
        local = DestinationQuote(LOCAL, 1.0, 0.0, 0.0)
        same = [(0, 1.0, 0.0, 0.0), (1, 1.0, 0.0, 0.0)]
        decision = decide_decentralized(local, quotes_from(same), W(1, 0, 0), 0.5, 100.0)
        assert decision.destination == LOCAL
        decision = decide_decentralized(
            DestinationQuote(LOCAL, 2.0, 0.0, 0.0), quotes_from(same),
            W(1, 0, 0), 0.5, 100.0,
        )
        assert decision.destination == 0

    def test_no_feasible_falls_back_to_local(self):
        decision = decide_decentralized(
            DestinationQuote(LOCAL, 0.1, 200.0, 0.0),
            quotes_from([(0, 0.1, 150.0, 0.01)]),
            W(0, 1, 0), 0.5, 100.0,
        )
        assert decision.destination == LOCAL
        assert not decision.feasible

    def test_linear_evaluation_count(self):
        local = DestinationQuote(LOCAL, 1.0, 0.1, 0.0)
        servers = quotes_from([(i, 0.5, 0.1, 0.01) for i in range(7)])
        decision = decide_decentralized(local, servers, W(1, 0, 0), 0.5, 100.0)
        assert decision.evaluations == 8

    def test_matches_enumeration_oracle(self):
        rng = np.random.default_rng(101)
        for _ in range(10_000):
            u, v = sorted(rng.random(2))
            w = W(u, v - u, 1 - v)
            battery = float(rng.random() * 10 + 0.01)
            dmax = float(rng.random() * 2 + 0.01)
            local = (float(rng.random() * 2), float(rng.random() * battery * 2))
            n = int(rng.integers(1, 6))
            options = [
                (i, float(rng.random() * 2), float(rng.random() * battery * 2),
                 float(rng.random() * 0.05))
                for i in range(n)
            ]
            # occasional exact ties stress the tie-break
            if rng.random() < 0.05 and n >= 2:
                options[1] = (1,) + options[0][1:]
            expected, feasible = enumerate_argmin(local, options, (w.delay, w.energy, w.price), dmax, battery)
            decision = decide_decentralized(
                DestinationQuote(LOCAL, local[0], local[1], 0.0),
                quotes_from(options), w, dmax, battery,
            )
            got = None if decision.destination == LOCAL else decision.destination
            if not feasible:
                assert not decision.feasible and decision.destination == LOCAL
            else:
                assert decision.feasible
                assert got == expected


class TestHybrid:
    def test_singleton_cluster_reduces_to_decentralized(self):
        rng = np.random.default_rng(55)
        for _ in range(2000):
            u, v = sorted(rng.random(2))
            w = W(u, v - u, 1 - v)
            battery = float(rng.random() * 5 + 0.01)
            dmax = 0.5
            local = DestinationQuote(LOCAL, float(rng.random()), float(rng.random()), 0.0)
            quote = (0, float(rng.random()), float(rng.random()), float(rng.random() * 0.02))
            a = decide_hybrid(local, quotes_from([quote]), w, dmax, battery)
            b = decide_decentralized(local, quotes_from([quote]), w, dmax, battery)
            assert a.destination == b.destination
            assert a.cost == b.cost

    def test_equal_clusters_pick_lowest_index(self):
        local = DestinationQuote(LOCAL, 5.0, 0.0, 0.0)
        clusters = quotes_from([(k, 1.0, 0.0, 0.01) for k in range(4)])
        decision = decide_hybrid(local, clusters, W(1, 0, 0), 0.5, 100.0)
        assert decision.destination == 0

    def test_matches_enumeration_oracle(self):
        rng = np.random.default_rng(202)
        for _ in range(10_000):
            u, v = sorted(rng.random(2))
            w = W(u, v - u, 1 - v)
            battery = float(rng.random() * 10 + 0.01)
            dmax = float(rng.random() * 2 + 0.01)
            local = (float(rng.random() * 2), float(rng.random() * battery * 2))
            k = int(rng.integers(1, 5))
            energy = float(rng.random() * battery * 1.5)
            options = [
                (i, float(rng.random() * 2), energy, float(rng.random() * 0.05))
                for i in range(k)
            ]
            expected, feasible = enumerate_argmin(
                local, options, (w.delay, w.energy, w.price), dmax, battery
            )
            decision = decide_hybrid(
                DestinationQuote(LOCAL, local[0], local[1], 0.0),
                quotes_from(options), w, dmax, battery,
            )
            got = None if decision.destination == LOCAL else decision.destination
            if feasible:
                assert got == expected
            else:
                assert not decision.feasible


class TestCentralized:
    def test_huge_price_stays_local(self):
        decision = decide_centralized(
            DestinationQuote(LOCAL, 1.0, 0.001, 0.0),
            quotes_from([(0, 0.1, 0.001, 1.0)]),
            W(0.2, 0.2, 0.6), 0.5, 100.0,
        )
        assert decision.destination == LOCAL

    def test_identical_servers_lowest_id(self):
        decision = decide_centralized(
            DestinationQuote(LOCAL, 5.0, 0.001, 0.0),
            quotes_from([(i, 0.1, 0.001, 0.001) for i in range(5)]),
            W(1, 0, 0), 0.5, 100.0,
        )
        assert decision.destination == 0

    def test_platform_wins_exact_ties(self):
        # the device offloads when platform cost equals local cost
        local = DestinationQuote(LOCAL, 1.0, 0.0, 0.0)
        server = quotes_from([(0, 1.0, 0.0, 0.0)])
        decision = decide_centralized(local, server, W(1, 0, 0), 0.5, 100.0)
        assert decision.destination == 0

    def test_matches_two_stage_oracle(self):
        rng = np.random.default_rng(303)
        for _ in range(10_000):
            u, v = sorted(rng.random(2))
            w = W(u, v - u, 1 - v)
            battery = float(rng.random() * 10 + 0.01)
            dmax = float(rng.random() * 2 + 0.01)
            local = (float(rng.random() * 2), float(rng.random() * battery * 2))
            price = float(rng.random() * 0.05)
            n = int(rng.integers(1, 6))
            options = [
                (i, float(rng.random() * 2), float(rng.random() * battery * 1.5), price)
                for i in range(n)
            ]
            expected, feasible = enumerate_centralized(
                local, options, (w.delay, w.energy, w.price), dmax, battery
            )
            decision = decide_centralized(
                DestinationQuote(LOCAL, local[0], local[1], 0.0),
                quotes_from(options), w, dmax, battery,
            )
            got = None if decision.destination == LOCAL else decision.destination
            if feasible:
                assert got == expected
            else:
                assert not decision.feasible


class TestProperties:
    def test_price_increase_never_attracts(self):
        # raising one destination's price must not flip the choice toward it
        rng = np.random.default_rng(404)
        for _ in range(1000):
            u, v = sorted(rng.random(2))
            w = W(u * 0.5, (v - u) * 0.5, 1 - 0.5 * v)   # keep price weight > 0
            assert w.price > 0
            battery = float(rng.random() * 10 + 0.1)
            dmax = float(rng.random() + 0.01)
            local = DestinationQuote(LOCAL, float(rng.random()), float(rng.random() * battery), 0.0)
            options = [
                (i, float(rng.random()), float(rng.random() * battery), float(rng.random() * 0.05))
                for i in range(4)
            ]
            base = decide_decentralized(local, quotes_from(options), w, dmax, battery)
            target = int(rng.integers(0, 4))
            bumped = [
                (i, d, e, p + (0.01 if i == target else 0.0))
                for i, d, e, p in options
            ]
            after = decide_decentralized(local, quotes_from(bumped), w, dmax, battery)
            if base.destination != target:
                assert after.destination != target

    def test_chosen_offload_satisfies_battery(self):
        rng = np.random.default_rng(505)
        for _ in range(2000):
            w = W(0.4, 0.4, 0.2)
            battery = float(rng.random() * 2 + 0.01)
            local = DestinationQuote(LOCAL, float(rng.random()), float(rng.random() * 3), 0.0)
            options = quotes_from([
                (i, float(rng.random()), float(rng.random() * 3), float(rng.random() * 0.02))
                for i in range(5)
            ])
            decision = decide_decentralized(local, options, w, 0.5, battery)
            if decision.destination != LOCAL:
                assert options[decision.destination].energy <= battery


def test_pick_least_loaded():
    assert pick_least_loaded({3: 3, 7: 1, 9: 2}) == 7
    assert pick_least_loaded({5: 2, 2: 2, 8: 2}) == 2

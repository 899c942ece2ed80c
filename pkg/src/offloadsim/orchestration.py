"""Offloading decisions for the three control topologies.

A device weighs every candidate destination with the normalized cost
    w_d * D / D_max  +  w_e * E / B_e  +  w_p * p / p_pref
and picks the cheapest feasible one. A destination is infeasible when its
energy bill exceeds the remaining battery. These are pure functions over
quote snapshots; the engine builds the quotes.
"""

from __future__ import annotations

from dataclasses import dataclass

from .domain import ImportanceWeights

DEFAULT_PRICE_PREFERENCE = 0.01   # reference willingness to pay per MI

LOCAL = -1   # destination id of the device itself


@dataclass(frozen=True)
class DestinationQuote:
    """Delay, energy and price a device expects from one destination."""

    destination: int        # LOCAL, a server node id, or a cluster index
    delay: float            # seconds
    energy: float           # joules spent by the device
    price_per_mi: float     # 0 for local execution

    def validate(self) -> None:
        if self.delay < 0 or self.energy < 0 or self.price_per_mi < 0:
            raise ValueError("quotes must be non-negative")
        if self.destination == LOCAL and self.price_per_mi != 0.0:
            raise ValueError("local execution has no price")


@dataclass(frozen=True)
class OffloadDecision:
    destination: int
    cost: float
    feasible: bool          # False when the battery admits no destination
    evaluations: int        # cost evaluations spent; stays linear in options


def destination_cost(
    quote: DestinationQuote,
    weights: ImportanceWeights,
    max_delay: float,
    battery_j: float,
    price_preference: float = DEFAULT_PRICE_PREFERENCE,
) -> float | None:
    """Normalized cost of one destination, or None when infeasible (E > B)."""
    if quote.energy > battery_j:
        return None
    return (
        weights.delay * quote.delay / max_delay
        + weights.energy * quote.energy / battery_j
        + weights.price * quote.price_per_mi / price_preference
    )


def _argmin_quotes(
    quotes: list[DestinationQuote],
    weights: ImportanceWeights,
    max_delay: float,
    battery_j: float,
    price_preference: float,
) -> OffloadDecision:
    """Shared argmin: local wins ties, then the lowest destination id.

    The local quote must be first in the list. If nothing is feasible the
    device still runs the task locally, flagged infeasible.
    """
    best: tuple[float, int] | None = None
    best_quote: DestinationQuote | None = None
    evaluations = 0
    for quote in quotes:
        evaluations += 1
        cost = destination_cost(quote, weights, max_delay, battery_j, price_preference)
        if cost is None:
            continue
        rank = (cost, -1 if quote.destination == LOCAL else quote.destination)
        if best is None or rank < best:
            best = rank
            best_quote = quote
    if best_quote is None:
        return OffloadDecision(LOCAL, float("inf"), False, evaluations)
    return OffloadDecision(best_quote.destination, best[0], True, evaluations)


def decide_decentralized(
    local_quote: DestinationQuote,
    server_quotes: list[DestinationQuote],
    weights: ImportanceWeights,
    max_delay: float,
    battery_j: float,
    price_preference: float = DEFAULT_PRICE_PREFERENCE,
) -> OffloadDecision:
    """Pick among the local node and every edge server."""
    return _argmin_quotes(
        [local_quote] + server_quotes, weights, max_delay, battery_j, price_preference
    )


def decide_hybrid(
    local_quote: DestinationQuote,
    cluster_quotes: list[DestinationQuote],
    weights: ImportanceWeights,
    max_delay: float,
    battery_j: float,
    price_preference: float = DEFAULT_PRICE_PREFERENCE,
) -> OffloadDecision:
    """Pick among the local node and every cluster (quoted via its head)."""
    return _argmin_quotes(
        [local_quote] + cluster_quotes, weights, max_delay, battery_j, price_preference
    )


def decide_centralized(
    local_quote: DestinationQuote,
    server_quotes: list[DestinationQuote],
    weights: ImportanceWeights,
    max_delay: float,
    battery_j: float,
    price_preference: float = DEFAULT_PRICE_PREFERENCE,
) -> OffloadDecision:
    """Orchestrator picks the cheapest server; the device offloads when that
    platform cost is less than or equal to its local cost."""
    evaluations = 1
    local_cost = destination_cost(
        local_quote, weights, max_delay, battery_j, price_preference
    )
    best: tuple[float, int] | None = None
    for quote in server_quotes:
        evaluations += 1
        cost = destination_cost(quote, weights, max_delay, battery_j, price_preference)
        if cost is None:
            continue
        rank = (cost, quote.destination)
        if best is None or rank < best:
            best = rank
    if best is None:
        feasible = local_cost is not None
        return OffloadDecision(LOCAL, local_cost if feasible else float("inf"),
                               feasible, evaluations)
    if local_cost is None or best[0] <= local_cost:
        return OffloadDecision(best[1], best[0], True, evaluations)
    return OffloadDecision(LOCAL, local_cost, True, evaluations)


def pick_least_loaded(queue_lengths: dict[int, int]) -> int:
    """Bottom-up in-cluster allocation: fewest queued tasks, lowest id on ties."""
    return min(queue_lengths.items(), key=lambda kv: (kv[1], kv[0]))[0]

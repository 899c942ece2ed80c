"""Deterministic discrete-event core: event taxonomy, queue and clock.

Events fire in (time, kind priority, schedule sequence) order. The kind
priority is the declaration order of EventKind, which fixes a total order at
time ties, so a run is a pure function of (config, master seed).
"""

from __future__ import annotations

import hashlib
import heapq
import struct
from dataclasses import dataclass
from enum import IntEnum
from typing import Any, Callable


class EventKind(IntEnum):
    """Simulation event kinds; enum value doubles as the tie-break priority."""

    TASK_GENERATION = 0
    PRICE_UPDATE = 1
    MOBILITY_ENERGY_UPDATE = 2
    NETWORK_UPDATE = 3
    TASK_ARRIVED_AT_NODE = 4
    EXECUTION_FINISHED = 5
    RESULT_DELIVERED = 6
    SIMULATION_END = 7


@dataclass(frozen=True)
class Event:
    fire_time: float
    kind: EventKind
    sequence: int
    payload: Any = None

    def sort_key(self) -> tuple[float, int, int]:
        return (self.fire_time, int(self.kind), self.sequence)


class SchedulingError(RuntimeError):
    """Raised when an event is scheduled before the current clock time."""


@dataclass
class Clock:
    now: float = 0.0
    episode_length: float = 0.0

    def advance(self, t: float) -> None:
        if t < self.now:
            raise SchedulingError(f"clock cannot move backwards: {t} < {self.now}")
        self.now = t


class EventQueue:
    """Min-heap of events keyed by (fire_time, kind priority, sequence)."""

    def __init__(self, clock: Clock):
        self.clock = clock
        self._heap: list[tuple[tuple[float, int, int], Event]] = []
        self._sequence = 0

    def schedule(self, fire_time: float, kind: EventKind, payload: Any = None) -> Event:
        if fire_time < self.clock.now:
            raise SchedulingError(
                f"cannot schedule {kind.name} at {fire_time} before now={self.clock.now}"
            )
        event = Event(fire_time, kind, self._sequence, payload)
        self._sequence += 1
        heapq.heappush(self._heap, (event.sort_key(), event))
        return event

    def pop(self) -> Event:
        _, event = heapq.heappop(self._heap)
        return event

    def __len__(self) -> int:
        return len(self._heap)


class EventLoop:
    """Runs events until a SIMULATION_END handler stops the loop."""

    def __init__(self, episode_length: float):
        self.clock = Clock(0.0, episode_length)
        self.queue = EventQueue(self.clock)
        self.handlers: dict[EventKind, Callable[[Event], None]] = {}
        self.stopped = False
        self.events_fired = 0
        self._trace = hashlib.sha256()

    def on(self, kind: EventKind, handler: Callable[[Event], None]) -> None:
        self.handlers[kind] = handler

    def schedule(self, fire_time: float, kind: EventKind, payload: Any = None) -> Event:
        return self.queue.schedule(fire_time, kind, payload)

    def stop(self) -> None:
        self.stopped = True

    def run(self) -> None:
        while not self.stopped and len(self.queue):
            event = self.queue.pop()
            self.clock.advance(event.fire_time)
            self._trace.update(
                struct.pack("<dii", event.fire_time, int(event.kind), event.sequence)
            )
            self.events_fired += 1
            handler = self.handlers.get(event.kind)
            if handler is not None:
                handler(event)

    def trace_hash(self) -> str:
        """Digest of the fired (time, kind, sequence) trace; equal runs match."""
        return self._trace.hexdigest()

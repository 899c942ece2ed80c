"""Master-seed management and derivation of independent random streams.

Every source of randomness in a run is a numpy Generator obtained from the
SeedManager through a (label, id) key, so reordering unrelated events can
never change what a given entity draws.
"""

from __future__ import annotations

import numpy as np

_MASK = (1 << 64) - 1


def splitmix64(state: int) -> int:
    """One splitmix64 output step for a 64-bit state."""
    state = (state + 0x9E3779B97F4A7C15) & _MASK
    z = state
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return (z ^ (z >> 31)) & _MASK


def mix_key(master_seed: int, label: str, entity_id: int) -> int:
    """Pure 64-bit hash of (master_seed, label, entity_id).

    Label bytes are folded in one at a time so distinct labels of any length
    produce distinct states; the id is folded in last.
    """
    state = master_seed & _MASK
    state = splitmix64(state)
    for byte in label.encode("utf-8"):
        state = splitmix64(state ^ byte)
    state = splitmix64(state ^ (entity_id & _MASK))
    return state


class SeedManager:
    """Derives reproducible, independent numpy Generators from one master seed."""

    def __init__(self, master_seed: int):
        self.master_seed = int(master_seed) & _MASK

    def derive_seed(self, label: str, entity_id: int = 0) -> int:
        """64-bit sub-seed for (label, entity_id); pure function of the key."""
        return mix_key(self.master_seed, label, entity_id)

    def derive_stream(self, label: str, entity_id: int = 0) -> np.random.Generator:
        """Dedicated Generator for (label, entity_id)."""
        return np.random.Generator(np.random.PCG64(self.derive_seed(label, entity_id)))

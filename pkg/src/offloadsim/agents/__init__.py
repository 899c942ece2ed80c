from .ddpg import (
    EVALUATE,
    TRAIN,
    AgentHyperparams,
    AgentStateError,
    PricingAgent,
    slot_profit,
)
from .mlp import Adam, Mlp, soft_update
from .noise import MeanRevertingNoise
from .replay import ReplayBuffer

__all__ = [
    "AgentHyperparams",
    "AgentStateError",
    "Adam",
    "EVALUATE",
    "MeanRevertingNoise",
    "Mlp",
    "PricingAgent",
    "ReplayBuffer",
    "TRAIN",
    "slot_profit",
    "soft_update",
]

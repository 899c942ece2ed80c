"""Discrete-event simulator for edge task offloading with learned pricing."""

__version__ = "0.1.0"

from .config import ScenarioConfig, parse_inputs
from .simulation import EpisodeResult, RunSettings, run_episode

__all__ = [
    "EpisodeResult",
    "RunSettings",
    "ScenarioConfig",
    "parse_inputs",
    "run_episode",
    "__version__",
]

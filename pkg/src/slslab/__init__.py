"""Social learning strategy laboratory.

NK landscapes, interaction networks, heuristic strategy tournaments,
permutation-invariant policy-gradient training, and strategy probes.
"""

from .landscape import NKLandscape, generate
from .topology import Topology, complete
from .strategies import ALL_BASELINES, StrategySpec
from .engine import BatchStats, EpisodeConfig, PeriodicReset, Trajectory, \
    run_batch, run_episode
from .observation import FeatureFlags, build_observation

__all__ = [
    "NKLandscape", "generate", "Topology", "complete", "ALL_BASELINES",
    "StrategySpec", "BatchStats", "EpisodeConfig", "PeriodicReset",
    "Trajectory", "run_batch", "run_episode", "FeatureFlags",
    "build_observation",
]

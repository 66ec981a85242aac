"""Observation encoding shared by the neural policy, the simulator, and probes.

Each observation is an (S+1) x F matrix: one row for the focal agent and
one per sampled neighbor.  Row features are the solution bits, the payoff
scaled to [0, 1], a self-indicator, the normalized competition rank of
the payoff, and the normalized frequency of the row's solution among the
neighbors.  Extra features can be switched off, shrinking the row width.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class FeatureFlags:
    include_payoff: bool = True
    include_self_indicator: bool = True
    include_ranking: bool = True
    include_frequency: bool = True

    def width(self, n_loci: int) -> int:
        return n_loci + sum(
            (self.include_payoff, self.include_self_indicator,
             self.include_ranking, self.include_frequency)
        )

    def indicator_column(self, n_loci: int) -> int | None:
        if not self.include_self_indicator:
            return None
        return n_loci + (1 if self.include_payoff else 0)

    def payoff_column(self, n_loci: int) -> int | None:
        return n_loci if self.include_payoff else None

    @classmethod
    def preset(cls, name: str) -> "FeatureFlags":
        presets = {
            "PIRF": cls(),
            "PIR": cls(include_frequency=False),
            "PI": cls(include_ranking=False, include_frequency=False),
        }
        if name not in presets:
            raise ValueError(f"unknown feature preset {name!r} (have {sorted(presets)})")
        return presets[name]


def build_observation_batch(
    self_bits: np.ndarray,      # (B, N) uint8
    self_payoff: np.ndarray,    # (B,)
    nbr_bits: np.ndarray,       # (B, S, N) uint8
    nbr_payoff: np.ndarray,     # (B, S)
    flags: FeatureFlags = FeatureFlags(),
) -> np.ndarray:
    """Encode a batch of observations as (B, S+1, F) float64, self row first."""
    b, s, n = nbr_bits.shape
    all_bits = np.concatenate([self_bits[:, None, :], nbr_bits], axis=1)
    all_pay = np.concatenate([self_payoff[:, None], nbr_payoff], axis=1)

    cols = [all_bits.astype(np.float64)]
    if flags.include_payoff:
        cols.append(all_pay[:, :, None] / 100.0)
    if flags.include_self_indicator:
        indicator = np.zeros((b, s + 1, 1))
        indicator[:, 0, 0] = 1.0
        cols.append(indicator)
    if flags.include_ranking:
        # competition ("1224") rank: 1 + number of strictly greater payoffs
        greater = (all_pay[:, None, :] > all_pay[:, :, None]).sum(axis=2)
        cols.append(greater[:, :, None] / s)
    if flags.include_frequency:
        keys = _pack(all_bits, n)
        matches = (keys[:, :, None] == keys[:, None, 1:]).sum(axis=2)
        cols.append(matches[:, :, None] / s)
    return np.concatenate(cols, axis=2)


def build_observation(self_state, neighbor_states, flags=FeatureFlags()):
    """Encode a single observation as an (S+1) x F matrix.

    ``self_state`` is a (bits, payoff) pair and ``neighbor_states`` a list
    of S such pairs.
    """
    if not neighbor_states:
        raise ValueError("need at least one neighbor")
    self_bits = np.asarray(self_state[0], dtype=np.uint8)
    nbr_bits = np.stack([np.asarray(x, dtype=np.uint8) for x, _ in neighbor_states])
    return build_observation_batch(
        self_bits[None, :],
        np.array([self_state[1]], dtype=np.float64),
        nbr_bits[None, :, :],
        np.array([[p for _, p in neighbor_states]], dtype=np.float64),
        flags,
    )[0]


def _pack(bits: np.ndarray, n: int) -> np.ndarray:
    """Pack bit vectors along the last axis into int64 keys (n <= 62)."""
    pow2 = (1 << np.arange(n - 1, -1, -1)).astype(np.int64)
    return bits.astype(np.int64) @ pow2

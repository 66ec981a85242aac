"""Scripted reference policies.

These deterministic policies expose the same ``bit_probabilities``
surface as the neural actor and are used to validate the probe machinery
and as known-answer baselines in diagnostics.
"""

from __future__ import annotations

import numpy as np

from .observation import FeatureFlags


class _ScriptedPolicy:
    def __init__(self, n_loci: int, flags: FeatureFlags = FeatureFlags()):
        if flags.indicator_column(n_loci) is None or \
                flags.payoff_column(n_loci) is None:
            raise ValueError("scripted policies need payoff and indicator features")
        self.n_loci = n_loci
        self.flags = flags

    def _split(self, obs: np.ndarray):
        obs = np.asarray(obs, dtype=np.float64)
        if obs.ndim == 2:
            obs = obs[None]
        n = self.n_loci
        bits = obs[:, :, :n]
        payoff = obs[:, :, self.flags.payoff_column(n)]
        indicator = obs[:, :, self.flags.indicator_column(n)]
        self_idx = indicator.argmax(axis=1)
        rows = np.arange(len(obs))
        self_bits = bits[rows, self_idx]
        self_pay = payoff[rows, self_idx]
        # best neighbor: max payoff, ties broken by largest packed solution
        # so the choice stays permutation invariant
        nbr_pay = np.where(indicator > 0.5, -np.inf, payoff)
        best = nbr_pay.max(axis=1)
        keys = bits @ (2.0 ** np.arange(n - 1, -1, -1))
        tie_keys = np.where(nbr_pay == best[:, None], keys, -1.0)
        best_idx = tie_keys.argmax(axis=1)
        return self_bits, self_pay, bits[rows, best_idx], best


class CopyBestOracle(_ScriptedPolicy):
    """Always outputs the best neighbor's solution with certainty."""

    def bit_probabilities(self, obs):
        _, _, best_bits, _ = self._split(obs)
        return best_bits


class UniformRandomOracle:
    """Fully random search: probability 0.5 everywhere."""

    def __init__(self, n_loci: int):
        self.n_loci = n_loci

    def bit_probabilities(self, obs):
        obs = np.asarray(obs)
        b = 1 if obs.ndim == 2 else len(obs)
        return np.full((b, self.n_loci), 0.5)


class AlwaysSelfOracle(_ScriptedPolicy):
    """Always reproduces its own current solution."""

    def bit_probabilities(self, obs):
        self_bits, _, _, _ = self._split(obs)
        return self_bits


class BestImitatorRandomOracle(_ScriptedPolicy):
    """The BI-R heuristic as a policy: copy the best neighbor when it
    strictly beats the self payoff, otherwise search uniformly."""

    def bit_probabilities(self, obs):
        self_bits, self_pay, best_bits, best_pay = self._split(obs)
        copy = (best_pay > self_pay)[:, None]
        return np.where(copy, best_bits, 0.5)

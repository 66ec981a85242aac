"""The twelve reference social learning heuristics.

A strategy pairs a social option rule (best imitator, conformist, random
imitator, or pure individualist) with an individual-learning variant
(none, single bit flip, per-bit probabilistic flip, or full random
resample), applied under an adopt-if-strictly-better protocol.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np


class Social(enum.Enum):
    BEST_IMITATOR = "BI"
    CONFORMIST = "CF"
    RANDOM_IMITATOR = "RI"
    PURE_INDIVIDUALIST = "PI"


class Individual(enum.Enum):
    NONE = ""
    SINGLE_BIT_FLIP = "I"
    PROBABILISTIC_FLIP = "P"
    RANDOM_RESAMPLE = "R"


@dataclass(frozen=True)
class StrategySpec:
    social: Social
    individual: Individual

    def __post_init__(self):
        if (self.social is Social.PURE_INDIVIDUALIST
                and self.individual is Individual.NONE):
            raise ValueError("pure individualist needs an individual variant")

    @property
    def name(self) -> str:
        if self.individual is Individual.NONE:
            return self.social.value
        return f"{self.social.value}-{self.individual.value}"

    @classmethod
    def parse(cls, name: str) -> "StrategySpec":
        head, _, tail = name.partition("-")
        try:
            return cls(Social(head), Individual(tail))
        except ValueError as exc:
            raise ValueError(f"unknown strategy name {name!r}") from exc


#: Fixed tournament lineup from the baseline comparison.
ALL_BASELINES = [
    "BI", "BI-I", "BI-P", "BI-R",
    "CF", "CF-I", "CF-P", "CF-R",
    "RI", "PI-I", "PI-P", "PI-R",
]


def social_option(spec: StrategySpec, sample, rng) -> np.ndarray | None:
    """Pick the socially proposed solution, or None if the rule yields none.

    ``sample`` is a list of (bits, payoff) pairs for the S observed
    neighbors.  Ties (equal best payoffs, equal modal counts) are broken
    uniformly at random, keeping the rule permutation invariant.
    """
    if not sample:
        raise ValueError("empty neighbor sample")
    social = spec.social
    if social is Social.PURE_INDIVIDUALIST:
        return None
    if social is Social.RANDOM_IMITATOR:
        return np.array(sample[rng.integers(len(sample))][0], dtype=np.uint8)
    if social is Social.BEST_IMITATOR:
        payoffs = np.array([p for _, p in sample])
        tied = np.flatnonzero(payoffs == payoffs.max())
        return np.array(sample[rng.choice(tied)][0], dtype=np.uint8)
    # conformist: modal solution; none when all are equally frequent
    keys = [tuple(np.asarray(bits, dtype=np.uint8)) for bits, _ in sample]
    counts = np.array([keys.count(k) for k in keys])
    if counts.max() == counts.min() and len(set(keys)) > 1:
        return None
    if len(set(keys)) == 1:
        return np.array(sample[0][0], dtype=np.uint8)
    modal = np.flatnonzero(counts == counts.max())
    return np.array(sample[rng.choice(modal)][0], dtype=np.uint8)


def individual_option(variant: Individual, current, rng) -> np.ndarray | None:
    """Propose an asocially explored solution, or None for the no-op variant."""
    x = np.asarray(current, dtype=np.uint8)
    n = len(x)
    if variant is Individual.NONE:
        return None
    if variant is Individual.SINGLE_BIT_FLIP:
        out = x.copy()
        pos = rng.integers(n)
        out[pos] ^= 1
        return out
    if variant is Individual.PROBABILISTIC_FLIP:
        flips = rng.random(n) < 1.0 / n
        return x ^ flips.astype(np.uint8)
    return rng.integers(0, 2, size=n, dtype=np.uint8)


def strategy_step(spec: StrategySpec, self_state, sample, scape, rng):
    """One adopt-if-better update; returns the (bits, payoff) next state.

    The social option is adopted when strictly better; otherwise the
    individual option is evaluated and adopted when strictly better;
    otherwise the state is unchanged.
    """
    bits, payoff = self_state
    bits = np.asarray(bits, dtype=np.uint8)
    option = social_option(spec, sample, rng)
    if option is not None:
        p = scape.payoff(option)
        if p > payoff:
            return option, p
    option = individual_option(spec.individual, bits, rng)
    if option is not None:
        p = scape.payoff(option)
        if p > payoff:
            return option, p
    return bits, payoff

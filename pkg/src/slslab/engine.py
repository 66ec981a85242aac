"""Population simulation engine.

Runs many independent episodes of a shared strategy (heuristic or neural
policy) in one vectorized batch: all repetitions of a landscape advance
together, agents update synchronously against the time-t snapshot, and
every random draw comes from a single per-landscape generator consumed
in a fixed order, so results are bit-reproducible at any worker count.
"""

from __future__ import annotations

import csv
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import landscape as nk
from .observation import FeatureFlags, build_observation_batch
from .strategies import Individual, Social, StrategySpec
from .topology import Topology


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class PeriodicReset:
    period: int
    count: int


@dataclass(frozen=True)
class EpisodeConfig:
    n_agents: int = 100
    sample_size: int = 3
    steps: int = 200
    n_loci: int = 15
    k_inputs: int = 7
    schedule: PeriodicReset | None = None  # None = static landscape

    def validate(self, topology: Topology) -> None:
        if self.steps < 1:
            raise ConfigError("need at least one step")
        if topology.n_nodes != self.n_agents:
            raise ConfigError(
                f"topology has {topology.n_nodes} nodes, config says "
                f"{self.n_agents} agents"
            )
        if int(topology.degrees.min()) < self.sample_size:
            raise ConfigError(
                f"every degree must be >= sample size {self.sample_size}"
            )
        if self.schedule is not None:
            if self.schedule.period * self.schedule.count != self.steps:
                raise ConfigError("reset period * count must equal steps")


@dataclass
class Trajectory:
    mean_payoff: np.ndarray                  # (L,)
    per_agent_payoff: np.ndarray | None = None   # (n, L)


@dataclass
class BatchStats:
    mean_curve: np.ndarray        # (L,) mean over episodes
    sem_curve: np.ndarray         # (L,) standard error over episodes
    average_mean_payoff: float    # time average of mean_curve
    final_mean_payoff: float
    n_episodes: int

    @classmethod
    def from_curves(cls, curves: np.ndarray) -> "BatchStats":
        mean_curve = curves.mean(axis=0)
        sem = curves.std(axis=0, ddof=1) / np.sqrt(len(curves)) \
            if len(curves) > 1 else np.zeros_like(mean_curve)
        return cls(
            mean_curve=mean_curve,
            sem_curve=sem,
            average_mean_payoff=float(mean_curve.mean()),
            final_mean_payoff=float(mean_curve[-1]),
            n_episodes=len(curves),
        )

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["step", "mean_payoff", "sem"])
            for t, (m, s) in enumerate(zip(self.mean_curve, self.sem_curve), 1):
                w.writerow([t, repr(float(m)), repr(float(s))])

    def summary(self) -> dict:
        return {
            "average_mean_payoff": self.average_mean_payoff,
            "final_mean_payoff": self.final_mean_payoff,
            "n_episodes": self.n_episodes,
        }


# ---------------------------------------------------------------------------
# steppers: batched one-step updates for heuristics and policies


class BaselineStepper:
    """Vectorized adopt-if-better update for one heuristic strategy."""

    def __init__(self, spec: StrategySpec):
        self.spec = spec

    def step(self, bits, payoffs, nbr_bits, nbr_payoffs, scape_eval, rng):
        """bits (B, N), payoffs (B,), nbr_* batched over the S sample."""
        b, n = bits.shape
        spec = self.spec
        social_bits, social_pay, has_social = _social_choice(
            spec.social, bits, nbr_bits, nbr_payoffs, rng
        )
        adopt_social = has_social & (social_pay > payoffs)

        if spec.individual is not Individual.NONE:
            cand = _individual_candidates(spec.individual, bits, rng)
            cand_pay = scape_eval(cand)
            adopt_ind = ~adopt_social & (cand_pay > payoffs)
        else:
            cand = bits
            cand_pay = payoffs
            adopt_ind = np.zeros(b, dtype=bool)

        new_bits = np.where(
            adopt_social[:, None], social_bits,
            np.where(adopt_ind[:, None], cand, bits),
        ).astype(np.uint8)
        new_pay = np.where(adopt_social, social_pay,
                           np.where(adopt_ind, cand_pay, payoffs))
        return new_bits, new_pay


def _social_choice(social, bits, nbr_bits, nbr_payoffs, rng):
    b, s, n = nbr_bits.shape
    if social is Social.PURE_INDIVIDUALIST:
        return bits, np.zeros(b), np.zeros(b, dtype=bool)
    if social is Social.RANDOM_IMITATOR:
        pick = rng.integers(s, size=b)
    elif social is Social.BEST_IMITATOR:
        best = nbr_payoffs.max(axis=1, keepdims=True)
        r = rng.random((b, s))
        pick = np.where(nbr_payoffs == best, r, -1.0).argmax(axis=1)
    else:  # conformist
        keys = _pack_bits(nbr_bits)
        counts = (keys[:, :, None] == keys[:, None, :]).sum(axis=2)
        cmax = counts.max(axis=1)
        cmin = counts.min(axis=1)
        # no strict mode: every solution equally frequent (and not all equal)
        has = (cmax != cmin) | (cmax == s)
        r = rng.random((b, s))
        pick = np.where(counts == cmax[:, None], r, -1.0).argmax(axis=1)
        rows = np.arange(b)
        return (nbr_bits[rows, pick], nbr_payoffs[rows, pick], has)
    rows = np.arange(b)
    return nbr_bits[rows, pick], nbr_payoffs[rows, pick], np.ones(b, dtype=bool)


def _individual_candidates(variant, bits, rng):
    b, n = bits.shape
    if variant is Individual.SINGLE_BIT_FLIP:
        cand = bits.copy()
        pos = rng.integers(n, size=b)
        cand[np.arange(b), pos] ^= 1
        return cand
    if variant is Individual.PROBABILISTIC_FLIP:
        flips = (rng.random((b, n)) < 1.0 / n).astype(np.uint8)
        return bits ^ flips
    return rng.integers(0, 2, size=(b, n), dtype=np.uint8)


class PolicyStepper:
    """Batched rollout step for a neural (or scripted) policy.

    The policy only needs a ``bit_probabilities(obs_batch)`` method; when
    ``record`` is set, per-transition data needed by the trainer is kept.
    """

    def __init__(self, actor, flags: FeatureFlags = FeatureFlags(),
                 critic=None, record: bool = False):
        self.actor = actor
        self.flags = flags
        self.critic = critic
        self.record = record
        self.observations = []
        self.actions = []
        self.log_probs = []
        self.values = []
        self.rewards = []
        self.entropies = []

    def step(self, bits, payoffs, nbr_bits, nbr_payoffs, scape_eval, rng):
        obs = build_observation_batch(bits, payoffs, nbr_bits, nbr_payoffs,
                                      self.flags)
        p1 = np.asarray(self.actor.bit_probabilities(obs))
        sampled = (rng.random(p1.shape) < p1).astype(np.uint8)
        new_pay_candidate = scape_eval(sampled)
        better = new_pay_candidate > payoffs
        new_bits = np.where(better[:, None], sampled, bits).astype(np.uint8)
        new_pay = np.where(better, new_pay_candidate, payoffs)
        if self.record:
            eps = 1e-300
            logp = (np.where(sampled, np.log(p1 + eps), np.log(1 - p1 + eps))
                    .sum(axis=1))
            self.observations.append(obs)
            self.actions.append(sampled)
            self.log_probs.append(logp)
            self.values.append(np.asarray(self.critic.value(obs)))
            self.rewards.append(new_pay)
            from .policy import output_entropy
            self.entropies.append(output_entropy(p1))
        return new_bits, new_pay


def make_stepper(strategy_or_policy, flags: FeatureFlags = FeatureFlags()):
    if isinstance(strategy_or_policy, StrategySpec):
        return BaselineStepper(strategy_or_policy)
    if isinstance(strategy_or_policy, str):
        return BaselineStepper(StrategySpec.parse(strategy_or_policy))
    return PolicyStepper(strategy_or_policy, flags)


# ---------------------------------------------------------------------------
# episode execution


def _sample_neighbors(topology_info, sample_size, n_reps, rng):
    """(R, n, S) neighbor indices, distinct per agent, uniform."""
    kind, payload = topology_info
    if kind == "complete":
        n = payload
        # draw S distinct values from {0..n-2}, then skip over self
        draw = rng.integers(n - 1, size=(n_reps, n, sample_size))
        while True:
            dup = np.zeros(draw.shape[:2], dtype=bool)
            for a in range(sample_size):
                for bcol in range(a + 1, sample_size):
                    dup |= draw[:, :, a] == draw[:, :, bcol]
            if not dup.any():
                break
            redraw = rng.integers(n - 1, size=(int(dup.sum()), sample_size))
            draw[dup] = redraw
        agent = np.arange(n)[None, :, None]
        return np.where(draw >= agent, draw + 1, draw)
    padded, deg = payload
    n, dmax = padded.shape
    r = rng.random((n_reps, n, dmax))
    valid = np.arange(dmax)[None, :] < deg[:, None]
    r = np.where(valid[None, :, :], r, np.inf)
    slot = np.argpartition(r, sample_size - 1, axis=2)[:, :, :sample_size]
    return padded[np.arange(n)[None, :, None], slot]


def _topology_info(topology: Topology):
    deg = topology.degrees
    if np.all(deg == topology.n_nodes - 1):
        return ("complete", topology.n_nodes)
    return ("general", topology.padded_adjacency())


def run_episodes(
    cfg: EpisodeConfig,
    topology: Topology,
    stepper,
    scape_for_segment,
    n_reps: int,
    rng,
    record_per_agent: bool = False,
) -> tuple[np.ndarray, np.ndarray | None]:
    """Advance ``n_reps`` parallel episodes; returns (R, L) mean payoffs.

    ``scape_for_segment(segment_index)`` supplies the landscape for each
    static segment (segment 0 starts at t=0; later segments begin at the
    schedule's reset points).
    """
    cfg.validate(topology)
    n, s, steps = cfg.n_agents, cfg.sample_size, cfg.steps
    tinfo = _topology_info(topology)
    scape = scape_for_segment(0)

    bits = rng.integers(0, 2, size=(n_reps, n, cfg.n_loci), dtype=np.uint8)
    flat = bits.reshape(-1, cfg.n_loci)
    payoffs = scape.payoff_batch(flat).reshape(n_reps, n)

    mean_curve = np.empty((n_reps, steps))
    per_agent = np.empty((n_reps, n, steps)) if record_per_agent else None

    for t in range(steps):
        if cfg.schedule is not None and t > 0 and t % cfg.schedule.period == 0:
            scape = scape_for_segment(t // cfg.schedule.period)
            payoffs = scape.payoff_batch(bits.reshape(-1, cfg.n_loci)) \
                .reshape(n_reps, n)
        nbr = _sample_neighbors(tinfo, s, n_reps, rng)  # (R, n, S)
        rep_idx = np.arange(n_reps)[:, None, None]
        nbr_bits = bits[rep_idx, nbr]         # (R, n, S, N)
        nbr_pay = payoffs[rep_idx, nbr]       # (R, n, S)

        flat_bits = bits.reshape(-1, cfg.n_loci)
        flat_pay = payoffs.reshape(-1)
        flat_nbits = nbr_bits.reshape(-1, s, cfg.n_loci)
        flat_npay = nbr_pay.reshape(-1, s)
        new_bits, new_pay = stepper.step(
            flat_bits, flat_pay, flat_nbits, flat_npay,
            scape.payoff_batch, rng,
        )
        bits = new_bits.reshape(n_reps, n, cfg.n_loci)
        payoffs = new_pay.reshape(n_reps, n)
        mean_curve[:, t] = payoffs.mean(axis=1)
        if record_per_agent:
            per_agent[:, :, t] = payoffs
    return mean_curve, per_agent


def run_episode(
    cfg: EpisodeConfig,
    topology: Topology,
    landscape_source,
    strategy_or_policy,
    rng,
    flags: FeatureFlags = FeatureFlags(),
    record_per_agent: bool = False,
) -> Trajectory:
    """One episode.  ``landscape_source`` is a landscape or a callable
    segment_index -> landscape (needed under a reset schedule)."""
    if callable(landscape_source):
        source = landscape_source
    else:
        source = lambda seg: landscape_source
    stepper = make_stepper(strategy_or_policy, flags)
    curve, per_agent = run_episodes(
        cfg, topology, stepper, source, 1, rng, record_per_agent
    )
    return Trajectory(curve[0], per_agent[0] if per_agent is not None else None)


def _run_one_landscape(args):
    (cfg, topology, strategy_name_or_policy, flags, reps, seed_tuple) = args
    ss = np.random.SeedSequence(seed_tuple)
    scape_seed, ep_seed = ss.spawn(2)
    scape_rng = np.random.default_rng(scape_seed)
    segments: dict[int, nk.NKLandscape] = {}

    def source(seg):
        # landscapes regenerate in segment order from one stream
        while seg not in segments:
            segments[len(segments)] = nk.generate(
                cfg.n_loci, cfg.k_inputs, scape_rng
            )
        return segments[seg]

    stepper = make_stepper(strategy_name_or_policy, flags)
    rng = np.random.default_rng(ep_seed)
    curves, _ = run_episodes(cfg, topology, stepper, source, reps, rng)
    return curves


def run_batch(
    cfg: EpisodeConfig,
    topology: Topology,
    strategy_or_policy,
    n_landscapes: int = 50,
    reps_per_landscape: int = 100,
    seed: int = 0,
    workers: int = 1,
    flags: FeatureFlags = FeatureFlags(),
) -> BatchStats:
    """Tournament statistics over fresh landscapes x repetitions.

    Deterministic for a fixed seed at any worker count: each landscape
    owns a seed derived from (seed, landscape index) and results are
    concatenated in landscape order.
    """
    if n_landscapes < 1 or reps_per_landscape < 1:
        raise ConfigError("need at least one landscape and one repetition")
    jobs = [
        (cfg, topology, strategy_or_policy, flags, reps_per_landscape,
         (seed, li))
        for li in range(n_landscapes)
    ]
    if workers > 1 and isinstance(strategy_or_policy, (StrategySpec, str)):
        with ProcessPoolExecutor(max_workers=workers) as pool:
            all_curves = list(pool.map(_run_one_landscape, jobs))
    else:
        all_curves = [_run_one_landscape(job) for job in jobs]
    return BatchStats.from_curves(np.concatenate(all_curves, axis=0))


def _pack_bits(bits: np.ndarray) -> np.ndarray:
    n = bits.shape[-1]
    pow2 = (1 << np.arange(n - 1, -1, -1)).astype(np.int64)
    return bits.astype(np.int64) @ pow2

"""Actor-critic training loop.

On-policy epochs: one full shared-policy episode fills the buffer, then a
fixed number of minibatch updates re-weight the policy gradient by the
(unclipped) importance ratio against the behavior log-probabilities.
Advantages come from the generalized advantage estimator; value targets
are advantage + value.
"""

from __future__ import annotations

import csv
import math
import os
from dataclasses import dataclass, field, asdict

import numpy as np
import torch

from . import landscape as nk
from .engine import EpisodeConfig, PeriodicReset, PolicyStepper, run_episodes
from .observation import FeatureFlags
from .policy import (Actor, ArchConfig, Critic, entropy_term,
                     log_prob_of_bits, save_checkpoint)
from .topology import Topology, complete


@dataclass
class TrainConfig:
    env: EpisodeConfig = field(default_factory=EpisodeConfig)
    gamma: float = 0.98
    gae_lambda: float = 0.95
    lr_actor: float = 1.0e-5
    lr_critic: float = 3.0e-5
    entropy_coef: float = 3e-4
    max_epochs: int = 10_000
    minibatch_size: int = 1000
    updates_per_epoch: int = 20
    reward_mode: str = "per_step_payoff"      # or "final_payoff_scaled"
    reward_scope: str = "individual"          # or "group_averaged"
    landscape_mode: str = "fresh_per_epoch"   # or "fixed_set"
    fixed_set_size: int = 1
    curriculum: list[tuple[int, int]] | None = None  # (epoch, K) switches
    flags: FeatureFlags = field(default_factory=FeatureFlags)
    arch: ArchConfig = field(default_factory=ArchConfig)
    normalize_advantages: bool = True
    checkpoint_every: int = 500
    # early stopping: moving average of payoff must improve by min_improve
    # within patience epochs, checked once the window is full
    early_stop_window: int = 200
    early_stop_patience: int = 500
    early_stop_min_improve: float = 0.1

    def validate(self):
        if not 0 < self.gamma <= 1:
            raise ValueError("gamma must be in (0, 1]")
        if not 0 <= self.gae_lambda <= 1:
            raise ValueError("lambda must be in [0, 1]")
        if min(self.lr_actor, self.lr_critic) <= 0:
            raise ValueError("learning rates must be positive")
        if self.reward_mode not in ("per_step_payoff", "final_payoff_scaled"):
            raise ValueError(f"unknown reward mode {self.reward_mode!r}")
        if self.reward_scope not in ("individual", "group_averaged"):
            raise ValueError(f"unknown reward scope {self.reward_scope!r}")
        if self.landscape_mode not in ("fresh_per_epoch", "fixed_set"):
            raise ValueError(f"unknown landscape mode {self.landscape_mode!r}")


def compute_gae(rewards, values, gamma: float, lam: float):
    """GAE over trailing time axis; terminal bootstrap value is 0.

    delta_t = r_t + gamma V_{t+1} - V_t, A_t = sum_k (gamma lam)^k
    delta_{t+k}; return targets are A_t + V_t.
    """
    rewards = np.asarray(rewards, dtype=np.float64)
    values = np.asarray(values, dtype=np.float64)
    if rewards.shape != values.shape:
        raise ValueError("rewards and values must have matching shapes")
    t_len = rewards.shape[-1]
    adv = np.zeros_like(rewards)
    last = np.zeros(rewards.shape[:-1])
    for t in range(t_len - 1, -1, -1):
        next_v = values[..., t + 1] if t + 1 < t_len else 0.0
        delta = rewards[..., t] + gamma * next_v - values[..., t]
        last = delta + gamma * lam * last
        adv[..., t] = last
    return adv, adv + values


@dataclass
class EpochBuffer:
    observations: np.ndarray  # (n*L, S+1, F)
    actions: np.ndarray       # (n*L, N)
    log_probs: np.ndarray     # (n*L,)
    advantages: np.ndarray    # (n*L,)
    returns: np.ndarray       # (n*L,)
    avg_mean_payoff: float
    mean_entropy: float

    def __len__(self):
        return len(self.actions)


def collect_epoch(actor: Actor, critic: Critic, cfg: TrainConfig,
                  scape_source, topology: Topology, rng) -> EpochBuffer:
    """Run one on-policy episode and assemble the training buffer."""
    stepper = PolicyStepper(actor, cfg.flags, critic=critic, record=True)
    curves, _ = run_episodes(cfg.env, topology, stepper, scape_source, 1, rng)
    n, steps = cfg.env.n_agents, cfg.env.steps

    # recorded lists are per step with n rows each -> (L, n) time-major
    rewards = np.stack(stepper.rewards)            # (L, n)
    values = np.stack(stepper.values)              # (L, n)
    if cfg.reward_scope == "group_averaged":
        rewards = np.repeat(rewards.mean(axis=1, keepdims=True), n, axis=1)
    if cfg.reward_mode == "final_payoff_scaled":
        final = rewards[-1] * steps
        rewards = np.zeros_like(rewards)
        rewards[-1] = final

    adv, ret = compute_gae(rewards.T, values.T, cfg.gamma, cfg.gae_lambda)

    def flat(stacked):  # (L, n, ...) -> (n*L, ...) agent-major
        arr = np.stack(stacked)
        return np.swapaxes(arr, 0, 1).reshape(n * steps, *arr.shape[2:])

    return EpochBuffer(
        observations=flat(stepper.observations),
        actions=flat(stepper.actions),
        log_probs=flat(stepper.log_probs),
        advantages=adv.reshape(-1),
        returns=ret.reshape(-1),
        avg_mean_payoff=float(curves.mean()),
        mean_entropy=float(np.stack(stepper.entropies).mean()),
    )


def update_step(actor, critic, opt_actor, opt_critic, buffer: EpochBuffer,
                idx: np.ndarray, cfg: TrainConfig) -> dict:
    """One minibatch gradient step for actor and critic."""
    obs = torch.from_numpy(buffer.observations[idx])
    actions = torch.from_numpy(buffer.actions[idx])
    behavior_logp = torch.from_numpy(buffer.log_probs[idx])
    adv = torch.from_numpy(buffer.advantages[idx])
    ret = torch.from_numpy(buffer.returns[idx])
    if cfg.normalize_advantages:
        adv = (adv - adv.mean()) / (adv.std(unbiased=False) + 1e-8)

    logits = actor(obs)
    logp = log_prob_of_bits(logits, actions)
    ratio = torch.exp(logp - behavior_logp)
    entropy = entropy_term(logits)
    actor_loss = -(ratio * adv).mean() - cfg.entropy_coef * entropy.mean()

    value = critic(obs)
    critic_loss = torch.mean((value - ret) ** 2)

    if not (torch.isfinite(actor_loss) and torch.isfinite(critic_loss)):
        raise FloatingPointError(
            f"non-finite loss (actor={actor_loss.item()}, "
            f"critic={critic_loss.item()})"
        )

    opt_actor.zero_grad()
    actor_loss.backward()
    opt_actor.step()
    opt_critic.zero_grad()
    critic_loss.backward()
    opt_critic.step()
    return {
        "actor_loss": float(actor_loss.item()),
        "critic_loss": float(critic_loss.item()),
        "mean_ratio": float(ratio.mean().item()),
    }


class _LandscapeProvider:
    """Landscape scheduling across epochs: fresh, fixed set, curriculum."""

    def __init__(self, cfg: TrainConfig, seed_seq):
        self.cfg = cfg
        self.rng = np.random.default_rng(seed_seq)
        self.k_current = cfg.env.k_inputs
        self.fixed: list[nk.NKLandscape] = []
        if cfg.landscape_mode == "fixed_set":
            self.fixed = [
                nk.generate(cfg.env.n_loci, self.k_current, self.rng)
                for _ in range(cfg.fixed_set_size)
            ]

    def apply_curriculum(self, epoch: int):
        if not self.cfg.curriculum:
            return
        for switch_epoch, k in self.cfg.curriculum:
            if epoch >= switch_epoch:
                self.k_current = k

    def source_for_epoch(self, epoch: int):
        self.apply_curriculum(epoch)
        if self.cfg.landscape_mode == "fixed_set":
            pool = self.fixed
            pick = pool[epoch % len(pool)]
            return lambda seg: pick
        cache: dict[int, nk.NKLandscape] = {}

        def source(seg):
            if seg not in cache:
                cache[seg] = nk.generate(
                    self.cfg.env.n_loci, self.k_current, self.rng
                )
            return cache[seg]

        return source


def train(cfg: TrainConfig, seed: int, out_dir=None, topology: Topology = None,
          log_every: int = 1, n_epochs: int | None = None,
          actor: Actor = None, critic: Critic = None):
    """Full training loop; returns (actor, critic, metrics list of dicts)."""
    cfg.validate()
    torch.manual_seed(seed)
    topology = topology or complete(cfg.env.n_agents)
    actor = actor or Actor(cfg.env.n_loci, cfg.flags, cfg.arch)
    critic = critic or Critic(cfg.env.n_loci, cfg.flags, cfg.arch)
    opt_actor = torch.optim.Adam(actor.parameters(), lr=cfg.lr_actor)
    opt_critic = torch.optim.Adam(critic.parameters(), lr=cfg.lr_critic)

    ss = np.random.SeedSequence(seed)
    scape_ss, rollout_ss, batch_ss = ss.spawn(3)
    provider = _LandscapeProvider(cfg, scape_ss)
    rollout_rng = np.random.default_rng(rollout_ss)
    batch_rng = np.random.default_rng(batch_ss)

    metrics = []
    csv_path = os.path.join(out_dir, "metrics.csv") if out_dir else None
    if csv_path:
        os.makedirs(out_dir, exist_ok=True)
        with open(csv_path, "w", newline="") as fh:
            csv.writer(fh).writerow(
                ["epoch", "avg_mean_payoff", "entropy",
                 "actor_loss", "critic_loss"])

    payoff_history = []
    best_ma = -math.inf
    best_ma_epoch = 0
    total_epochs = n_epochs if n_epochs is not None else cfg.max_epochs

    for epoch in range(total_epochs):
        source = provider.source_for_epoch(epoch)
        buffer = collect_epoch(actor, critic, cfg, source, topology,
                               rollout_rng)
        losses = {"actor_loss": float("nan"), "critic_loss": float("nan")}
        size = min(cfg.minibatch_size, len(buffer))
        for _ in range(cfg.updates_per_epoch):
            idx = batch_rng.choice(len(buffer), size=size, replace=False)
            losses = update_step(actor, critic, opt_actor, opt_critic,
                                 buffer, idx, cfg)
        row = {
            "epoch": epoch,
            "avg_mean_payoff": buffer.avg_mean_payoff,
            "entropy": buffer.mean_entropy,
            **losses,
        }
        metrics.append(row)
        if csv_path:
            with open(csv_path, "a", newline="") as fh:
                csv.writer(fh).writerow(
                    [epoch, repr(row["avg_mean_payoff"]), repr(row["entropy"]),
                     repr(row["actor_loss"]), repr(row["critic_loss"])])
        if out_dir and cfg.checkpoint_every and \
                (epoch + 1) % cfg.checkpoint_every == 0:
            save_checkpoint(
                os.path.join(out_dir, f"checkpoint_{epoch + 1:06d}.npz"),
                actor, critic, _config_echo(cfg))

        # early stopping on a payoff-plateau criterion
        payoff_history.append(buffer.avg_mean_payoff)
        if len(payoff_history) >= cfg.early_stop_window:
            ma = float(np.mean(payoff_history[-cfg.early_stop_window:]))
            if ma > best_ma + cfg.early_stop_min_improve:
                best_ma = ma
                best_ma_epoch = epoch
            elif epoch - best_ma_epoch >= cfg.early_stop_patience:
                break

    if out_dir:
        save_checkpoint(os.path.join(out_dir, "checkpoint_final.npz"),
                        actor, critic, _config_echo(cfg))
    return actor, critic, metrics


def _config_echo(cfg: TrainConfig) -> dict:
    echo = asdict(cfg)
    echo["env"]["schedule"] = asdict(cfg.env.schedule) if cfg.env.schedule else None
    return echo

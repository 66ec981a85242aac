"""Permutation-invariant stochastic policy and value networks.

The actor maps an (S+1)-row observation to independent Bernoulli logits
for each solution dimension; the critic maps the same observation to a
scalar value.  Exact (bitwise) permutation invariance is obtained by
canonically sorting the rows lexicographically before any computation,
so that every row order produces the identical tensor program.  The
focal agent is recovered from its self-indicator feature, never from the
row position.

All parameters are float64: small networks, and it makes checkpoints and
gradient checks exact.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, asdict

import numpy as np
import torch
from torch import nn

from .observation import FeatureFlags

_CHECKPOINT_VERSION = 1


@dataclass(frozen=True)
class ArchConfig:
    embed_dim: int = 64
    n_heads: int = 4
    head_hidden: int = 64


def canonical_row_perm(x: torch.Tensor) -> torch.Tensor:
    """Lexicographic sort permutation of rows, feature 0 most significant.

    x is (B, R, F); the result is a (B, R) index tensor.  Identical rows
    may land in either order, which cannot change any downstream value.
    """
    xd = x.detach()
    b, r, f = xd.shape
    perm = torch.arange(r, device=x.device).expand(b, r).contiguous()
    for col in range(f - 1, -1, -1):
        keys = torch.gather(xd[:, :, col], 1, perm)
        order = torch.argsort(keys, dim=1, stable=True)
        perm = torch.gather(perm, 1, order)
    return perm


class SetEncoder(nn.Module):
    """Shared-row MLP + one self-attention block + mean pool, with the
    self row's embedding concatenated to the pooled representation."""

    def __init__(self, n_features: int, indicator_column: int | None,
                 arch: ArchConfig):
        super().__init__()
        d = arch.embed_dim
        self.indicator_column = indicator_column
        self.n_heads = arch.n_heads
        self.embed = nn.Sequential(
            nn.Linear(n_features, d), nn.Tanh(), nn.Linear(d, d), nn.Tanh()
        )
        self.q = nn.Linear(d, d)
        self.k = nn.Linear(d, d)
        self.v = nn.Linear(d, d)
        self.out_dim = 2 * d

    def forward(self, obs: torch.Tensor) -> torch.Tensor:
        perm = canonical_row_perm(obs)
        x = torch.gather(obs, 1, perm.unsqueeze(-1).expand(-1, -1, obs.shape[-1]))
        b, r, _ = x.shape
        h = self.embed(x)
        d = h.shape[-1]
        hd = d // self.n_heads
        q = self.q(h).view(b, r, self.n_heads, hd).transpose(1, 2)
        k = self.k(h).view(b, r, self.n_heads, hd).transpose(1, 2)
        v = self.v(h).view(b, r, self.n_heads, hd).transpose(1, 2)
        att = torch.softmax(q @ k.transpose(-1, -2) / hd**0.5, dim=-1)
        a = (att @ v).transpose(1, 2).reshape(b, r, d)
        h = torch.tanh(h + a)
        pooled = h.mean(dim=1)
        if self.indicator_column is not None:
            self_idx = x[:, :, self.indicator_column].argmax(dim=1)
            self_emb = h[torch.arange(b, device=h.device), self_idx]
        else:
            self_emb = torch.zeros_like(pooled)
        return torch.cat([pooled, self_emb], dim=1)


class Actor(nn.Module):
    def __init__(self, n_loci: int, flags: FeatureFlags = FeatureFlags(),
                 arch: ArchConfig = ArchConfig()):
        super().__init__()
        self.n_loci = n_loci
        self.flags = flags
        self.arch = arch
        n_features = flags.width(n_loci)
        self.encoder = SetEncoder(n_features, flags.indicator_column(n_loci), arch)
        self.head = nn.Sequential(
            nn.Linear(self.encoder.out_dim, arch.head_hidden), nn.Tanh(),
            nn.Linear(arch.head_hidden, 2 * n_loci),
        )
        self.double()

    def forward(self, obs: torch.Tensor) -> torch.Tensor:
        """Logits of shape (B, 2, N): class 0 and class 1 per dimension."""
        return self.head(self.encoder(obs)).view(-1, 2, self.n_loci)

    def bit_probabilities(self, obs) -> np.ndarray:
        """Probability of producing 1 at each dimension, (B, N) numpy."""
        with torch.no_grad():
            logits = self.forward(_to_tensor(obs))
            return torch.softmax(logits, dim=1)[:, 1, :].numpy()


class Critic(nn.Module):
    def __init__(self, n_loci: int, flags: FeatureFlags = FeatureFlags(),
                 arch: ArchConfig = ArchConfig()):
        super().__init__()
        self.n_loci = n_loci
        self.flags = flags
        self.arch = arch
        n_features = flags.width(n_loci)
        self.encoder = SetEncoder(n_features, flags.indicator_column(n_loci), arch)
        self.head = nn.Sequential(
            nn.Linear(self.encoder.out_dim, arch.head_hidden), nn.Tanh(),
            nn.Linear(arch.head_hidden, 1),
        )
        self.double()

    def forward(self, obs: torch.Tensor) -> torch.Tensor:
        return self.head(self.encoder(obs)).squeeze(-1)

    def value(self, obs) -> np.ndarray:
        with torch.no_grad():
            return self.forward(_to_tensor(obs)).numpy()


def bit_probabilities(logits) -> np.ndarray:
    """Normalize a (B, 2, N) or (2, N) logit array to p(bit = 1)."""
    t = torch.as_tensor(np.asarray(logits), dtype=torch.float64)
    if t.ndim == 2:
        t = t[None]
    return torch.softmax(t, dim=-2)[..., 1, :].numpy().squeeze()


def log_prob_of_bits(logits: torch.Tensor, bits: torch.Tensor) -> torch.Tensor:
    """Log-probability of a sampled bit vector under per-dimension logits."""
    logp = torch.log_softmax(logits, dim=1)  # (B, 2, N)
    picked = torch.gather(logp, 1, bits.long().unsqueeze(1)).squeeze(1)
    return picked.sum(dim=1)


def output_entropy(p1) -> np.ndarray:
    """Mean per-dimension Bernoulli entropy in nats, with 0 log 0 = 0."""
    p = np.asarray(p1, dtype=np.float64)
    with np.errstate(divide="ignore", invalid="ignore"):
        h = -np.where(p > 0, p * np.log(p), 0.0) \
            - np.where(p < 1, (1 - p) * np.log1p(-p), 0.0)
    return h.mean(axis=-1)


def entropy_term(logits: torch.Tensor) -> torch.Tensor:
    """Differentiable mean output entropy for the loss, (B,) tensor."""
    logp = torch.log_softmax(logits, dim=1)
    p = logp.exp()
    return -(p * logp).sum(dim=1).mean(dim=1)


def sample_and_correct(p1: np.ndarray, current_bits: np.ndarray,
                       scape, rng) -> tuple[np.ndarray, np.ndarray]:
    """Sample solutions and keep them only when strictly better.

    Batched: p1 and current_bits are (B, N).  Returns (new_state_bits,
    sampled_bits); the raw samples are what the trainer logs as actions.
    """
    sampled = (rng.random(p1.shape) < p1).astype(np.uint8)
    cur_pay = scape.payoff_batch(current_bits)
    new_pay = scape.payoff_batch(sampled)
    better = new_pay > cur_pay
    new_bits = np.where(better[:, None], sampled, current_bits)
    return new_bits.astype(np.uint8), sampled


def save_checkpoint(path, actor: Actor, critic: Critic, train_config: dict | None = None):
    meta = {
        "format_version": _CHECKPOINT_VERSION,
        "n_loci": actor.n_loci,
        "flags": asdict(actor.flags),
        "arch": asdict(actor.arch),
        "train_config": train_config or {},
    }
    arrays = {}
    for prefix, module in (("actor", actor), ("critic", critic)):
        for key, tensor in module.state_dict().items():
            arrays[f"{prefix}.{key}"] = tensor.numpy()
    np.savez(path, meta=np.frombuffer(json.dumps(meta).encode(), dtype=np.uint8),
             **arrays)


def load_checkpoint(path) -> tuple[Actor, Critic, dict]:
    with np.load(path) as data:
        meta = json.loads(bytes(data["meta"]))
        if meta["format_version"] != _CHECKPOINT_VERSION:
            raise ValueError(f"unknown checkpoint format {meta['format_version']}")
        flags = FeatureFlags(**meta["flags"])
        arch = ArchConfig(**meta["arch"])
        actor = Actor(meta["n_loci"], flags, arch)
        critic = Critic(meta["n_loci"], flags, arch)
        for prefix, module in (("actor", actor), ("critic", critic)):
            state = {
                key[len(prefix) + 1:]: torch.from_numpy(data[key])
                for key in data.files if key.startswith(prefix + ".")
            }
            module.load_state_dict(state)
        return actor, critic, meta


def _to_tensor(obs) -> torch.Tensor:
    t = torch.as_tensor(np.asarray(obs), dtype=torch.float64)
    if t.ndim == 2:
        t = t[None]
    return t

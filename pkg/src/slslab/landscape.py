"""Tunably rugged NK payoff landscapes.

A landscape maps an N-bit solution to a payoff in [0, 100].  Each locus
contributes a table value indexed by its own bit and K-1 other dependent
bits; the mean contribution is normalized by the landscape-wide maximum
(found by exhaustive enumeration) and sharpened by a fixed power of 8
before scaling to 100.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

PAYOFF_EXPONENT = 8
PAYOFF_SCALE = 100.0

# Exhaustive normalization enumerates all 2^N states; keep it tractable.
DEFAULT_ENUMERATION_CAP = 25

_FORMAT_VERSION = 1


class LandscapeError(ValueError):
    pass


@dataclass(frozen=True)
class NKLandscape:
    """Immutable NK landscape. Safe for concurrent read access."""

    n_loci: int
    k_inputs: int
    deps: np.ndarray      # (N, K) int64, deps[i][0] == i
    tables: np.ndarray    # (N, 2^K) float64 in [0, 1)
    p_max_raw: float
    seed: int | None = None
    _pow2: np.ndarray = field(init=False, repr=False, compare=False, default=None)

    def __post_init__(self):
        # self bit is the most significant in the table index
        object.__setattr__(
            self, "_pow2", (1 << np.arange(self.k_inputs - 1, -1, -1)).astype(np.int64)
        )

    def raw_payoff(self, bits) -> float:
        """Mean table contribution over loci, in [0, 1)."""
        x = _as_bits(bits, self.n_loci)
        return float(self.raw_payoff_batch(x[None, :])[0])

    def raw_payoff_batch(self, batch: np.ndarray) -> np.ndarray:
        """Vectorized raw payoff for a (B, N) array of bits."""
        if batch.shape[-1] != self.n_loci:
            raise LandscapeError(
                f"solution length {batch.shape[-1]} != N={self.n_loci}"
            )
        idx = batch[:, self.deps].astype(np.int64) @ self._pow2
        vals = self.tables[np.arange(self.n_loci)[None, :], idx]
        return vals.mean(axis=1)

    def payoff(self, bits) -> float:
        """Normalized, sharpened payoff in [0, 100]."""
        x = _as_bits(bits, self.n_loci)
        return float(self.payoff_batch(x[None, :])[0])

    def payoff_batch(self, batch: np.ndarray) -> np.ndarray:
        raw = self.raw_payoff_batch(batch)
        return PAYOFF_SCALE * (raw / self.p_max_raw) ** PAYOFF_EXPONENT

    def global_argmax(self) -> tuple[np.ndarray, float]:
        """Solution attaining p_max_raw; ties broken by lowest encoding."""
        states = enumerate_states(self.n_loci)
        raw = self.raw_payoff_batch(states)
        best = int(np.argmax(raw))  # first occurrence = lowest encoding
        return states[best].copy(), float(raw[best])

    def save(self, path) -> None:
        meta = {
            "format_version": _FORMAT_VERSION,
            "n_loci": self.n_loci,
            "k_inputs": self.k_inputs,
            "seed": self.seed,
        }
        np.savez(
            path,
            meta=np.frombuffer(json.dumps(meta).encode(), dtype=np.uint8),
            deps=self.deps,
            tables=self.tables,
            p_max_raw=np.float64(self.p_max_raw),
        )


def load(path) -> NKLandscape:
    with np.load(path) as data:
        meta = json.loads(bytes(data["meta"]))
        if meta["format_version"] != _FORMAT_VERSION:
            raise LandscapeError(f"unknown landscape format {meta['format_version']}")
        return NKLandscape(
            n_loci=meta["n_loci"],
            k_inputs=meta["k_inputs"],
            deps=data["deps"],
            tables=data["tables"],
            p_max_raw=float(data["p_max_raw"]),
            seed=meta["seed"],
        )


def enumerate_states(n: int) -> np.ndarray:
    """All 2^n bit vectors, row r encoding the integer r (bit 0 most significant)."""
    r = np.arange(1 << n, dtype=np.int64)
    shifts = np.arange(n - 1, -1, -1)
    return ((r[:, None] >> shifts[None, :]) & 1).astype(np.uint8)


def encode(bits: np.ndarray) -> int:
    """Binary-integer encoding matching enumerate_states row order."""
    n = len(bits)
    return int(np.asarray(bits, dtype=np.int64) @ (1 << np.arange(n - 1, -1, -1)))


def generate(
    n_loci: int,
    k_inputs: int,
    seed,
    enumeration_cap: int = DEFAULT_ENUMERATION_CAP,
) -> NKLandscape:
    """Draw a random NK landscape; deterministic for a fixed seed.

    Each locus depends on itself plus K-1 distinct others chosen uniformly.
    Table entries are iid Uniform[0, 1).  The raw maximum is found by
    exhaustive enumeration, which caps N.
    """
    if not 1 <= k_inputs <= n_loci:
        raise LandscapeError(f"need 1 <= K <= N, got K={k_inputs}, N={n_loci}")
    if n_loci > enumeration_cap:
        raise LandscapeError(
            f"N={n_loci} exceeds enumeration cap {enumeration_cap}"
        )
    rng = np.random.default_rng(seed)
    deps = np.empty((n_loci, k_inputs), dtype=np.int64)
    for i in range(n_loci):
        deps[i, 0] = i
        if k_inputs > 1:
            others = np.delete(np.arange(n_loci), i)
            deps[i, 1:] = rng.choice(others, size=k_inputs - 1, replace=False)
    tables = rng.random((n_loci, 1 << k_inputs))
    scape = NKLandscape(
        n_loci=n_loci,
        k_inputs=k_inputs,
        deps=deps,
        tables=tables,
        p_max_raw=1.0,  # placeholder until enumeration below
        seed=seed if isinstance(seed, int) else None,
    )
    raw = scape.raw_payoff_batch(enumerate_states(n_loci))
    object.__setattr__(scape, "p_max_raw", float(raw.max()))
    return scape


def _as_bits(bits, n: int) -> np.ndarray:
    x = np.asarray(bits, dtype=np.uint8)
    if x.ndim != 1 or len(x) != n:
        raise LandscapeError(f"expected a length-{n} bit vector, got shape {x.shape}")
    if np.any(x > 1):
        raise LandscapeError("solution entries must be 0 or 1")
    return x

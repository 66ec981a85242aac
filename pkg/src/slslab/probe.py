"""Strategy diagnosis via payoff-sweep probe templates.

A probe fixes four solution vectors (self, best neighbor, and two more)
and sweeps the neighbor payoffs over all admissible integer tuples.  The
policy's output probabilities at each tuple are summarized as distances
to the template solutions (3D voxel diagrams), raw probability matrices
(2D output diagrams), or region averages that separate copying from
individual exploration.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass

import numpy as np

from .observation import FeatureFlags, build_observation_batch

P_MAX = 100


@dataclass(frozen=True)
class ProbeTemplate:
    kind: str                 # "BI" or "CF"
    x_self: np.ndarray
    x_1: np.ndarray           # best neighbor
    x_2: np.ndarray
    x_3: np.ndarray           # equals x_2 for the CF template

    @property
    def n_loci(self) -> int:
        return len(self.x_self)


def canonical_vectors(n: int):
    """Deterministic template vectors with documented Hamming separations.

    self: all zeros; best: all ones (the complement); second: alternating
    starting with 1; third: zeros then ones, split at floor(N/2).
    """
    if n < 4:
        raise ValueError("need N >= 4 to keep the four template vectors distinct")
    x_self = np.zeros(n, dtype=np.uint8)
    x_1 = np.ones(n, dtype=np.uint8)
    x_2 = (np.arange(n) % 2 == 0).astype(np.uint8)
    x_3 = np.concatenate([np.zeros(n // 2, dtype=np.uint8),
                          np.ones(n - n // 2, dtype=np.uint8)])
    return x_self, x_1, x_2, x_3


def canonical_templates(n: int) -> tuple[ProbeTemplate, ProbeTemplate]:
    """(BI template, CF template) on the canonical vectors."""
    x_self, x_1, x_2, x_3 = canonical_vectors(n)
    bi = ProbeTemplate("BI", x_self, x_1, x_2, x_3)
    cf = ProbeTemplate("CF", x_self, x_1, x_2, x_2)
    return bi, cf


def region_template(n: int) -> ProbeTemplate:
    """BI template variant whose best solution has bits of both values.

    The region analysis partitions dimensions by the best solution's bit,
    so the all-ones canonical best vector is unusable there; the
    alternating vector takes the best role instead.
    """
    x_self, x_1, x_2, x_3 = canonical_vectors(n)
    return ProbeTemplate("BI", x_self, x_2, x_3, x_1)


def enumerate_bi_inputs(p_max: int = P_MAX) -> np.ndarray:
    """All integer triples 0 <= p3 <= p2 <= p1 <= p_max, lexicographic in
    (p1, p2, p3).  Count is (p_max+1)(p_max+2)(p_max+3)/6."""
    out = [
        (p1, p2, p3)
        for p1 in range(p_max + 1)
        for p2 in range(p1 + 1)
        for p3 in range(p2 + 1)
    ]
    return np.array(out, dtype=np.int64)


def enumerate_cf_inputs(p_max: int = P_MAX) -> np.ndarray:
    """All integer pairs 0 <= p2 < p1 <= p_max (p3 = p2 implied),
    lexicographic in (p1, p2).  Count is p_max(p_max+1)/2."""
    out = [(p1, p2) for p1 in range(1, p_max + 1) for p2 in range(p1)]
    return np.array(out, dtype=np.int64)


def template_observations(template: ProbeTemplate, p_0: float,
                          payoff_tuples: np.ndarray,
                          flags: FeatureFlags = FeatureFlags()) -> np.ndarray:
    """Encode one observation per payoff tuple, via the standard encoder."""
    n_rows = len(payoff_tuples)
    n = template.n_loci
    self_bits = np.broadcast_to(template.x_self, (n_rows, n))
    nbr_bits = np.broadcast_to(
        np.stack([template.x_1, template.x_2, template.x_3]), (n_rows, 3, n)
    )
    if payoff_tuples.shape[1] == 2:  # CF sweep: p3 = p2
        payoff_tuples = np.column_stack(
            [payoff_tuples, payoff_tuples[:, 1]])
    return build_observation_batch(
        np.ascontiguousarray(self_bits),
        np.full(n_rows, float(p_0)),
        np.ascontiguousarray(nbr_bits),
        payoff_tuples.astype(np.float64),
        flags,
    )


def strategy_distances(p1_probs: np.ndarray, template: ProbeTemplate):
    """Normalized Euclidean distances (d_self, d_second, d_best)."""
    probs = np.asarray(p1_probs, dtype=np.float64)
    if probs.shape[-1] != template.n_loci:
        raise ValueError("probability vector length mismatch")

    def dist(target):
        return np.sqrt(((probs - target) ** 2).sum(axis=-1) / template.n_loci)

    return dist(template.x_self), dist(template.x_2), dist(template.x_1)


def voxel_color(d_self, d_second, d_best):
    """(r, g, b, a) face color: channel = closeness, opacity peaks when
    the output matches any template solution exactly."""
    d_self = np.asarray(d_self, dtype=np.float64)
    d_second = np.asarray(d_second, dtype=np.float64)
    d_best = np.asarray(d_best, dtype=np.float64)
    dmin = np.minimum(np.minimum(d_self, d_second), d_best)
    return 1.0 - d_self, 1.0 - d_second, 1.0 - d_best, 0.3 * (1.0 - dmin) ** 2


def output_diagram(policy, template: ProbeTemplate, p_0: float,
                   flags: FeatureFlags = FeatureFlags(),
                   p_max: int = P_MAX,
                   chunk: int = 8192) -> tuple[np.ndarray, np.ndarray]:
    """(payoff tuples, probability matrix) for the full payoff sweep."""
    tuples = (enumerate_bi_inputs(p_max) if template.kind == "BI"
              else enumerate_cf_inputs(p_max))
    obs = template_observations(template, p_0, tuples, flags)
    rows = [policy.bit_probabilities(obs[i:i + chunk])
            for i in range(0, len(obs), chunk)]
    return tuples, np.concatenate(rows, axis=0)


def voxel_diagram(policy, template: ProbeTemplate, p_0: float,
                  stride: int = 5, flags: FeatureFlags = FeatureFlags(),
                  p_max: int = P_MAX) -> dict:
    """Strided payoff sweep with distance-based colors per voxel."""
    tuples = enumerate_bi_inputs(p_max)
    keep = np.all(tuples % stride == 0, axis=1)
    tuples = tuples[keep]
    obs = template_observations(template, p_0, tuples, flags)
    probs = np.asarray(policy.bit_probabilities(obs))
    d_self, d_second, d_best = strategy_distances(probs, template)
    r, g, b, a = voxel_color(d_self, d_second, d_best)
    return {
        "p1": tuples[:, 0], "p2": tuples[:, 1], "p3": tuples[:, 2],
        "d_self": d_self, "d_second": d_second, "d_best": d_best,
        "r": r, "g": g, "b": b, "a": a,
    }


def region_averages(policy, n_loci: int,
                    flags: FeatureFlags = FeatureFlags(),
                    p_max: int = P_MAX,
                    template: ProbeTemplate | None = None,
                    sample_rng=None, n_samples: int = 0):
    """Four-region mean output probability over the (p0, p1) square.

    Regions partition (dimension, payoff pair): I/II are the non-best /
    best dimensions when p0 >= p1; III/IV the same split when p0 < p1.
    With ``sample_rng`` set, probabilities are estimated by drawing
    ``n_samples`` solutions per input instead of reading them directly.
    """
    template = template or region_template(n_loci)
    best_bits = template.x_1.astype(bool)
    if best_bits.all() or not best_bits.any():
        raise ValueError("region analysis needs a best solution with mixed bits")
    p0s, p1s = np.meshgrid(np.arange(p_max + 1), np.arange(p_max + 1),
                           indexing="ij")
    p0_flat = p0s.ravel().astype(np.float64)
    tuples = np.column_stack(
        [p1s.ravel(), np.zeros(p1s.size, np.int64), np.zeros(p1s.size, np.int64)]
    )
    obs = _observations_varying_p0(template, p0_flat, tuples, flags)
    probs_chunks = []
    for i in range(0, len(obs), 8192):
        p = np.asarray(policy.bit_probabilities(obs[i:i + 8192]))
        if sample_rng is not None:
            p = (sample_rng.random((n_samples,) + p.shape) < p).mean(axis=0)
        probs_chunks.append(p)
    probs = np.concatenate(probs_chunks, axis=0)

    ge = p0_flat >= tuples[:, 0]
    lt = ~ge
    avg = lambda rows, dims: float(probs[np.ix_(rows, dims)].mean())
    return (
        avg(ge, ~best_bits), avg(ge, best_bits),
        avg(lt, ~best_bits), avg(lt, best_bits),
    )


def _observations_varying_p0(template, p0_flat, tuples, flags):
    n_rows = len(tuples)
    n = template.n_loci
    self_bits = np.broadcast_to(template.x_self, (n_rows, n))
    nbr_bits = np.broadcast_to(
        np.stack([template.x_1, template.x_2, template.x_3]), (n_rows, 3, n))
    return build_observation_batch(
        np.ascontiguousarray(self_bits), p0_flat,
        np.ascontiguousarray(nbr_bits), tuples.astype(np.float64), flags)


# ---------------------------------------------------------------------------
# export

_SCHEMA_VERSION = 1


def export_voxels(voxels: dict, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["p3", "p2", "p1", "r", "g", "b", "a"])
        for i in range(len(voxels["p1"])):
            w.writerow([voxels["p3"][i], voxels["p2"][i], voxels["p1"][i],
                        repr(float(voxels["r"][i])), repr(float(voxels["g"][i])),
                        repr(float(voxels["b"][i])), repr(float(voxels["a"][i]))])


def export_output_diagram(tuples: np.ndarray, probs: np.ndarray, path) -> None:
    n = probs.shape[1]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        payoff_cols = ["p1", "p2", "p3"][: tuples.shape[1]]
        w.writerow(payoff_cols + [f"prob_{d}" for d in range(n)])
        for row_t, row_p in zip(tuples, probs):
            w.writerow(list(row_t) + [repr(float(v)) for v in row_p])


def export_regions(regions, path) -> None:
    names = ["region_I", "region_II", "region_III", "region_IV"]
    payload = {"schema_version": _SCHEMA_VERSION,
               **{k: float(v) for k, v in zip(names, regions)}}
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2)

"""Loaders for the documented export schemas.

Every figure consumes one of five file formats produced by the experiment
tooling. Each loader validates the columns it needs and raises
:class:`SchemaError` with the offending path on mismatch; colors and
probabilities are taken verbatim, never re-mapped.
"""

from __future__ import annotations

import csv
import json

import numpy as np


class SchemaError(ValueError):
    """An input file does not match its documented schema."""


def _read_csv(path, required):
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        missing = [c for c in required if c not in header]
        if missing:
            raise SchemaError(f"{path}: missing columns {missing}")
        rows = list(reader)
    if not rows:
        raise SchemaError(f"{path}: no data rows")
    return header, rows


def _columns(rows, names):
    return {name: np.array([float(r[name]) for r in rows]) for name in names}


def load_voxels(path) -> dict:
    """Voxel export: p3,p2,p1 integer coordinates plus rgba face colors."""
    cols = ["p3", "p2", "p1", "r", "g", "b", "a"]
    _, rows = _read_csv(path, cols)
    data = _columns(rows, cols)
    for axis in ("p3", "p2", "p1"):
        data[axis] = data[axis].astype(np.int64)
    return data


def load_output_diagram(path) -> tuple[np.ndarray, np.ndarray]:
    """Output-diagram export: payoff tuple columns + prob_0..prob_{N-1}."""
    header, rows = _read_csv(path, ["p1", "p2"])
    prob_names = [c for c in header if c.startswith("prob_")]
    if not prob_names:
        raise SchemaError(f"{path}: no prob_* columns")
    prob_names.sort(key=lambda c: int(c.split("_")[1]))
    tuple_names = [c for c in ("p1", "p2", "p3") if c in header]
    data = _columns(rows, tuple_names + prob_names)
    tuples = np.column_stack([data[c] for c in tuple_names]).astype(np.int64)
    probs = np.column_stack([data[c] for c in prob_names])
    return tuples, probs


def load_curve(path) -> dict:
    """Payoff curve export: step, mean_payoff, sem."""
    _, rows = _read_csv(path, ["step", "mean_payoff", "sem"])
    data = _columns(rows, ["step", "mean_payoff", "sem"])
    data["step"] = data["step"].astype(np.int64)
    return data


def load_metrics(path) -> dict:
    """Training metrics export: epoch, avg_mean_payoff, entropy."""
    _, rows = _read_csv(path, ["epoch", "avg_mean_payoff", "entropy"])
    data = _columns(rows, ["epoch", "avg_mean_payoff", "entropy"])
    data["epoch"] = data["epoch"].astype(np.int64)
    return data


def load_regions(path) -> dict:
    """Region-average export: JSON with region_I..region_IV."""
    with open(path) as fh:
        payload = json.load(fh)
    names = ["region_I", "region_II", "region_III", "region_IV"]
    missing = [n for n in names if n not in payload]
    if missing:
        raise SchemaError(f"{path}: missing keys {missing}")
    return {n: float(payload[n]) for n in names}

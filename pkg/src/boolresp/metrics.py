"""Comparing attribution maps with ground-truth responsibility."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

Z95 = 1.96


def normalize(a) -> np.ndarray:
    """Absolute values scaled to sum to one; uniform if all zero."""
    a = np.abs(np.asarray(a, dtype=float))
    if not np.all(np.isfinite(a)):
        raise ValueError("attribution contains non-finite values")
    total = a.sum()
    if total == 0:
        return np.full(len(a), 1.0 / len(a))
    return a / total


def _kl2(p: np.ndarray, m: np.ndarray) -> float:
    nz = p > 0
    return float(np.sum(p[nz] * np.log2(p[nz] / m[nz])))


def jsd(p, q) -> float:
    """Jensen-Shannon divergence in bits, in [0, 1]."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    if p.shape != q.shape:
        raise ValueError(f"length mismatch: {p.shape} vs {q.shape}")
    m = 0.5 * (p + q)
    value = 0.5 * (_kl2(p, m) + _kl2(q, m))
    return min(max(value, 0.0), 1.0)


def topk_perfect_overlap(a, gt) -> bool:
    """True when the |support(gt)| largest ``|a|`` are exactly gt's support.

    Ties across the cut count as failure.
    """
    scores = np.abs(np.asarray(a, dtype=float))
    truth = np.asarray([float(v) for v in gt])
    if scores.shape != truth.shape:
        raise ValueError("width mismatch")
    relevant = truth > 0
    if not relevant.any():
        raise ValueError("ground truth has no relevant position")
    if relevant.all():
        return True
    return bool(scores[relevant].min() > scores[~relevant].max())


@dataclass(frozen=True)
class AggregateStat:
    mean: float
    std: float
    ci95_half_width: float
    n: int


def aggregate(xs: Sequence[float]) -> AggregateStat:
    xs = np.asarray(xs, dtype=float)
    n = len(xs)
    if n == 0:
        raise ValueError("cannot aggregate an empty list")
    mean = float(xs.mean())
    std = float(xs.std(ddof=1)) if n > 1 else 0.0
    return AggregateStat(mean, std, Z95 * std / math.sqrt(n), n)

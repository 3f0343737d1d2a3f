"""Shapley-value and random attribution baselines.

The cooperative game is played over the classifier's relevant positions.
With the default ``"mask"`` payoff a coalition is worth 1 when showing only
its positions (everything else of the game masked) reproduces the original
label.  The ``"completion"`` payoff instead scores the fraction of Boolean
completions of the hidden positions that keep the label.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from .formula import to_masks
from .oracle import Oracle, label_code

SHAPLEY_GUARD = 20
PAYOFFS = ("mask", "completion")


def _players(oracle: Oracle, players) -> list:
    return sorted(oracle.relevant if players is None else players)


def _global_masks(codes: np.ndarray, players: Sequence[int]) -> np.ndarray:
    """Map local coalition codes to global position bitmasks."""
    out = np.zeros(codes.shape, dtype=np.uint64)
    for j, p in enumerate(players):
        out |= ((codes >> np.uint64(j)) & np.uint64(1)) << np.uint64(p)
    return out


def _popcount(codes: np.ndarray) -> np.ndarray:
    counts = np.zeros(codes.shape, dtype=np.int64)
    c = codes.astype(np.uint64)
    while c.any():
        counts += (c & np.uint64(1)).astype(np.int64)
        c >>= np.uint64(1)
    return counts


def _mask_values(oracle: Oracle, x, players, codes) -> np.ndarray:
    """Payoff of each coalition code: 1 when the label survives, else 0."""
    expected = label_code(oracle(x))
    outside = ((1 << len(x)) - 1) & ~int(_global_masks(np.array([(1 << len(players)) - 1], dtype=np.uint64), players)[0])
    keep = _global_masks(codes, players) | np.uint64(outside)
    return (oracle.mutant_codes(x, keep) == expected).astype(np.int64)


def _completion_table(oracle: Oracle, x, players) -> np.ndarray:
    """Payoff for every coalition: share of completions keeping the label."""
    m = len(players)
    expected = label_code(oracle(x))
    val, _ = to_masks(x)
    flips = np.arange(1 << m, dtype=np.uint64)
    values = np.uint64(val) ^ _global_masks(flips, players)
    g = (oracle.boolean_codes(values) == expected).astype(float)
    # subset sums: F[T] = sum of g[d] over flip patterns d inside T
    F = g.copy()
    for j in range(m):
        view = F.reshape(-1, 2, 1 << j)
        view[:, 1, :] += view[:, 0, :]
    full = (1 << m) - 1
    coalitions = np.arange(1 << m, dtype=np.int64)
    hidden = full ^ coalitions
    return F[hidden] / np.exp2(m - _popcount(coalitions.astype(np.uint64)))


def shapley_exact(
    oracle: Oracle,
    x: Sequence,
    payoff: str = "mask",
    players: Optional[Sequence[int]] = None,
    exact: bool = False,
):
    """Exact Shapley values by enumerating every coalition.

    Returns a float array over all positions (non-players get 0), or a
    list of Fractions with ``exact=True`` (``"mask"`` payoff only).
    """
    players = _players(oracle, players)
    m = len(players)
    if m > SHAPLEY_GUARD:
        raise ValueError(f"{m} players exceed the exact Shapley guard of {SHAPLEY_GUARD}")
    width = len(x)
    if m == 0:
        return [Fraction(0)] * width if exact else np.zeros(width)
    codes = np.arange(1 << m, dtype=np.uint64)
    sizes = _popcount(codes)
    if payoff == "mask":
        v = _mask_values(oracle, x, players, codes)
        # integer weights |S|! (m - |S| - 1)!, normalised by m! at the end
        weights = np.array([math.factorial(s) * math.factorial(m - s - 1) for s in range(m)], dtype=np.int64)
    elif payoff == "completion":
        if exact:
            raise ValueError("exact rationals are only available for the mask payoff")
        v = _completion_table(oracle, x, players)
        weights = np.array([math.factorial(s) * math.factorial(m - s - 1) for s in range(m)], dtype=float)
    else:
        raise ValueError(f"unknown payoff {payoff!r}")
    idx = np.arange(1 << m, dtype=np.int64)
    numerators = []
    for j in range(m):
        bit = 1 << j
        without = idx[(idx & bit) == 0]
        numerators.append((weights[sizes[without]] * (v[without | bit] - v[without])).sum())
    norm = math.factorial(m)
    if exact:
        out = [Fraction(0)] * width
        for p, num in zip(players, numerators):
            out[p] = Fraction(int(num), norm)
        return out
    out = np.zeros(width)
    for p, num in zip(players, numerators):
        out[p] = float(num) / norm
    return out


def shapley_sampled(
    oracle: Oracle,
    x: Sequence,
    num_permutations: int,
    rng: np.random.Generator,
    payoff: str = "mask",
    players: Optional[Sequence[int]] = None,
) -> np.ndarray:
    """Permutation-sampling estimate of the same game."""
    if num_permutations < 1:
        raise ValueError("num_permutations must be at least 1")
    players = _players(oracle, players)
    m = len(players)
    width = len(x)
    out = np.zeros(width)
    if m == 0:
        return out
    perms = np.array([rng.permutation(m) for _ in range(num_permutations)], dtype=np.int64)
    # prefix coalitions of every permutation, as local codes
    steps = np.zeros((num_permutations, m + 1), dtype=np.uint64)
    for k in range(m):
        steps[:, k + 1] = steps[:, k] | (np.uint64(1) << perms[:, k].astype(np.uint64))
    if payoff == "mask":
        flat = np.unique(steps)
        v_flat = _mask_values(oracle, x, players, flat)
        v = v_flat[np.searchsorted(flat, steps)].astype(float)
    elif payoff == "completion":
        v = _completion_table(oracle, x, players)[steps.astype(np.int64)]
    else:
        raise ValueError(f"unknown payoff {payoff!r}")
    marginal = np.diff(v, axis=1)
    local = np.zeros(m)
    np.add.at(local, perms, marginal)
    out[players] = local / num_permutations
    return out


def random_attribution(width: int, rng: np.random.Generator) -> np.ndarray:
    return rng.random(width)

"""B-ReX: approximate responsibility from classifier queries only.

The input positions are split into blocks.  A block is causal when some set
of *other* blocks can be masked without changing the label while masking the
block as well does change it (an undetermined label counts as a change).
Each position of a causal block gets ``1 / (1 + k)`` with ``k`` the number
of blocks masked so far (ancestors plus the smallest such set), and causal
blocks are split again.  Results are averaged over restarts with different
random partitions; later restarts partition by the running average so that
positions already found responsible are spread across blocks.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import asdict, dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .formula import to_bits
from .oracle import UNDETERMINED, Oracle, label_code

_EPS = 1e-12


@dataclass(frozen=True)
class BrexConfig:
    num_blocks: int = 4
    restarts: int = 20
    call_budget: Optional[int] = None
    seed: int = 0
    min_block_to_recurse: int = 2
    recurse: bool = True
    adaptive_weights: bool = True

    def __post_init__(self):
        if self.num_blocks < 2:
            raise ValueError("num_blocks must be at least 2")
        if self.restarts < 1:
            raise ValueError("restarts must be at least 1")
        if self.call_budget is not None and self.call_budget < 1:
            raise ValueError("call_budget must be positive")


class _BudgetExhausted(Exception):
    pass


def partition(indices: Sequence[int], weights, m: int, rng: np.random.Generator) -> list:
    """Split ``indices`` into at most ``m`` disjoint non-empty blocks.

    Indices are drawn without replacement with probability proportional to
    ``|weights|`` (uniform when those are all zero) and appended to the open
    block until its share of the total weight reaches ``1/m``.  Zero-weight
    indices come last, in random order; the final block takes the rest.
    """
    idx = np.asarray(sorted(indices), dtype=np.int64)
    if len(idx) == 0:
        raise ValueError("cannot partition an empty index set")
    m = min(m, len(idx))
    w = np.abs(np.asarray(weights, dtype=float)[idx])
    total = w.sum()
    if not np.isfinite(total) or total <= 0:
        w = np.full(len(idx), 1.0 / len(idx))
    else:
        w = w / total
    positive = w > 0
    order = np.concatenate([
        rng.choice(idx[positive], size=int(positive.sum()), replace=False, p=w[positive] / w[positive].sum()),
        rng.permutation(idx[~positive]),
    ])
    share = dict(zip(idx.tolist(), w.tolist()))
    blocks: list = []
    current: list = []
    acc = 0.0
    for i in order.tolist():
        current.append(i)
        acc += share[i]
        if len(blocks) < m - 1 and acc >= 1.0 / m - _EPS:
            blocks.append(tuple(sorted(current)))
            current, acc = [], 0.0
    if current:
        blocks.append(tuple(sorted(current)))
    return blocks


def _bits(block) -> int:
    out = 0
    for i in block:
        out |= 1 << i
    return out


def _smallest_witness(label: Callable[[int], int], masks: list, target: int, keep: int, expected: int):
    """Indices into ``masks`` of the smallest set of blocks to hide, or None.

    ``keep`` is everything visible before hiding anything.
    """
    others = [j for j in range(len(masks)) if j != target]
    tmask = masks[target]
    for k in range(len(others) + 1):
        for combo in itertools.combinations(others, k):
            hidden = 0
            for j in combo:
                hidden |= masks[j]
            visible = keep & ~hidden
            if label(visible) != expected:
                continue
            if label(visible & ~tmask) != expected:
                return combo
    return None


def find_witness_blocks(oracle: Oracle, x: Sequence, blocks: Sequence, target, outside_keep=()) -> Optional[tuple]:
    """Smallest set of other blocks whose masking makes ``target`` decisive.

    Returns the blocks to mask (possibly empty), or None when ``target`` is
    not causal.  Positions outside all blocks stay visible only if listed in
    ``outside_keep``.
    """
    blocks = [tuple(b) for b in blocks]
    t = blocks.index(tuple(target))
    probe = oracle.prober(x)
    expected = label_code(oracle(x))
    masks = [_bits(b) for b in blocks]
    keep = _bits(outside_keep)
    for mk in masks:
        keep |= mk
    found = _smallest_witness(probe, masks, t, keep, expected)
    return None if found is None else tuple(blocks[j] for j in found)


def brex_explain(oracle: Oracle, x: Sequence, config: BrexConfig = BrexConfig()) -> np.ndarray:
    """Approximate responsibility of every position of ``x``.

    Repeated queries on the same mutant are answered from a cache, so
    ``oracle.calls`` counts distinct mutants.  With ``call_budget`` set the
    search stops once that many queries were made and the estimate
    collected so far is returned.
    """
    n = len(x)
    probe = oracle.prober(x)
    memo: dict = {}
    used = [0]

    def label(keep: int) -> int:
        hit = memo.get(keep)
        if hit is not None:
            return hit
        if config.call_budget is not None and used[0] >= config.call_budget:
            raise _BudgetExhausted
        used[0] += 1
        code = probe(keep)
        memo[keep] = code
        return code

    full = (1 << n) - 1
    expected = label(full)
    if expected == UNDETERMINED:
        raise ValueError("the unmasked input has no determinate label")

    total = np.zeros(n)
    done = 0
    rho = np.zeros(n)

    def refine(region: tuple, keep: int, ctx: int, rng, weights):
        blocks = partition(region, weights if weights is not None else rho, config.num_blocks, rng)
        masks = [_bits(b) for b in blocks]
        found = []
        for t, block in enumerate(blocks):
            combo = _smallest_witness(label, masks, t, keep, expected)
            idx = list(block)
            if combo is None:
                rho[idx] = 0.0
            else:
                rho[idx] = 1.0 / (1 + ctx + len(combo))
            found.append(combo)
        if not config.recurse:
            return
        for t, block in enumerate(blocks):
            combo = found[t]
            if combo is None or len(block) < config.min_block_to_recurse:
                continue
            hidden = 0
            for j in combo:
                hidden |= masks[j]
            refine(block, keep & ~hidden, ctx + len(combo), rng, weights)

    try:
        for r in range(config.restarts):
            rng = np.random.default_rng([config.seed, r])
            rho = np.zeros(n)
            weights = total / done if config.adaptive_weights and done else None
            refine(tuple(range(n)), full, 0, rng, weights)
            total += rho
            done += 1
    except _BudgetExhausted:
        if done == 0 or rho.any():
            total += rho
            done += 1
    return total / done


def explanation_record(formula_id: str, x: Sequence, estimates, oracle_calls: int, config, seed: int) -> dict:
    return {
        "formula_id": formula_id,
        "assignment": to_bits(x),
        "estimates": [float(v) for v in estimates],
        "oracle_calls": int(oracle_calls),
        "config": asdict(config) if hasattr(config, "__dataclass_fields__") else dict(config),
        "seed": int(seed),
    }


def dump_explanation(record: dict) -> str:
    return json.dumps(record, sort_keys=True)

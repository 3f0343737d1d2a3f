"""Exact degree of responsibility of each variable for a formula's value.

Read-once formulae use two linear passes over the parse tree: a bottom-up
pass computing, per node, the fewest leaf flips that change the node's value,
and a top-down pass handing each leaf the witness size accumulated on the
way down.  Everything else goes through an exhaustive search over the
formula's truth table.
"""

from __future__ import annotations

import csv
import enum
import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional, Sequence

import numpy as np

from . import kernels
from .formula import (
    And,
    Binary,
    Formula,
    Not,
    Or,
    Var,
    Xor,
    compile_formula,
    evaluate_k3,
    mask,
    meta,
    to_bits,
)

BRUTE_FORCE_GUARD = 15


class CauseKind(enum.Enum):
    BOTH = "both"
    EITHER = "either"
    LEFT = "left"
    RIGHT = "right"
    PASS = "pass"


class NotReadOnce(ValueError):
    pass


class GuardExceeded(ValueError):
    pass


_ZERO = Fraction(0)
_UNIT = [Fraction(1, k + 1) for k in range(64)]


def _unit(k: int) -> Fraction:
    return _UNIT[k] if k < len(_UNIT) else Fraction(1, k + 1)


@dataclass(frozen=True)
class ResponsibilityMap:
    """Exact per-position responsibilities."""

    values: tuple

    @classmethod
    def from_witness_sizes(cls, width: int, sizes: dict) -> "ResponsibilityMap":
        """``sizes`` maps position to smallest witness size (None: not a cause)."""
        vals = [_ZERO] * width
        for i, k in sizes.items():
            if k is not None:
                vals[i] = _unit(k)
        return cls(tuple(vals))

    def __len__(self):
        return len(self.values)

    def __iter__(self):
        return iter(self.values)

    def __getitem__(self, i):
        return self.values[i]

    def to_array(self) -> np.ndarray:
        return np.array([float(v) for v in self.values])

    def support(self) -> frozenset:
        return frozenset(i for i, v in enumerate(self.values) if v > 0)


_BINARY_FN = {
    And: lambda a, b: a and b,
    Or: lambda a, b: a or b,
    Xor: lambda a, b: a != b,
}


def classify_cause(op, left_val: bool, right_val: Optional[bool] = None, gate_val: Optional[bool] = None) -> CauseKind:
    """Which children a gate's value hinges on.

    Single-child flips are checked before the joint flip, so a gate that
    changes under either single flip is EITHER even though flipping both
    children may change it too.
    """
    if op is Not:
        return CauseKind.PASS
    fn = _BINARY_FN[op]
    if gate_val is None:
        gate_val = fn(left_val, right_val)
    left_flip = fn(not left_val, right_val) != gate_val
    right_flip = fn(left_val, not right_val) != gate_val
    if left_flip and right_flip:
        return CauseKind.EITHER
    if left_flip:
        return CauseKind.LEFT
    if right_flip:
        return CauseKind.RIGHT
    if fn(not left_val, not right_val) != gate_val:
        return CauseKind.BOTH
    raise AssertionError("unreachable for Boolean gates")  # pragma: no cover


@dataclass
class _Node:
    value: bool
    deps: int
    kind: Optional[CauseKind]


class DepsMap(dict):
    """Maps ``id(node)`` to its annotation; ``root`` holds the root's."""

    root: _Node

    def of(self, node) -> int:
        return self[id(node)].deps


def _check_read_once(f: Formula, a: Sequence) -> None:
    m = meta(f)
    if not m.read_once:
        raise NotReadOnce("formula repeats a variable; use the brute-force path")
    for i in m.used_vars:
        if a[i] is None:
            raise ValueError(f"position {i} is unassigned")


def depends(f: Formula, a: Sequence, counter: Optional[dict] = None) -> DepsMap:
    """Bottom-up pass: fewest leaf flips that change each node's value."""
    _check_read_once(f, a)
    deps = DepsMap()

    def visit(node) -> _Node:
        if counter is not None:
            counter["visits"] = counter.get("visits", 0) + 1
        if isinstance(node, Var):
            info = _Node(bool(a[node.index]), 1, None)
        elif isinstance(node, Not):
            child = visit(node.child)
            info = _Node(not child.value, child.deps, CauseKind.PASS)
        else:
            left, right = visit(node.left), visit(node.right)
            value = _BINARY_FN[type(node)](left.value, right.value)
            kind = classify_cause(type(node), left.value, right.value, value)
            if kind is CauseKind.BOTH:
                d = left.deps + right.deps
            elif kind is CauseKind.EITHER:
                d = min(left.deps, right.deps)
            elif kind is CauseKind.LEFT:
                d = left.deps
            else:
                d = right.deps
            info = _Node(value, d, kind)
        deps[id(node)] = info
        return info

    deps.root = visit(f)
    return deps


def responsibility_read_once(
    f: Formula,
    a: Sequence,
    deps: Optional[DepsMap] = None,
    counter: Optional[dict] = None,
) -> ResponsibilityMap:
    """Top-down pass distributing responsibility to the leaves."""
    if deps is None:
        deps = depends(f, a, counter)
    sizes: dict = {}

    def visit(node, ctx: int):
        if counter is not None:
            counter["visits"] = counter.get("visits", 0) + 1
        if isinstance(node, Var):
            sizes[node.index] = ctx
            return
        kind = deps[id(node)].kind
        if kind is CauseKind.PASS:
            visit(node.child, ctx)
        elif kind is CauseKind.LEFT:
            visit(node.left, ctx)
        elif kind is CauseKind.RIGHT:
            visit(node.right, ctx)
        elif kind is CauseKind.EITHER:
            visit(node.left, ctx)
            visit(node.right, ctx)
        else:
            visit(node.left, ctx + deps.of(node.right))
            visit(node.right, ctx + deps.of(node.left))

    visit(f, 0)
    return ResponsibilityMap.from_witness_sizes(len(a), sizes)


# --------------------------------------------------------------------------
# brute force


class TruthTable:
    """Classical truth table of a formula over its used variables."""

    def __init__(self, f: Formula, guard: Optional[int] = BRUTE_FORCE_GUARD):
        self.formula = f
        self.program = compile_formula(f)
        if guard is not None and self.program.arity > guard:
            raise GuardExceeded(f"arity {self.program.arity} exceeds brute-force guard {guard}")
        self.table = kernels.truth_table(self.program)

    @property
    def used(self) -> tuple:
        return self.program.used

    def local_code(self, a: Sequence) -> int:
        code = 0
        for j, v in enumerate(self.used):
            if a[v] is None:
                raise ValueError(f"position {v} is unassigned")
            if a[v]:
                code |= 1 << j
        return code

    def witness_sizes(self, a: Sequence, strict: bool = True) -> dict:
        sizes = kernels.witness_sizes(self.table, self.program.arity, self.local_code(a), strict)
        return {v: (int(k) if k >= 0 else None) for v, k in zip(self.used, sizes)}

    def responsibility(self, a: Sequence, strict: bool = True) -> ResponsibilityMap:
        return ResponsibilityMap.from_witness_sizes(len(a), self.witness_sizes(a, strict))

    def min_flips(self, a: Sequence) -> int:
        return int(kernels.min_flip_size(self.table, self.program.arity, self.local_code(a)))


def min_flips_brute(f: Formula, a: Sequence, guard: Optional[int] = BRUTE_FORCE_GUARD) -> int:
    """Fewest used-variable flips that change the output (-1 for a constant formula)."""
    return TruthTable(f, guard).min_flips(a)


def responsibility_brute_force(
    f: Formula,
    a: Sequence,
    guard: Optional[int] = BRUTE_FORCE_GUARD,
    strict: bool = True,
    table: Optional[TruthTable] = None,
) -> ResponsibilityMap:
    """Smallest-witness responsibility by exhaustive search of the truth table.

    ``strict=False`` drops the requirement that every subset of the witness
    preserve the output; only the witness itself must.
    """
    if table is None:
        table = TruthTable(f, guard)
    return table.responsibility(a, strict)


def responsibility(f: Formula, a: Sequence, guard: Optional[int] = BRUTE_FORCE_GUARD) -> ResponsibilityMap:
    if meta(f).read_once:
        return responsibility_read_once(f, a)
    return responsibility_brute_force(f, a, guard)


class GroundTruth:
    """Per-formula cache choosing the read-once pass or the truth table."""

    def __init__(self, f: Formula, guard: Optional[int] = BRUTE_FORCE_GUARD, force_brute: bool = False):
        self.formula = f
        self.read_once = meta(f).read_once and not force_brute
        self._table = None if self.read_once else TruthTable(f, guard)

    def __call__(self, a: Sequence) -> ResponsibilityMap:
        if self.read_once:
            return responsibility_read_once(self.formula, a)
        return self._table.responsibility(a)


def responsibility_masking_brute(f: Formula, a: Sequence) -> ResponsibilityMap:
    """Smallest-witness responsibility where intervening means masking.

    A set ``M`` of other variables witnesses ``x`` when masking ``M`` keeps
    the strong Kleene value and masking ``M`` plus ``x`` loses it.  Evaluates
    the formula tree directly, independently of any compiled path.
    """
    out = evaluate_k3(f, a)
    if out is None:
        raise ValueError("assignment leaves the formula undetermined")
    used = sorted(meta(f).used_vars)
    everything = range(len(a))
    sizes: dict = {}
    for x in used:
        others = [v for v in used if v != x]
        sizes[x] = None
        for k in range(len(others) + 1):
            for m in itertools.combinations(others, k):
                hidden = set(m)
                if evaluate_k3(f, mask(a, [i for i in everything if i not in hidden])) != out:
                    continue
                hidden.add(x)
                if evaluate_k3(f, mask(a, [i for i in everything if i not in hidden])) != out:
                    sizes[x] = k
                    break
            if sizes[x] is not None:
                break
    return ResponsibilityMap.from_witness_sizes(len(a), sizes)


# --------------------------------------------------------------------------
# dump


TRUTH_COLUMNS = ["formula_id", "assignment", "var_index", "responsibility_num", "responsibility_den"]


def truth_rows(formula_id: str, a: Sequence, rho: ResponsibilityMap) -> Iterable[list]:
    bits = to_bits(a)
    for i, v in enumerate(rho):
        yield [formula_id, bits, i + 1, v.numerator, v.denominator]


def write_truth_csv(fh, rows: Iterable[list]) -> None:
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(TRUTH_COLUMNS)
    writer.writerows(rows)

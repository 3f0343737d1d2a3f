"""Boolean formulae over indexed variables.

Truth values are ``True``, ``False`` and ``None`` (unassigned).  An assignment
is a tuple of truth values, one per input position; variable ``x<k>`` in
formula text refers to position ``k - 1``.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass
from typing import Iterable, Iterator, Optional, Sequence, Union

import numpy as np

TruthValue = Optional[bool]
Assignment = tuple  # tuple[TruthValue, ...]

UNASSIGNED: TruthValue = None

MONOTONIC = "monotonic"
NONMONOTONIC = "nonmonotonic"
FAMILIES = (MONOTONIC, NONMONOTONIC)

MAX_ENUM_BITS = 20

# opcodes shared with the compiled kernels
OP_VAR, OP_NOT, OP_AND, OP_OR, OP_XOR = 0, 1, 2, 3, 4


class FormulaSyntaxError(ValueError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} at position {position}")
        self.position = position


# --------------------------------------------------------------------------
# tree


@dataclass(frozen=True)
class Var:
    index: int


@dataclass(frozen=True)
class Not:
    child: "Formula"


@dataclass(frozen=True)
class Binary:
    left: "Formula"
    right: "Formula"

    symbol = "?"
    opcode = -1


@dataclass(frozen=True)
class And(Binary):
    symbol = "&"
    opcode = OP_AND


@dataclass(frozen=True)
class Or(Binary):
    symbol = "|"
    opcode = OP_OR


@dataclass(frozen=True)
class Xor(Binary):
    symbol = "^"
    opcode = OP_XOR


Formula = Union[Var, Not, And, Or, Xor]

BINARY_OPS = {"&": And, "|": Or, "^": Xor}


@dataclass(frozen=True)
class FormulaMeta:
    arity: int
    used_vars: frozenset
    read_once: bool


def nodes(f: Formula) -> Iterator[Formula]:
    """Pre-order traversal."""
    stack = [f]
    while stack:
        node = stack.pop()
        yield node
        if isinstance(node, Not):
            stack.append(node.child)
        elif isinstance(node, Binary):
            stack.append(node.right)
            stack.append(node.left)


def size(f: Formula) -> int:
    return sum(1 for _ in nodes(f))


def meta(f: Formula) -> FormulaMeta:
    leaves = [n.index for n in nodes(f) if isinstance(n, Var)]
    used = frozenset(leaves)
    return FormulaMeta(arity=len(used), used_vars=used, read_once=len(used) == len(leaves))


def negate(f: Formula) -> Formula:
    return Not(f)


# --------------------------------------------------------------------------
# text


_TOKEN = re.compile(r"\s*(?:(x\d+)|([&|^!()])|(\S))")


def _tokenize(text: str):
    pos = 0
    tokens = []
    while True:
        m = _TOKEN.match(text, pos)
        if m is None:
            break
        if m.group(3) is not None:
            raise FormulaSyntaxError(f"unexpected character {m.group(3)!r}", m.start(3))
        if m.group(1) is not None:
            tokens.append(("var", m.group(1), m.start(1)))
        else:
            tokens.append((m.group(2), m.group(2), m.start(2)))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str, width: Optional[int]):
        self.tokens = _tokenize(text)
        self.i = 0
        self.width = width

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def parse(self) -> Formula:
        f = self.binary(0)
        kind, _, pos = self.peek()
        if kind != "end":
            raise FormulaSyntaxError(f"unexpected token {kind!r}", pos)
        return f

    # precedence climbs from OR (loosest) to AND (tightest binary)
    _LEVELS = ("|", "^", "&")

    def binary(self, level: int) -> Formula:
        if level == len(self._LEVELS):
            return self.unary()
        symbol = self._LEVELS[level]
        node = self.binary(level + 1)
        while self.peek()[0] == symbol:
            self.take()
            node = BINARY_OPS[symbol](node, self.binary(level + 1))
        return node

    def unary(self) -> Formula:
        kind, text, pos = self.take()
        if kind == "!":
            return Not(self.unary())
        if kind == "(":
            inner = self.binary(0)
            close, _, cpos = self.take()
            if close != ")":
                raise FormulaSyntaxError("expected ')'", cpos)
            return inner
        if kind == "var":
            k = int(text[1:])
            if k < 1:
                raise FormulaSyntaxError(f"variable {text} out of range (1-indexed)", pos)
            if self.width is not None and k > self.width:
                raise FormulaSyntaxError(f"variable {text} exceeds width {self.width}", pos)
            return Var(k - 1)
        what = "end of input" if kind == "end" else repr(text)
        raise FormulaSyntaxError(f"expected operand, got {what}", pos)


def parse(text: str, width: Optional[int] = None) -> Formula:
    """Parse formula text; precedence is ``!`` > ``&`` > ``^`` > ``|``."""
    return _Parser(text, width).parse()


def render(f: Formula) -> str:
    if isinstance(f, Var):
        return f"x{f.index + 1}"
    if isinstance(f, Not):
        return "!" + render(f.child)
    return f"({render(f.left)} {f.symbol} {render(f.right)})"


# --------------------------------------------------------------------------
# evaluation


def _k3_and(a: TruthValue, b: TruthValue) -> TruthValue:
    if a is False or b is False:
        return False
    if a is True and b is True:
        return True
    return None


def _k3_or(a: TruthValue, b: TruthValue) -> TruthValue:
    if a is True or b is True:
        return True
    if a is False and b is False:
        return False
    return None


def _k3_xor(a: TruthValue, b: TruthValue) -> TruthValue:
    if a is None or b is None:
        return None
    return a != b


def _k3_not(a: TruthValue) -> TruthValue:
    return None if a is None else not a


K3_OPS = {And: _k3_and, Or: _k3_or, Xor: _k3_xor}


def evaluate_k3(f: Formula, a: Sequence[TruthValue]) -> TruthValue:
    """Strong Kleene evaluation; classical on fully Boolean assignments."""
    if isinstance(f, Var):
        return a[f.index]
    if isinstance(f, Not):
        return _k3_not(evaluate_k3(f.child, a))
    return K3_OPS[type(f)](evaluate_k3(f.left, a), evaluate_k3(f.right, a))


def evaluate(f: Formula, a: Sequence[bool]) -> bool:
    value = evaluate_k3(f, a)
    if value is None:
        raise ValueError("assignment leaves the formula undetermined")
    return value


# --------------------------------------------------------------------------
# compiled form for the kernels


@dataclass(frozen=True, eq=False)
class Program:
    """Postfix encoding of a formula.

    ``args`` holds global variable indices, ``local_args`` the position of
    each variable within ``used`` (sorted), so truth tables can be indexed
    by ``2 ** arity`` local bitmasks.
    """

    ops: np.ndarray
    args: np.ndarray
    local_args: np.ndarray
    used: tuple

    @property
    def arity(self) -> int:
        return len(self.used)


def compile_formula(f: Formula) -> Program:
    ops: list = []
    args: list = []

    def emit(node):
        # recursion depth equals formula depth, small in practice
        if isinstance(node, Var):
            ops.append(OP_VAR)
            args.append(node.index)
        elif isinstance(node, Not):
            emit(node.child)
            ops.append(OP_NOT)
            args.append(-1)
        else:
            emit(node.left)
            emit(node.right)
            ops.append(node.opcode)
            args.append(-1)

    emit(f)
    used = tuple(sorted({a for a, o in zip(args, ops) if o == OP_VAR}))
    pos = {v: i for i, v in enumerate(used)}
    local = [pos[a] if o == OP_VAR else -1 for a, o in zip(args, ops)]
    return Program(
        ops=np.asarray(ops, dtype=np.int8),
        args=np.asarray(args, dtype=np.int32),
        local_args=np.asarray(local, dtype=np.int32),
        used=used,
    )


# --------------------------------------------------------------------------
# assignments


def to_bits(a: Sequence[TruthValue]) -> str:
    return "".join("U" if v is None else ("1" if v else "0") for v in a)


def from_bits(s: str) -> Assignment:
    table = {"1": True, "0": False, "U": None, "u": None}
    try:
        return tuple(table[c] for c in s.strip())
    except KeyError as exc:
        raise ValueError(f"bad assignment character {exc.args[0]!r} in {s!r}") from None


def to_masks(a: Sequence[TruthValue]) -> tuple:
    """(value bits, known bits) with bit i for position i."""
    val = known = 0
    for i, v in enumerate(a):
        if v is not None:
            known |= 1 << i
            if v:
                val |= 1 << i
    return val, known


def from_masks(val: int, known: int, width: int) -> Assignment:
    return tuple(
        (bool(val >> i & 1) if known >> i & 1 else None) for i in range(width)
    )


def _from_code(code: int, positions: Sequence[int], width: int) -> Assignment:
    # first position is the most significant bit, matching lexicographic order
    out = [False] * width
    k = len(positions)
    for j, p in enumerate(positions):
        out[p] = bool(code >> (k - 1 - j) & 1)
    return tuple(out)


def enumerate_assignments(width: int, used_vars: Optional[Iterable[int]] = None) -> Iterator[Assignment]:
    """All Boolean assignments in lexicographic order (FF..F first).

    With ``used_vars`` only those positions vary; the rest stay False.
    """
    positions = list(range(width)) if used_vars is None else sorted(used_vars)
    if len(positions) > MAX_ENUM_BITS:
        raise ValueError(f"refusing to enumerate 2^{len(positions)} assignments (max 2^{MAX_ENUM_BITS})")
    if any(p < 0 or p >= width for p in positions):
        raise ValueError("used variable outside the input width")
    for code in range(1 << len(positions)):
        yield _from_code(code, positions, width)


def sample_assignments(width: int, used_vars: Optional[Iterable[int]], n: int, rng: np.random.Generator) -> list:
    """Seeded uniform sample without replacement, returned in lexicographic order."""
    positions = list(range(width)) if used_vars is None else sorted(used_vars)
    if len(positions) > 62:
        raise ValueError("too many free positions to sample")
    total = 1 << len(positions)
    if n >= total:
        return list(enumerate_assignments(width, used_vars))
    codes = np.sort(rng.choice(total, size=n, replace=False))
    return [_from_code(int(c), positions, width) for c in codes]


def flip(a: Sequence[TruthValue], s: Iterable[int]) -> Assignment:
    out = list(a)
    for i in s:
        if out[i] is None:
            raise ValueError(f"cannot flip unassigned position {i}")
        out[i] = not out[i]
    return tuple(out)


def mask(a: Sequence[TruthValue], keep: Iterable[int]) -> Assignment:
    keep = set(keep)
    return tuple(v if i in keep else None for i, v in enumerate(a))


# --------------------------------------------------------------------------
# random generation


@dataclass(frozen=True)
class GeneratorParams:
    negate_prob: float = 0.25
    duplicate_prob: float = 0.3


def _operators(family: str):
    if family == MONOTONIC:
        return (And, Or)
    if family == NONMONOTONIC:
        return (And, Or, Xor)
    raise ValueError(f"unknown family {family!r}")


def random_formula(
    arity: int,
    family: str,
    read_once: bool,
    rng: np.random.Generator,
    width: int = 12,
    params: GeneratorParams = GeneratorParams(),
) -> Formula:
    """Random formula over exactly ``arity`` distinct variables out of ``width``.

    The variable multiset is shuffled and split at a uniform point, recursively;
    each split is joined by a uniformly drawn operator of the family.  In the
    nonmonotonic family every subtree is negated with ``params.negate_prob``.
    Without ``read_once`` each variable is duplicated with
    ``params.duplicate_prob`` first, and constant formulae are redrawn.
    """
    if not 1 <= arity <= width:
        raise ValueError(f"arity {arity} outside [1, {width}]")
    operators = _operators(family)
    negating = family == NONMONOTONIC

    def build(items):
        if len(items) == 1:
            node = Var(int(items[0]))
        else:
            items = rng.permutation(items)
            cut = int(rng.integers(1, len(items)))
            op = operators[int(rng.integers(len(operators)))]
            node = op(build(items[:cut]), build(items[cut:]))
        if negating and rng.random() < params.negate_prob:
            node = Not(node)
        return node

    while True:
        chosen = sorted(int(v) for v in rng.choice(width, size=arity, replace=False))
        pool = list(chosen)
        if not read_once:
            pool += [v for v in chosen if rng.random() < params.duplicate_prob]
        f = build(np.asarray(pool))
        if read_once or not is_constant(f):
            return f


def is_constant(f: Formula) -> bool:
    from . import kernels

    table = kernels.truth_table(compile_formula(f))
    return bool(table.min() == table.max())


# --------------------------------------------------------------------------
# corpus files


def write_corpus(path, formulas: Iterable[Formula], width: int) -> None:
    with open(path, "w") as fh:
        fh.write(f"width={width}\n")
        for f in formulas:
            fh.write(render(f) + "\n")


def read_corpus(path) -> tuple:
    with open(path) as fh:
        lines = [line.strip() for line in fh]
    lines = [line for line in lines if line and not line.startswith("#")]
    if not lines or not lines[0].startswith("width="):
        raise ValueError(f"{path}: missing 'width=<n>' header")
    width = int(lines[0].split("=", 1)[1])
    return width, [parse(line, width) for line in lines[1:]]


def chain(arity: int, operators: Sequence[type]) -> Formula:
    """Left-deep chain ``((x1 o1 x2) o2 x3) ...`` cycling through ``operators``."""
    node: Formula = Var(0)
    for i, op in zip(range(1, arity), itertools.cycle(operators)):
        node = op(node, Var(i))
    return node

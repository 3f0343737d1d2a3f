"""Pure-Python kernels; same signatures as the compiled ``_kernels`` module.

K3 values are encoded 0 (False), 1 (True), 2 (unassigned).
"""

import numpy as np

OP_VAR, OP_NOT, OP_AND, OP_OR, OP_XOR = 0, 1, 2, 3, 4

_AND = ((0, 0, 0), (0, 1, 2), (0, 2, 2))
_OR = ((0, 1, 2), (1, 1, 1), (2, 1, 2))
_XOR = ((0, 1, 2), (1, 0, 2), (2, 2, 2))
_NOT = (1, 0, 2)
_TABLES = {OP_AND: _AND, OP_OR: _OR, OP_XOR: _XOR}


def _prepare(ops, args):
    return list(zip(ops.tolist(), args.tolist()))


def _k3(code, val, known):
    stack = []
    push = stack.append
    pop = stack.pop
    for op, arg in code:
        if op == OP_VAR:
            push((val >> arg & 1) if known >> arg & 1 else 2)
        elif op == OP_NOT:
            stack[-1] = _NOT[stack[-1]]
        else:
            b = pop()
            stack[-1] = _TABLES[op][stack[-1]][b]
    return stack[0]


def _bool(code, val):
    stack = []
    push = stack.append
    pop = stack.pop
    for op, arg in code:
        if op == OP_VAR:
            push(val >> arg & 1)
        elif op == OP_NOT:
            stack[-1] ^= 1
        else:
            b = pop()
            if op == OP_AND:
                stack[-1] &= b
            elif op == OP_OR:
                stack[-1] |= b
            else:
                stack[-1] ^= b
    return stack[0]


def k3_eval(ops, args, val, known):
    return _k3(_prepare(ops, args), int(val), int(known))


def k3_eval_many(ops, args, vals, knowns):
    code = _prepare(ops, args)
    out = np.empty(len(vals), dtype=np.uint8)
    for i, (v, k) in enumerate(zip(np.asarray(vals).tolist(), np.asarray(knowns).tolist())):
        out[i] = _k3(code, v, k)
    return out


def truth_table(ops, local_args, m):
    code = _prepare(ops, local_args)
    return np.fromiter((_bool(code, a) for a in range(1 << m)), dtype=np.uint8, count=1 << m)


def witness_sizes(table, m, base, strict):
    """Smallest witness size per local variable, -1 where none exists.

    ``table`` is the classical truth table over ``m`` local variables and
    ``base`` the current assignment as a local bitmask.  A flip set ``W``
    qualifies for variable ``i`` when flipping ``W`` keeps the output (and,
    with ``strict``, so does flipping every subset of ``W``) while flipping
    ``W | {i}`` changes it.
    """
    table = np.asarray(table).tolist()
    n = 1 << m
    out = table[base]
    ok = [False] * n
    best = [-1] * m
    for d in range(n):
        good = table[base ^ d] == out
        if good and strict:
            rest = d
            while rest:
                low = rest & -rest
                if not ok[d ^ low]:
                    good = False
                    break
                rest ^= low
        ok[d] = good
        if not good:
            continue
        size = bin(d).count("1")
        for i in range(m):
            bit = 1 << i
            if d & bit:
                continue
            if table[base ^ d ^ bit] != out and (best[i] < 0 or size < best[i]):
                best[i] = size
    return np.asarray(best, dtype=np.int32)


def min_flip_size(table, m, base):
    table = np.asarray(table).tolist()
    out = table[base]
    best = -1
    for d in range(1, 1 << m):
        if table[base ^ d] != out:
            size = bin(d).count("1")
            if best < 0 or size < best:
                best = size
    return best

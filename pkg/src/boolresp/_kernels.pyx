# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels: formula evaluation and truth-table witness search.

K3 values are encoded 0 (False), 1 (True), 2 (unassigned).
"""

import numpy as np
from libc.stdlib cimport malloc, free

cdef enum:
    OP_VAR = 0
    OP_NOT = 1
    OP_AND = 2
    OP_OR = 3
    OP_XOR = 4
    STACK = 256

ctypedef unsigned long long u64

# row-major 3x3 tables indexed by 3 * left + right
cdef unsigned char K3_AND[9]
cdef unsigned char K3_OR[9]
cdef unsigned char K3_XOR[9]
cdef unsigned char K3_NOT[3]
K3_AND[:] = [0, 0, 0, 0, 1, 2, 0, 2, 2]
K3_OR[:] = [0, 1, 2, 1, 1, 1, 2, 1, 2]
K3_XOR[:] = [0, 1, 2, 1, 0, 2, 2, 2, 2]
K3_NOT[:] = [1, 0, 2]


cdef inline unsigned char _k3(const signed char[::1] ops, const int[::1] args,
                              u64 val, u64 known, unsigned char* stack) noexcept nogil:
    cdef Py_ssize_t i, n = ops.shape[0]
    cdef int sp = 0
    cdef unsigned char a, b
    cdef signed char op
    for i in range(n):
        op = ops[i]
        if op == OP_VAR:
            if (known >> args[i]) & 1:
                stack[sp] = <unsigned char>((val >> args[i]) & 1)
            else:
                stack[sp] = 2
            sp += 1
        elif op == OP_NOT:
            stack[sp - 1] = K3_NOT[stack[sp - 1]]
        else:
            sp -= 1
            b = stack[sp]
            a = stack[sp - 1]
            if op == OP_AND:
                stack[sp - 1] = K3_AND[3 * a + b]
            elif op == OP_OR:
                stack[sp - 1] = K3_OR[3 * a + b]
            else:
                stack[sp - 1] = K3_XOR[3 * a + b]
    return stack[0]


cdef inline unsigned char _bool(const signed char[::1] ops, const int[::1] args,
                                u64 val, unsigned char* stack) noexcept nogil:
    cdef Py_ssize_t i, n = ops.shape[0]
    cdef int sp = 0
    cdef unsigned char b
    cdef signed char op
    for i in range(n):
        op = ops[i]
        if op == OP_VAR:
            stack[sp] = <unsigned char>((val >> args[i]) & 1)
            sp += 1
        elif op == OP_NOT:
            stack[sp - 1] ^= 1
        else:
            sp -= 1
            b = stack[sp]
            if op == OP_AND:
                stack[sp - 1] &= b
            elif op == OP_OR:
                stack[sp - 1] |= b
            else:
                stack[sp - 1] ^= b
    return stack[0]


cdef unsigned char* _stack(Py_ssize_t n, unsigned char* local) except NULL:
    if n <= STACK:
        return local
    cdef unsigned char* buf = <unsigned char*>malloc(n)
    if buf == NULL:
        raise MemoryError()
    return buf


def k3_eval(const signed char[::1] ops, const int[::1] args, u64 val, u64 known):
    cdef unsigned char local[STACK]
    cdef unsigned char* stack = _stack(ops.shape[0], local)
    cdef unsigned char r = _k3(ops, args, val, known, stack)
    if stack != local:
        free(stack)
    return r


def k3_eval_many(const signed char[::1] ops, const int[::1] args, vals, knowns):
    cdef const u64[::1] v = np.ascontiguousarray(vals, dtype=np.uint64)
    cdef const u64[::1] k = np.ascontiguousarray(knowns, dtype=np.uint64)
    cdef Py_ssize_t i, n = v.shape[0]
    out = np.empty(n, dtype=np.uint8)
    cdef unsigned char[::1] o = out
    cdef unsigned char local[STACK]
    cdef unsigned char* stack = _stack(ops.shape[0], local)
    with nogil:
        for i in range(n):
            o[i] = _k3(ops, args, v[i], k[i], stack)
    if stack != local:
        free(stack)
    return out


def truth_table(const signed char[::1] ops, const int[::1] local_args, int m):
    cdef Py_ssize_t a, n = (<Py_ssize_t>1) << m
    out = np.empty(n, dtype=np.uint8)
    cdef unsigned char[::1] o = out
    cdef unsigned char local[STACK]
    cdef unsigned char* stack = _stack(ops.shape[0], local)
    with nogil:
        for a in range(n):
            o[a] = _bool(ops, local_args, <u64>a, stack)
    if stack != local:
        free(stack)
    return out


cdef inline int _popcount(u64 x) noexcept nogil:
    cdef int c = 0
    while x:
        x &= x - 1
        c += 1
    return c


def witness_sizes(const unsigned char[::1] table, int m, u64 base, bint strict):
    """Smallest witness size per local variable, -1 where none exists."""
    cdef Py_ssize_t n = (<Py_ssize_t>1) << m
    cdef unsigned char outv = table[base]
    ok_arr = np.zeros(n, dtype=np.uint8)
    cdef unsigned char[::1] ok = ok_arr
    best_arr = np.full(m, -1, dtype=np.int32)
    cdef int[::1] best = best_arr
    cdef Py_ssize_t d
    cdef u64 rest, low, bit
    cdef int i, sz
    cdef bint good
    with nogil:
        for d in range(n):
            good = table[base ^ <u64>d] == outv
            if good and strict:
                rest = <u64>d
                while rest:
                    low = rest & (~rest + 1)
                    if not ok[<u64>d ^ low]:
                        good = False
                        break
                    rest ^= low
            ok[d] = good
            if not good:
                continue
            sz = _popcount(<u64>d)
            for i in range(m):
                bit = (<u64>1) << i
                if <u64>d & bit:
                    continue
                if table[base ^ <u64>d ^ bit] != outv and (best[i] < 0 or sz < best[i]):
                    best[i] = sz
    return best_arr


def min_flip_size(const unsigned char[::1] table, int m, u64 base):
    cdef Py_ssize_t d, n = (<Py_ssize_t>1) << m
    cdef unsigned char outv = table[base]
    cdef int best = -1, sz
    with nogil:
        for d in range(1, n):
            if table[base ^ <u64>d] != outv:
                sz = _popcount(<u64>d)
                if best < 0 or sz < best:
                    best = sz
    return best

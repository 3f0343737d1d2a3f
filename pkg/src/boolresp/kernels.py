"""Hot loops, backed by the compiled extension when it is importable.

Set ``BOOLRESP_PURE_PYTHON=1`` to force the pure-Python fallback.
"""

import os

import numpy as np

from . import _kernels_py

if os.environ.get("BOOLRESP_PURE_PYTHON", "") not in ("", "0"):
    _impl = _kernels_py
    BACKEND = "python"
else:
    try:
        from . import _kernels as _impl  # type: ignore[attr-defined]

        BACKEND = "cython"
    except ImportError:
        _impl = _kernels_py
        BACKEND = "python"

BACKENDS = {"python": _kernels_py}
if BACKEND == "cython":
    BACKENDS["cython"] = _impl


def k3_eval(program, val: int, known: int, impl=None) -> int:
    return (impl or _impl).k3_eval(program.ops, program.args, val, known)


def k3_eval_many(program, vals, knowns, impl=None) -> np.ndarray:
    return (impl or _impl).k3_eval_many(program.ops, program.args, vals, knowns)


def truth_table(program, impl=None) -> np.ndarray:
    """Classical outputs indexed by local bitmask over ``program.used``."""
    if program.arity > 30:
        raise ValueError(f"truth table over {program.arity} variables is too large")
    return (impl or _impl).truth_table(program.ops, program.local_args, program.arity)


def witness_sizes(table, m: int, base: int, strict: bool = True, impl=None) -> np.ndarray:
    return (impl or _impl).witness_sizes(table, m, base, strict)


def min_flip_size(table, m: int, base: int, impl=None) -> int:
    return (impl or _impl).min_flip_size(table, m, base)

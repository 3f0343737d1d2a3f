"""Black-box classifier interface seen by the explainers.

Labels are ``True``, ``False`` or ``None`` (undetermined, only possible on
masked inputs).  Internally the explainers probe *mutants* of a fixed input
by keep-bitmask (bit ``i`` set keeps position ``i``) and get label codes
0, 1, 2 back.
"""

from __future__ import annotations

from typing import Callable, Sequence

import numpy as np

from . import kernels
from .formula import Formula, compile_formula, from_masks, mask, meta, to_masks

UNDETERMINED = 2
_CODE = {False: 0, True: 1, None: UNDETERMINED}
_LABEL = (False, True, None)


def label_code(label) -> int:
    return _CODE[label]


def code_label(code: int):
    return _LABEL[code]


def keep_positions(keep: int, width: int) -> list:
    return [i for i in range(width) if keep >> i & 1]


class Oracle:
    """Deterministic classifier with an invocation counter.

    Subclasses implement ``classify``.  ``calls`` grows by one per label
    produced, whichever entry point was used.
    """

    def __init__(self, width: int):
        self.width = width
        self.calls = 0

    def classify(self, a: Sequence):
        raise NotImplementedError

    def __call__(self, a: Sequence):
        if len(a) != self.width:
            raise ValueError(f"expected {self.width} inputs, got {len(a)}")
        self.calls += 1
        return self.classify(a)

    def prober(self, x: Sequence) -> Callable[[int], int]:
        """Return ``probe(keep_mask) -> label code`` for mutants of ``x``."""

        def probe(keep: int) -> int:
            return _CODE[self(mask(x, keep_positions(keep, self.width)))]

        return probe

    def mutant_codes(self, x: Sequence, keep_masks) -> np.ndarray:
        probe = self.prober(x)
        return np.fromiter((probe(int(k)) for k in keep_masks), dtype=np.uint8, count=len(keep_masks))

    def boolean_codes(self, values) -> np.ndarray:
        full = (1 << self.width) - 1
        return np.fromiter(
            (_CODE[self(from_masks(int(v), full, self.width))] for v in values),
            dtype=np.uint8,
            count=len(values),
        )

    @property
    def relevant(self):
        """Positions the classifier may depend on, when known; else all."""
        return tuple(range(self.width))


class FormulaOracle(Oracle):
    """A formula evaluated under strong Kleene semantics."""

    def __init__(self, f: Formula, width: int):
        super().__init__(width)
        m = meta(f)
        if m.used_vars and max(m.used_vars) >= width:
            raise ValueError("formula uses a position outside the input width")
        self.formula = f
        self.program = compile_formula(f)

    def classify(self, a):
        val, known = to_masks(a)
        return _LABEL[kernels.k3_eval(self.program, val, known)]

    def prober(self, x):
        val, known = to_masks(x)
        program = self.program

        def probe(keep: int) -> int:
            self.calls += 1
            return kernels.k3_eval(program, val, known & keep)

        return probe

    def mutant_codes(self, x, keep_masks) -> np.ndarray:
        val, known = to_masks(x)
        keep_masks = np.asarray(keep_masks, dtype=np.uint64)
        self.calls += len(keep_masks)
        vals = np.full(len(keep_masks), val, dtype=np.uint64)
        return kernels.k3_eval_many(self.program, vals, keep_masks & np.uint64(known))

    def boolean_codes(self, values: np.ndarray) -> np.ndarray:
        """Labels of fully assigned inputs given as value bitmasks."""
        values = np.asarray(values, dtype=np.uint64)
        self.calls += len(values)
        full = np.full(len(values), (1 << self.width) - 1, dtype=np.uint64)
        return kernels.k3_eval_many(self.program, values, full)

    @property
    def relevant(self):
        return self.program.used

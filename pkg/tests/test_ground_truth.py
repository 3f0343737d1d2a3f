import csv
import io
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings

from boolresp.formula import (
    MONOTONIC,
    NONMONOTONIC,
    And,
    Not,
    Or,
    Var,
    Xor,
    enumerate_assignments,
    evaluate,
    flip,
    meta,
    negate,
    parse,
    random_formula,
    size,
)
from boolresp.ground_truth import (
    TRUTH_COLUMNS,
    CauseKind,
    GroundTruth,
    GuardExceeded,
    NotReadOnce,
    TruthTable,
    classify_cause,
    depends,
    min_flips_brute,
    responsibility,
    responsibility_brute_force,
    responsibility_masking_brute,
    responsibility_read_once,
    truth_rows,
    write_truth_csv,
)
from oracles import booleans, formulas, min_flips_by_enumeration, responsibility_by_definition

T, F = True, False
half = Fraction(1, 2)


def _read_once(rng, n, width=6, max_arity=6):
    for i in range(n):
        fam = (MONOTONIC, NONMONOTONIC)[i % 2]
        yield random_formula(int(rng.integers(1, max_arity + 1)), fam, True, rng, width=width)


class TestClassifyCause:
    @pytest.mark.parametrize(
        "op,l,r,kind",
        [
            (And, T, T, CauseKind.EITHER),
            (And, T, F, CauseKind.RIGHT),
            (And, F, T, CauseKind.LEFT),
            (And, F, F, CauseKind.BOTH),
            (Or, F, F, CauseKind.EITHER),
            (Or, T, F, CauseKind.LEFT),
            (Or, F, T, CauseKind.RIGHT),
            (Or, T, T, CauseKind.BOTH),
            (Xor, T, F, CauseKind.EITHER),
            (Xor, T, T, CauseKind.EITHER),
        ],
    )
    def test_table(self, op, l, r, kind):
        assert classify_cause(op, l, r) is kind

    def test_not(self):
        assert classify_cause(Not, T) is CauseKind.PASS

    def test_xor_never_both(self):
        for l in (T, F):
            for r in (T, F):
                assert classify_cause(Xor, l, r) is CauseKind.EITHER


class TestExamples:
    def test_and_or(self):
        f = parse("x1 & (x2 | x3)")
        assert list(responsibility_read_once(f, (T, T, T))) == [1, half, half]

    def test_or_both_true(self):
        assert list(responsibility_read_once(parse("x1 | x2"), (T, T))) == [half, half]

    def test_xor(self):
        assert list(responsibility_read_once(parse("x1 ^ x2"), (T, F))) == [1, 1]

    def test_but_for(self):
        rho = responsibility_read_once(parse("x1 & x2 & x3"), (T, T, T))
        assert list(rho) == [1, 1, 1]

    def test_three_way_or(self):
        rho = responsibility_read_once(parse("x1 | x2 | x3"), (T, T, T))
        assert list(rho) == [Fraction(1, 3)] * 3

    def test_unused_positions_zero(self):
        rho = responsibility_read_once(parse("x2 | x4"), (T, T, F, F, T))
        assert list(rho) == [0, 1, 0, 0, 0]
        rho = responsibility_read_once(parse("x2 | x4"), (T, F, F, T, T))
        assert list(rho) == [0, 0, 0, 1, 0]

    def test_deps_example(self):
        f = parse("x1 & (x2 | x3)")
        d = depends(f, (T, T, T))
        assert d.root.deps == 1
        assert d.of(f.right) == 2

    def test_cause_kinds(self):
        f = parse("x1 & (x2 | x3)")
        d = depends(f, (T, T, T))
        assert d[id(f)].kind is CauseKind.EITHER
        assert d[id(f.right)].kind is CauseKind.BOTH


class TestReadOnce:
    def test_rejects_general(self):
        with pytest.raises(NotReadOnce):
            depends(parse("x1 & !x1"), (T,))

    def test_rejects_unassigned(self):
        with pytest.raises(ValueError):
            depends(parse("x1 & x2"), (T, None))

    def test_matches_definition(self, rng):
        for f in _read_once(rng, 150):
            for a in enumerate_assignments(6, meta(f).used_vars):
                assert list(responsibility_read_once(f, a)) == responsibility_by_definition(f, a)

    def test_matches_brute_force(self, rng):
        for f in _read_once(rng, 200, width=12, max_arity=10):
            table = TruthTable(f)
            used = sorted(meta(f).used_vars)
            for code in rng.integers(0, 1 << 12, 30):
                a = tuple(bool(code >> i & 1) for i in range(12))
                assert responsibility_read_once(f, a) == table.responsibility(a)

    def test_root_deps_is_min_flips(self, rng):
        for f in _read_once(rng, 150):
            for a in enumerate_assignments(6, meta(f).used_vars):
                assert depends(f, a).root.deps == min_flips_by_enumeration(f, a)

    @given(formulas(width=8, max_leaves=8).filter(lambda f: meta(f).read_once), booleans(8))
    @settings(max_examples=300, deadline=None)
    def test_property_exactness(self, f, a):
        if min_flips_by_enumeration(f, a) < 0:
            return
        assert list(responsibility_read_once(f, a)) == responsibility_by_definition(f, a)

    def test_linear_visits(self, rng):
        for f in _read_once(rng, 100, width=12, max_arity=12):
            counter = {}
            responsibility_read_once(f, tuple(bool(b) for b in rng.integers(0, 2, 12)), counter=counter)
            assert counter["visits"] <= 2 * size(f)


class TestProperties:
    def test_negation_invariance(self, rng):
        for f in _read_once(rng, 60):
            g = negate(f)
            for a in enumerate_assignments(6, meta(f).used_vars):
                assert responsibility(f, a) == responsibility(g, a)

    def test_irrelevance(self, rng):
        # a position that never influences the output gets zero
        f = parse("x1 | (x2 & !x2)")
        for a in enumerate_assignments(2):
            assert responsibility_brute_force(f, a)[1] == 0

    def test_quantization(self, rng):
        for f in _read_once(rng, 60):
            for a in enumerate_assignments(6, meta(f).used_vars):
                for v in responsibility(f, a):
                    assert v == 0 or (v.numerator == 1 and 1 <= v.denominator <= 6)

    def test_but_for_iff_one(self, rng):
        for f in _read_once(rng, 60):
            for a in enumerate_assignments(6, meta(f).used_vars):
                rho = responsibility(f, a)
                out = evaluate(f, a)
                for i in range(6):
                    assert (rho[i] == 1) == (evaluate(f, flip(a, [i])) != out)

    def test_min_flips_brute(self, rng):
        for f in _read_once(rng, 40):
            for a in enumerate_assignments(6, meta(f).used_vars):
                assert min_flips_brute(f, a) == min_flips_by_enumeration(f, a)


class TestBruteForce:
    def test_matches_definition_general(self, rng):
        for i in range(120):
            fam = (MONOTONIC, NONMONOTONIC)[i % 2]
            f = random_formula(int(rng.integers(1, 6)), fam, False, rng, width=5)
            for a in enumerate_assignments(5, meta(f).used_vars):
                for strict in (True, False):
                    got = list(responsibility_brute_force(f, a, strict=strict))
                    assert got == responsibility_by_definition(f, a, strict=strict)

    def test_strict_differs_from_relaxed(self):
        # {x2, x3} preserves the output but flipping x3 alone does not
        f = parse("(x1 ^ x2) | x3")
        a = (F, F, T)
        third = Fraction(1, 3)
        assert list(responsibility_brute_force(f, a)) == [0, 0, 1]
        assert list(responsibility_brute_force(f, a, strict=False)) == [third, third, 1]

    def test_relaxed_dominates(self, rng):
        for _ in range(60):
            f = random_formula(5, NONMONOTONIC, False, rng, width=5)
            for a in enumerate_assignments(5):
                s = responsibility_brute_force(f, a)
                r = responsibility_brute_force(f, a, strict=False)
                assert all(rv >= sv for rv, sv in zip(r, s))

    def test_guard(self):
        f = parse(" & ".join(f"x{i}" for i in range(1, 17)) + " | (x1 & !x1)")
        with pytest.raises(GuardExceeded):
            responsibility_brute_force(f, (T,) * 16)
        assert responsibility_brute_force(f, (T,) * 16, guard=None)[1] == 1

    def test_ground_truth_dispatch(self, rng):
        for f in _read_once(rng, 30):
            fast, slow = GroundTruth(f), GroundTruth(f, force_brute=True)
            assert fast.read_once and not slow.read_once
            for a in enumerate_assignments(6, meta(f).used_vars):
                assert fast(a) == slow(a)


def test_masking_oracle_agrees_on_read_once(rng):
    for f in _read_once(rng, 60, width=5, max_arity=5):
        for a in enumerate_assignments(5, meta(f).used_vars):
            assert responsibility_masking_brute(f, a) == responsibility_read_once(f, a)


def test_truth_csv():
    f = parse("x1 | x2")
    rows = list(truth_rows("f0", (T, T), responsibility(f, (T, T))))
    buf = io.StringIO()
    write_truth_csv(buf, rows)
    got = list(csv.reader(io.StringIO(buf.getvalue())))
    assert got[0] == TRUTH_COLUMNS
    assert got[1:] == [["f0", "11", "1", "1", "2"], ["f0", "11", "2", "1", "2"]]


def test_to_array():
    rho = responsibility(parse("x1 | x2"), (T, T, F))
    assert np.allclose(rho.to_array(), [0.5, 0.5, 0.0])
    assert rho.support() == frozenset({0, 1})

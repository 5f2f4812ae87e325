import random

import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from craut.core import Q, param_space, parse_poly
from craut.linsolve import (
    BranchOverflowError,
    branch_consistent,
    eliminate,
    nullspace_rational,
    solve_parametric_linear,
)

QS = param_space([])


def _rows(matrix):
    return [{k: QS.const(v) for k, v in enumerate(r) if v} for r in matrix]


def _span_rank(vectors, ncols):
    if not vectors:
        return 0
    return sympy.Matrix(vectors).rank()


def _dense(v, ncols):
    return [sympy.Rational(int(v[k].constant_value().numerator), int(v[k].constant_value().denominator)) if k in v else 0 for k in range(ncols)]


matrices = st.integers(1, 12).flatmap(
    lambda n: st.lists(st.lists(st.integers(-3, 3), min_size=n, max_size=n), min_size=0, max_size=10).map(
        lambda rows: (n, rows)
    )
)


@settings(max_examples=500, deadline=None)
@given(matrices)
def test_rational_nullspace_matches_sympy(case):
    n, rows = case
    basis = nullspace_rational(_rows(rows), n, QS)
    oracle = sympy.Matrix(rows).nullspace() if rows else [sympy.eye(n).col(i) for i in range(n)]
    assert len(basis) == len(oracle)
    got = [_dense(v, n) for v in basis]
    for v in got:
        if rows:
            assert all(x == 0 for x in sympy.Matrix(rows) * sympy.Matrix(v))
    assert _span_rank(got + [list(o) for o in oracle], n) == len(oracle)


@settings(max_examples=100, deadline=None)
@given(matrices)
def test_parametric_path_agrees_on_constant_systems(case):
    n, rows = case
    r = _rows(rows)
    fast = solve_parametric_linear(r, ncols=n, space=QS)
    leaves = eliminate(r, n, QS)
    assert len(fast) == 1 and len(leaves) == 1
    assert fast.branches[0].nullity == n - leaves[0].rank


PS = param_space(["a", "b"])


def _p(s):
    return parse_poly(PS, s)


def _specialize(rows, point):
    idx = {PS.index[k]: v for k, v in point.items()}
    return [[(r[c].evaluate(idx).constant_value() if c in r else 0) for c in range(3)] for r in rows]


@st.composite
def parametric_systems(draw):
    coeffs = st.sampled_from(["0", "1", "-1", "2", "a", "b", "a-b", "a+1", "a*b", "b^2-1"])
    rows = draw(st.lists(st.lists(coeffs, min_size=3, max_size=3), min_size=1, max_size=3))
    return [{c: _p(s) for c, s in enumerate(r) if s != "0"} for r in rows]


@settings(max_examples=60, deadline=None)
@given(parametric_systems())
def test_branches_cover_parameter_space(rows):
    tree = solve_parametric_linear(rows, ncols=3, space=PS)
    rng = random.Random(len(rows))
    points = [{"a": 0, "b": 0}, {"a": -1, "b": 1}, {"a": 1, "b": 1}, {"a": 1, "b": -1}, {"a": 0, "b": 1}]
    points += [{"a": rng.randint(-4, 4), "b": rng.randint(-4, 4)} for _ in range(95)]
    for pt in points:
        idx = {PS.index[k]: Q(v) for k, v in pt.items()}
        hits = [b for b in tree if b.contains(idx)]
        assert len(hits) == 1, (pt, [(b.E, b.N) for b in tree])
        b = hits[0]
        spec = _specialize(rows, pt)
        expected = 3 - sympy.Matrix(spec).rank()
        assert b.nullity == expected
        M = sympy.Matrix(spec)
        for v in b.basis:
            vec = [v[k].evaluate(idx).constant_value() if k in v else 0 for k in range(3)]
            assert any(vec)
            assert all(x == 0 for x in M * sympy.Matrix([sympy.Rational(int(x.numerator), int(x.denominator)) for x in map(Q, vec)]))


def test_single_parametric_entry_splits():
    tree = solve_parametric_linear([{0: _p("a")}], ncols=1, space=PS)
    assert [(list(map(str, b.E)), list(map(str, b.N)), b.nullity) for b in tree] == [
        (["a"], [], 1),
        ([], ["a"], 0),
    ]


def test_context_restricts_branches():
    rows = [{0: _p("a"), 1: _p("b")}]
    tree = solve_parametric_linear(rows, ncols=2, space=PS, N=[_p("a")])
    assert len(tree) == 1 and tree.branches[0].nullity == 1
    assert solve_parametric_linear(rows, ncols=2, space=PS, E=[_p("a")], N=[_p("a")]).branches == ()


def test_consistency_uses_radicals():
    assert not branch_consistent([_p("a^2")], [_p("a*b")], PS)
    assert branch_consistent([_p("a^2")], [_p("b")], PS)


def test_branch_cap():
    rows = [{0: _p("a"), 1: _p("b")}, {0: _p("b"), 1: _p("a+1")}, {1: _p("a*b-1")}]
    with pytest.raises(BranchOverflowError):
        eliminate(rows, 2, PS, max_branches=0)


def test_ordered_strategy_selects_earliest_columns():
    rows = [{0: QS.const(1), 1: QS.const(1), 2: QS.const(1)}, {0: QS.const(1), 1: QS.const(1), 2: QS.const(2)}]
    (leaf,) = eliminate(rows, 3, QS, strategy="ordered")
    assert sorted(leaf.pivots) == [0, 2]

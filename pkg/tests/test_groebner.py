import itertools
import random

import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import to_sympy
from craut.core import Q, param_space, parse_poly
from craut.groebner import (
    PolyRing,
    buchberger_reduced,
    cgs_from_strings,
    ideal_contains,
    normal_form,
    radical_membership,
    same_radical,
)

XYZ = param_space(["x", "y", "z"])
SX, SY, SZ = sympy.symbols("x y z")


def _p(s, space=XYZ):
    return parse_poly(space, s)


terms = st.sampled_from(["x", "y", "z", "x*y", "y*z", "x^2", "z^2", "x*z", "1", "y^2"])
gens = st.lists(
    st.lists(st.tuples(st.integers(-3, 3).filter(bool), terms), min_size=1, max_size=3).map(
        lambda ts: " + ".join(f"({c})*{m}" for c, m in ts)
    ),
    min_size=1,
    max_size=3,
)


@settings(max_examples=80, deadline=None)
@given(gens)
def test_buchberger_against_sympy(srcs):
    F = [_p(s) for s in srcs]
    F = [f for f in F if f]
    if not F:
        return
    G = buchberger_reduced(F)
    oracle = sympy.groebner([to_sympy(f) for f in F], SX, SY, SZ, order="grevlex", domain="QQ")
    assert len(G) == len(oracle.exprs)
    for g in G:
        assert oracle.reduce(to_sympy(g))[1] == 0
    for f in F:
        assert not normal_form(f, G)
    for h in oracle.exprs:
        assert ideal_contains(parse_poly(XYZ, str(h).replace("**", "^")), F)


def test_reduced_basis_is_monic_and_sorted():
    G = buchberger_reduced([_p("x^2 - y"), _p("x*y - 1")])
    assert all(g.leading()[1] == 1 for g in G)
    ring = PolyRing.grevlex(XYZ)
    lms = [ring.lm(g) for g in G]
    assert lms == sorted(lms, key=ring.key)


def test_unit_ideal():
    assert buchberger_reduced([_p("x"), _p("x - 1")]) == [XYZ.one()]


def test_radical_membership():
    assert radical_membership(_p("x"), [_p("x^3")])
    assert radical_membership(_p("x + y"), [_p("x^2"), _p("y^5")])
    assert not radical_membership(_p("x"), [_p("x*y")])
    assert not radical_membership(_p("x"), [])
    assert same_radical([_p("x^2"), _p("y")], [_p("x"), _p("y^3")])


def test_groebner_rejects_imaginary_unit():
    space = param_space(["x"], with_imag=True)
    with pytest.raises(ValueError):
        buchberger_reduced([parse_poly(space, "x - I")])


SIGMA = ["a*x-b", "b*y-a", "c*x^2-y", "c*y^2-x"]


def _cgs():
    return cgs_from_strings(SIGMA, ["a", "b", "c"], ["x", "y"])


def test_four_branch_example():
    space, triples = _cgs()
    p = lambda s: parse_poly(space, s)
    E_big = [p(s) for s in ["a^6-b^6", "a^3*c-b^3", "b^3*c-a^3", "a*c^2-a", "b*c^2-b"]]
    expected = {
        ("a,b,c", ""): ["x", "y"],
        ("a,b", "c"): ["c*x^2-y", "c*y^2-x"],
        ("big", "b"): ["b*x-a*c*y", "b*y-a"],
        ("", "big"): ["1"],
    }
    assert len(triples) == 4
    seen = set()
    for tr in triples:
        for (es, ns), gs in expected.items():
            E = E_big if es == "big" else [p(s) for s in es.split(",") if s]
            if not same_radical(list(tr.E), E):
                continue
            if ns == "big":
                ok = len(tr.N) == len(E_big) and all(any(same_radical([n], [m]) for m in tr.N) for n in E_big)
            else:
                ok = all(any(same_radical([n], [m]) for m in tr.N) for n in [p(s) for s in ns.split(",") if s])
            if ok:
                G = [p(s) for s in gs]
                assert all(ideal_contains(g, list(tr.G) + list(tr.E)) for g in G)
                assert all(ideal_contains(g, G + list(tr.E)) for g in tr.G)
                seen.add((es, ns))
    assert len(seen) == 4


def _specialized(polys, space, point):
    sub = {sympy.Symbol(k): v for k, v in point.items()}
    return [sympy.expand(to_sympy(f).subs(sub)) for f in polys]


def _same_specialized_ideal(F, G, space, point):
    X, Y = sympy.symbols("x y")
    f = [e for e in _specialized(F, space, point) if e != 0]
    g = [e for e in _specialized(G, space, point) if e != 0]
    gf = sympy.groebner(f, X, Y, order="grevlex", domain="QQ") if f else None
    gg = sympy.groebner(g, X, Y, order="grevlex", domain="QQ") if g else None
    if gf is None or gg is None:
        return gf is None and gg is None
    return list(gf.exprs) == list(gg.exprs)


def test_branches_specialize_correctly_on_sampled_points():
    space, triples = _cgs()
    F = [parse_poly(space, s) for s in SIGMA]
    grid = list(itertools.product(range(-10, 11), repeat=3))
    per_branch = {i: [] for i in range(len(triples))}
    for a, b, c in grid:
        idx = {space.index["a"]: Q(a), space.index["b"]: Q(b), space.index["c"]: Q(c)}
        hits = [i for i, tr in enumerate(triples) if tr.contains(idx)]
        assert len(hits) == 1
        per_branch[hits[0]].append({"a": a, "b": b, "c": c})
    rng = random.Random(7)
    for i, tr in enumerate(triples):
        pts = per_branch[i]
        assert pts
        sample = rng.sample(pts, min(20, len(pts)))
        assert len(sample) >= min(20, len(pts))
        for pt in sample:
            assert _same_specialized_ideal(F, tr.G, space, pt), (i, pt)


@st.composite
def parametric_ideals(draw):
    coeff = st.sampled_from(["1", "a", "b", "a-1", "a*b", "2"])
    mono = st.sampled_from(["x", "y", "x*y", "x^2", "1", "y^2"])
    polys = []
    for _ in range(draw(st.integers(1, 3))):
        n = draw(st.integers(1, 2))
        polys.append(" + ".join(f"({draw(coeff)})*{draw(mono)}" for _ in range(n)))
    return polys


@settings(max_examples=25, deadline=None)
@given(parametric_ideals())
def test_cgs_covers_parameter_space(srcs):
    space, triples = cgs_from_strings(srcs, ["a", "b"], ["x", "y"])
    F = [parse_poly(space, s) for s in srcs]
    rng = random.Random(hash(tuple(srcs)) & 0xFFFF)
    points = [(0, 0), (1, 0), (0, 1), (1, 1)] + [(rng.randint(-3, 3), rng.randint(-3, 3)) for _ in range(96)]
    for a, b in points:
        idx = {space.index["a"]: Q(a), space.index["b"]: Q(b)}
        hits = [tr for tr in triples if tr.contains(idx)]
        assert len(hits) == 1
        assert _same_specialized_ideal(F, hits[0].G, space, {"a": a, "b": b})

import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import TABLE, polys, to_sympy
from craut.core import (
    INHOMOGENEOUS,
    InhomogeneousError,
    ParseError,
    Poly,
    Q,
    UsageError,
    VarTable,
    brute_force_weighted_monomials,
    enumerate_weighted_monomials,
    format_poly,
    param_space,
    parse_poly,
    poly_mul,
    weighted_degree,
)

T13 = VarTable(1, [2, 3, 3])


@settings(max_examples=1_000, deadline=None, database=None)
@given(polys(), polys())
def test_conj_is_an_involutive_ring_automorphism(p, q):
    assert p.conj().conj() == p
    assert (p * q).conj() == p.conj() * q.conj()
    assert (p + q).conj() == p.conj() + q.conj()


@settings(max_examples=300, deadline=None)
@given(polys(), polys())
def test_arithmetic_against_sympy(p, q):
    assert to_sympy(p + q) == sympy.expand(to_sympy(p) + to_sympy(q))
    assert to_sympy(p * q) == sympy.expand(to_sympy(p) * to_sympy(q))
    assert to_sympy(p - q) == sympy.expand(to_sympy(p) - to_sympy(q))


@settings(max_examples=300, deadline=None)
@given(polys())
def test_conj_against_sympy(p):
    a = sympy.Symbol("a", real=True)
    names = {n: sympy.Symbol(n) for n in TABLE.names if n != "I"}
    swap = {}
    for x in ("z1", "z2", "w1", "w2"):
        swap[names[x]] = names["b" + x]
        swap[names["b" + x]] = names[x]
    expected = sympy.conjugate(to_sympy(p).subs(names["a"], a)).subs(
        {sympy.conjugate(s): t for s, t in swap.items()}
    )
    expected = expected.subs(a, names["a"])
    assert to_sympy(p.conj()) == sympy.expand(expected)


@settings(max_examples=300, deadline=None)
@given(polys())
def test_print_parse_round_trip(p):
    assert parse_poly(TABLE, str(p)) == p


@settings(max_examples=200, deadline=None)
@given(polys(), st.sampled_from(TABLE.names[:-1]))
def test_diff_against_sympy(p, name):
    assert to_sympy(p.diff(name)) == sympy.diff(to_sympy(p), sympy.Symbol(name))


@settings(max_examples=200, deadline=None)
@given(polys(max_terms=3), polys(max_terms=3))
def test_exact_div_recovers_factor(p, q):
    if not q:
        return
    assert (p * q).exact_div(q) == p


def test_i_squared_is_minus_one():
    i = TABLE.i()
    assert i * i == -TABLE.one()
    assert str(parse_poly(TABLE, "(1+I)^2")) == "2*I"


def test_term_order_and_printing():
    p = parse_poly(T13, "w1 + z1^2 + 2*I*z1*bz1 + 3")
    assert format_poly(p) == "2*I*z1*bz1 + z1^2 + w1 + 3"


def test_weighted_degree():
    assert weighted_degree(parse_poly(T13, "z1*bz1 + w1")) == 2
    assert weighted_degree(parse_poly(T13, "z1 + w1")) == INHOMOGENEOUS
    with pytest.raises(InhomogeneousError):
        weighted_degree(T13.zero())


@pytest.mark.parametrize("weight", range(0, 7))
def test_weighted_monomials_match_brute_force(weight):
    got = enumerate_weighted_monomials(T13, weight, T13.holomorphic)
    assert len(got) == len(set(got))
    assert set(got) == brute_force_weighted_monomials(T13, weight, T13.holomorphic)


def test_weight_three_holomorphic_monomials():
    got = {format_poly(T13.monomial(e)) for e in enumerate_weighted_monomials(T13, 3, T13.holomorphic)}
    assert got == {"z1^3", "z1*w1", "w2", "w3"}


def test_parse_errors_carry_position():
    with pytest.raises(ParseError) as exc:
        parse_poly(T13, "z1 +\n  * w1")
    assert "line 2" in str(exc.value)
    with pytest.raises(ParseError):
        parse_poly(T13, "q1")
    with pytest.raises(ParseError):
        parse_poly(T13, "z1/w1")


def test_mixing_spaces_is_an_error():
    with pytest.raises(UsageError):
        poly_mul(T13.gen("z1"), TABLE.gen("z1"))


def test_param_space_is_shared():
    assert param_space(["c", "d"]) is param_space(("c", "d"))
    p = param_space(["c"]).gen("c")
    assert (p * p).evaluate({0: Q(3)}) == 9


def test_evaluate_and_substitute():
    p = parse_poly(TABLE, "a*z1 + a^2")
    assert p.evaluate({TABLE.index["a"]: 2}) == parse_poly(TABLE, "2*z1 + 4")
    assert p.subs("z1", parse_poly(TABLE, "a")) == parse_poly(TABLE, "2*a^2")

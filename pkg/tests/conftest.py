from __future__ import annotations

import sys

import sympy
from hypothesis import strategies as st

from craut.core import Poly, Q, Space, VarTable

TABLE = VarTable(2, [2, 3], ["a"])


def to_sympy(p: Poly):
    syms = [sympy.I if j == p.space.imag else sympy.Symbol(n) for j, n in enumerate(p.space.names)]
    out = sympy.Integer(0)
    for e, c in p.terms.items():
        term = sympy.Rational(int(c.numerator), int(c.denominator))
        for s, x in zip(syms, e):
            if x:
                term *= s**x
        out += term
    return sympy.expand(out)


@st.composite
def polys(draw, space: Space = TABLE, max_terms: int = 5, max_exp: int = 2):
    n = space.nvars
    items = draw(
        st.lists(
            st.tuples(
                st.lists(st.integers(0, max_exp), min_size=n, max_size=n),
                st.fractions(min_value=-5, max_value=5, max_denominator=4),
            ),
            max_size=max_terms,
        )
    )
    return Poly.from_terms(space, [(tuple(e), Q(c.numerator, c.denominator)) for e, c in items])


import functools

from craut.liealg import compute_full_algebra
from craut.model import builtin_model


@functools.lru_cache(maxsize=None)
def algebras(name: str):
    return tuple(compute_full_algebra(builtin_model(name)))


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)

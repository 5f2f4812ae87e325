"""Polynomial ansatz, tangency identities and their linear systems."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence

from .core import Poly, Q, Space, enumerate_weighted_monomials, format_monomial, param_space, scalar_space
from .model import CRModel, restrict_to_M

log = logging.getLogger(__name__)

__all__ = [
    "Unknown",
    "Ansatz",
    "ComplexRow",
    "LinearSystem",
    "TangencyData",
    "build_ansatz",
    "tangency_polynomials",
    "extract_linear_system",
    "complex_rows",
    "format_complex_row",
]

Exps = tuple[int, ...]


@dataclass(frozen=True)
class Unknown:
    """One complex coefficient: ``slot`` is 0..n-1 for Z^j and n..n+k-1 for W^l."""

    name: str
    slot: int
    monomial: Exps


@dataclass(frozen=True, eq=False)
class Ansatz:
    model: CRModel
    t: int
    cumulative: bool
    unknowns: tuple[Unknown, ...]

    def slot_name(self, slot: int) -> str:
        n = self.model.n
        return f"Z{slot + 1}" if slot < n else f"W{slot - n + 1}"

    def slot_var(self, slot: int) -> int:
        """Index in the model table of the variable differentiated by this slot."""
        n = self.model.n
        return self.model.table.z(slot) if slot < n else self.model.table.w(slot - n)

    @property
    def real_names(self) -> list[str]:
        out = []
        for u in self.unknowns:
            out += [f"re({u.name})", f"im({u.name})"]
        return out

    def __len__(self) -> int:
        return len(self.unknowns)

    def describe(self) -> list[str]:
        names = self.model.table.names
        return [f"{u.name}: {self.slot_name(u.slot)} coefficient of {format_monomial(names, u.monomial) or '1'}" for u in self.unknowns]


def _slot_weights(m: CRModel) -> list[int]:
    return [1] * m.n + list(m.weights_w)


def build_ansatz(m: CRModel, t: int, cumulative: bool = False) -> Ansatz:
    """Holomorphic coefficients of weight [x] + t (or at most that, when cumulative)."""
    table = m.table
    if t < -m.rho:
        log.warning("weight %d is below -rho = %d; empty ansatz", t, -m.rho)
        return Ansatz(m, t, cumulative, ())
    unknowns = []
    count = 0
    for slot, base in enumerate(_slot_weights(m)):
        top = base + t
        degs = range(0, top + 1) if cumulative else [top]
        monos: list[Exps] = []
        for d in sorted(degs, reverse=True):
            monos += enumerate_weighted_monomials(table, d, table.holomorphic)
        for e in monos:
            count += 1
            unknowns.append(Unknown(f"c{count}", slot, e))
    return Ansatz(m, t, cumulative, tuple(unknowns))


@dataclass(frozen=True, eq=False)
class TangencyData:
    """Per-unknown restricted contributions to each tangency polynomial.

    ``A[j][u]`` multiplies the unknown ``c_u`` and ``B[j][u]`` its conjugate in
    the j-th tangency polynomial, both already restricted to M.
    """

    ansatz: Ansatz
    A: tuple[tuple[Poly, ...], ...]
    B: tuple[tuple[Poly, ...], ...]


class _Restrictor:
    """Caches for restricted conjugate monomials and restricted derivatives of R_j."""

    def __init__(self, m: CRModel):
        self.m = m
        self.t = m.table
        self._conj_mono: dict[Exps, Poly] = {}
        self._deriv: dict[tuple[int, int], Poly] = {}

    def conj_monomial(self, e: Exps) -> Poly:
        p = self._conj_mono.get(e)
        if p is None:
            p = restrict_to_M(self.m, self.t.monomial(e).conj())
            self._conj_mono[e] = p
        return p

    def deriv(self, j: int, var: int) -> Poly:
        key = (j, var)
        p = self._deriv.get(key)
        if p is None:
            p = restrict_to_M(self.m, self.m.rhs[j].diff(var))
            self._deriv[key] = p
        return p


def tangency_data(a: Ansatz) -> TangencyData:
    m = a.model
    t = m.table
    rs = _Restrictor(m)
    A, B = [], []
    for j in range(m.k):
        wj = t.w(j)
        Aj, Bj = [], []
        for u in a.unknowns:
            var = a.slot_var(u.slot)
            bar = t.partner[var]
            mono = t.monomial(u.monomial)
            da = rs.deriv(j, var)
            av = -(mono * da) if da else t.zero()
            db = rs.deriv(j, bar)
            cm = rs.conj_monomial(u.monomial) if (db or var == wj) else None
            bv = -(cm * db) if db else t.zero()
            if var == wj:
                av = av + mono
                bv = bv - cm
            Aj.append(av)
            Bj.append(bv)
        A.append(tuple(Aj))
        B.append(tuple(Bj))
    return TangencyData(a, tuple(A), tuple(B))


def tangency_polynomials(m: CRModel, a: Ansatz, values: Sequence | None = None) -> list[Poly]:
    """The k restricted tangency polynomials.

    With ``values`` None the unknowns are kept symbolic: they are appended as
    extra variables ``c1, bc1, ...`` (a bar-paired pair per complex unknown)
    in a fresh space returned with the polynomials' ``space``.  With
    ``values`` (one model-table Poly per complex unknown) the result is the
    tangency residual of that concrete field.
    """
    data = tangency_data(a)
    t = m.table
    if values is not None:
        out = []
        for j in range(m.k):
            acc = t.zero()
            for u, val in enumerate(values):
                if val:
                    if data.A[j][u]:
                        acc = acc + data.A[j][u] * val
                    if data.B[j][u]:
                        acc = acc + data.B[j][u] * val.conj()
            out.append(acc)
        return out
    space, idx = _symbolic_space(a)
    out = []
    for j in range(m.k):
        acc = space.zero()
        for u in range(len(a.unknowns)):
            cu = space.gen(t.nvars + 2 * u)
            cb = space.gen(t.nvars + 2 * u + 1)
            if data.A[j][u]:
                acc = acc + data.A[j][u].map_space(space, idx) * cu
            if data.B[j][u]:
                acc = acc + data.B[j][u].map_space(space, idx) * cb
        out.append(acc)
    return out


def _symbolic_space(a: Ansatz) -> tuple[Space, list[int]]:
    t = a.model.table
    names = list(t.names)
    weights = list(t.weights)
    partner = list(t.partner)
    base = len(names)
    for i, u in enumerate(a.unknowns):
        names += [u.name, "b" + u.name]
        weights += [0, 0]
        partner += [base + 2 * i + 1, base + 2 * i]
    return Space(tuple(names), tuple(weights), tuple(partner), t.imag), list(range(base))


# -- linear systems -----------------------------------------------------------


@dataclass(frozen=True)
class ComplexRow:
    """sum_u a[u] c_u + b[u] conj(c_u) = 0, coefficients in Q(i)[params]."""

    equation: int  # 0-based j
    monomial: Exps  # CR part of the extracted monomial
    a: dict[int, Poly]
    b: dict[int, Poly]


@dataclass(frozen=True, eq=False)
class LinearSystem:
    """Homogeneous real linear system over Q[params].

    ``rows[r]`` maps a real-unknown column to a nonzero coefficient; column 2u
    is re(c_u) and 2u+1 is im(c_u).  ``provenance[r]`` is (j, monomial, part).
    """

    space: Space
    names: tuple[str, ...]
    rows: tuple[dict[int, Poly], ...]
    provenance: tuple[tuple[int, str, str], ...] = ()

    @property
    def ncols(self) -> int:
        return len(self.names)

    @cached_property
    def has_parameters(self) -> bool:
        return any(not c.is_constant() for r in self.rows for c in r.values())

    def row_strings(self) -> list[str]:
        out = []
        for r in self.rows:
            parts = []
            for col in sorted(r):
                parts.append(f"({r[col]})*{self.names[col]}")
            out.append(" + ".join(parts) + " = 0")
        return out


def _split_scalar(s: Poly, pspace: Space, imag: int) -> tuple[Poly, Poly]:
    """Real and imaginary parts of a Q(i)[params] scalar, as Q[params] polys."""
    re_t, im_t = {}, {}
    for e, c in s.terms.items():
        if e[imag]:
            im_t[e[:imag] + e[imag + 1 :]] = c
        else:
            re_t[e[:imag] + e[imag + 1 :]] = c
    return Poly(pspace, re_t), Poly(pspace, im_t)


def complex_rows(data: TangencyData) -> list[ComplexRow]:
    """Group each tangency polynomial by its (z, bz, w) monomial."""
    m = data.ansatz.model
    t = m.table
    ncr = t.ncr
    sspace = scalar_space(m.params)
    rows = []
    for j in range(m.k):
        groups: dict[Exps, tuple[dict, dict]] = {}
        for which, polys in ((0, data.A[j]), (1, data.B[j])):
            for u, p in enumerate(polys):
                for e, c in p.terms.items():
                    mono = e[:ncr]
                    slot = groups.setdefault(mono, ({}, {}))[which].setdefault(u, {})
                    slot[e[ncr:]] = slot.get(e[ncr:], 0) + c
        key = t.key
        full = lambda mono: mono + (0,) * (t.nvars - ncr)
        for mono in sorted(groups, key=lambda mo: key(full(mo)), reverse=True):
            ga, gb = groups[mono]
            a = {u: Poly(sspace, {e: c for e, c in d.items() if c}) for u, d in ga.items()}
            b = {u: Poly(sspace, {e: c for e, c in d.items() if c}) for u, d in gb.items()}
            a = {u: v for u, v in a.items() if v}
            b = {u: v for u, v in b.items() if v}
            if a or b:
                rows.append(ComplexRow(j, mono, a, b))
    return rows


def format_complex_row(row: ComplexRow, ansatz: Ansatz) -> str:
    names = [u.name for u in ansatz.unknowns]
    parts = []
    for u in sorted(set(row.a) | set(row.b)):
        for coeff, sym in ((row.a.get(u), names[u]), (row.b.get(u), f"conj({names[u]})")):
            if coeff is None:
                continue
            cs = str(coeff.sorted())
            if cs == "1":
                parts.append(sym)
            elif cs == "-1":
                parts.append(f"-{sym}")
            elif len(coeff) == 1:
                parts.append(f"{cs}*{sym}")
            else:
                parts.append(f"({cs})*{sym}")
    s = " + ".join(parts).replace("+ -", "- ")
    return s


def _normalize_row(row: dict[int, Poly]) -> dict[int, Poly]:
    import gmpy2

    num, den = 0, 1
    for p in row.values():
        for c in p.terms.values():
            num = gmpy2.gcd(num, c.numerator)
            den = gmpy2.lcm(den, c.denominator)
    scale = Q(den, num)
    first = row[min(row)]
    if first.leading()[1] < 0:
        scale = -scale
    return {k: v.scale(scale) for k, v in sorted(row.items())}


def extract_linear_system(data: TangencyData | list[ComplexRow], ansatz: Ansatz | None = None, dedup: bool = True) -> LinearSystem:
    """Split complex rows into real rows over Q[params] (c = x + i y)."""
    if isinstance(data, TangencyData):
        ansatz = data.ansatz
        crow = complex_rows(data)
    else:
        crow = data
    m = ansatz.model
    pspace = param_space(m.params)
    imag = len(m.params)
    names = tuple(ansatz.real_names)
    rows: list[dict[int, Poly]] = []
    prov: list[tuple[int, str, str]] = []
    seen = set()
    tnames = m.table.names
    for r in crow:
        re_row: dict[int, Poly] = {}
        im_row: dict[int, Poly] = {}
        for u in set(r.a) | set(r.b):
            a = r.a.get(u)
            b = r.b.get(u)
            sspace = (a or b).space
            a = a if a is not None else sspace.zero()
            b = b if b is not None else sspace.zero()
            cx = a + b
            cy = (a - b) * sspace.i()
            for col, coeff in ((2 * u, cx), (2 * u + 1, cy)):
                re_c, im_c = _split_scalar(coeff, pspace, imag)
                if re_c:
                    re_row[col] = re_c
                if im_c:
                    im_row[col] = im_c
        mono = format_monomial(tnames, r.monomial) or "1"
        for part, row in (("re", re_row), ("im", im_row)):
            if not row:
                continue
            if dedup:
                row = _normalize_row(row)
                key = tuple((k, v) for k, v in row.items())
                if key in seen:
                    continue
                seen.add(key)
            rows.append(row)
            prov.append((r.equation + 1, mono, part))
    return LinearSystem(pspace, names, tuple(rows), tuple(prov))

"""Holomorphic vector fields, brackets and the graded algebra of a model."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .core import INHOMOGENEOUS, InhomogeneousError, Poly, Q, Space, VarTable, param_space
from .groebner import PolyRing, buchberger_reduced, normal_form, radical_membership
from .linsolve import (
    Branch,
    branch_consistent,
    eliminate,
    nullspace_from_leaf,
    solve_parametric_linear,
)
from .model import CRModel, restrict_to_M
from .tangency import Ansatz, LinearSystem, build_ansatz, extract_linear_system, tangency_data

log = logging.getLogger(__name__)

__all__ = [
    "VectorField",
    "Context",
    "ComponentBranch",
    "GradedAlgebra",
    "AlgebraConfig",
    "TerminationError",
    "GradingError",
    "lie_bracket",
    "field_weight",
    "extract_generators",
    "verify_tangency",
    "tangency_residual",
    "compute_component",
    "negative_via_brackets",
    "check_fundamental",
    "compute_full_algebra",
    "structure_table",
    "in_span",
    "independent_subset",
    "structure_residuals",
    "jacobi_defects",
]


class TerminationError(RuntimeError):
    """The component loop hit its weight cap without meeting the stopping rule."""


class GradingError(RuntimeError):
    pass


# -- vector fields ------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class VectorField:
    """sum_j Z^j d/dz_j + sum_l W^l d/dw_l with holomorphic coefficients."""

    table: VarTable
    coeffs: tuple[Poly, ...]

    def __post_init__(self):
        t = self.table
        if len(self.coeffs) != t.n + t.k:
            raise ValueError("a vector field needs n + k coefficients")
        barred = t.barred
        for c in self.coeffs:
            if c.space is not t:
                raise ValueError("coefficient from a different variable table")
            if any(e[j] for e in c.terms for j in barred):
                raise ValueError("vector field coefficients must be holomorphic")

    @classmethod
    def zero(cls, table: VarTable) -> VectorField:
        return cls(table, tuple(table.zero() for _ in range(table.n + table.k)))

    @classmethod
    def from_dict(cls, table: VarTable, coeffs: dict[str, Poly | str]) -> VectorField:
        """Keys are slot names ``z1``, ``w2``...; values Polys or expression strings."""
        from .core import parse_poly

        out = [table.zero() for _ in range(table.n + table.k)]
        names = slot_names(table)
        for k, v in coeffs.items():
            out[names.index(k)] = parse_poly(table, v) if isinstance(v, str) else v
        return cls(table, tuple(out))

    def slot_var(self, s: int) -> int:
        t = self.table
        return t.z(s) if s < t.n else t.w(s - t.n)

    def __bool__(self) -> bool:
        return any(self.coeffs)

    def __eq__(self, other) -> bool:
        return isinstance(other, VectorField) and self.table is other.table and self.coeffs == other.coeffs

    def __hash__(self) -> int:
        return hash(self.coeffs)

    def __add__(self, other: VectorField) -> VectorField:
        return VectorField(self.table, tuple(a + b for a, b in zip(self.coeffs, other.coeffs)))

    def __sub__(self, other: VectorField) -> VectorField:
        return VectorField(self.table, tuple(a - b for a, b in zip(self.coeffs, other.coeffs)))

    def __neg__(self) -> VectorField:
        return VectorField(self.table, tuple(-a for a in self.coeffs))

    def scale(self, c) -> VectorField:
        if isinstance(c, Poly):
            return VectorField(self.table, tuple(a * c for a in self.coeffs))
        return VectorField(self.table, tuple(a.scale(c) for a in self.coeffs))

    def apply(self, f: Poly) -> Poly:
        """X(f) for a holomorphic polynomial f."""
        out = self.table.zero()
        for s, c in enumerate(self.coeffs):
            if c:
                d = f.diff(self.slot_var(s))
                if d:
                    out = out + c * d
        return out

    def to_dict(self) -> dict[str, str]:
        return {n: str(c.sorted()) for n, c in zip(slot_names(self.table), self.coeffs) if c}

    def __str__(self) -> str:
        parts = []
        for n, c in zip(slot_names(self.table), self.coeffs):
            if not c:
                continue
            cs = str(c.sorted())
            if cs == "1":
                parts.append(f"∂{n}")
            elif cs == "-1":
                parts.append(f"-∂{n}")
            elif len(c) == 1:
                parts.append(f"{cs} ∂{n}")
            else:
                parts.append(f"({cs}) ∂{n}")
        if not parts:
            return "0"
        return " + ".join(parts).replace("+ -", "- ")

    __repr__ = __str__


def slot_names(t: VarTable) -> list[str]:
    return [f"z{j + 1}" for j in range(t.n)] + [f"w{l + 1}" for l in range(t.k)]


def slot_weights(t: VarTable) -> list[int]:
    return [1] * t.n + list(t.weights_w)


def lie_bracket(X: VectorField, Y: VectorField) -> VectorField:
    """[X, Y] = X(Y) - Y(X), coefficient-wise."""
    if X.table is not Y.table:
        raise ValueError("fields belong to different models")
    return VectorField(X.table, tuple(X.apply(b) - Y.apply(a) for a, b in zip(X.coeffs, Y.coeffs)))


def field_weight(X: VectorField) -> int | str:
    if not X:
        raise InhomogeneousError("the zero field has no weight")
    ws = set()
    for c, w in zip(X.coeffs, slot_weights(X.table)):
        if c:
            ws |= {d - w for d in c.wdeg_set()}
    return ws.pop() if len(ws) == 1 else INHOMOGENEOUS


# -- parameters and coordinates -----------------------------------------------


def _lift_map(t: VarTable) -> list[int]:
    return [t.ncr + j for j in range(len(t.params))]


def lift_param(t: VarTable, p: Poly) -> Poly:
    """Q[params] polynomial into the model table."""
    return p.map_space(t, _lift_map(t))


def field_coordinates(X: VectorField, pspace: Space) -> dict[tuple, Poly]:
    """Real coordinates: (slot, CR monomial, 0 re / 1 im) -> Q[params] coefficient."""
    t = X.table
    ncr = t.ncr
    npar = len(t.params)
    if pspace.nvars != npar:
        raise ValueError(f"parameter space has {pspace.nvars} variables, table has {npar} parameters")
    acc: dict[tuple, dict] = {}
    for s, c in enumerate(X.coeffs):
        for e, v in c.terms.items():
            key = (s, e[:ncr], e[t.imag])
            pe = e[ncr : ncr + npar]
            d = acc.setdefault(key, {})
            d[pe] = d.get(pe, 0) + v
    out = {}
    for key in sorted(acc):
        p = Poly(pspace, {e: v for e, v in acc[key].items() if v})
        if p:
            out[key] = p
    return out


@dataclass(frozen=True)
class Context:
    """Branch conditions: E vanish, every member of N is nonzero."""

    E: tuple[Poly, ...] = ()
    N: tuple[Poly, ...] = ()

    def refine(self, E: Sequence[Poly], N: Sequence[Poly]) -> Context:
        return Context(tuple(E), tuple(N))

    def contains(self, point: dict[int, object]) -> bool:
        return not any(e.evaluate(point) for e in self.E) and all(n.evaluate(point) for n in self.N)


def _coord_rows(vectors: Sequence[dict[tuple, Poly]]) -> list[dict[int, Poly]]:
    keys = sorted({k for v in vectors for k in v})
    rows = []
    for k in keys:
        r = {i: v[k] for i, v in enumerate(vectors) if k in v}
        if r:
            rows.append(r)
    return rows


def independent_subset(
    vectors: Sequence[dict[tuple, Poly]], pspace: Space, ctx: Context
) -> list[tuple[Context, list[int]]]:
    """Earliest maximal independent subset, per refined branch."""
    if not vectors:
        return [(ctx, [])]
    rows = _coord_rows(vectors)
    leaves = eliminate(rows, len(vectors), pspace, ctx.E, ctx.N, strategy="ordered")
    return [(Context(lf.E, lf.N), sorted(lf.pivots)) for lf in leaves]


def in_span(
    v: dict[tuple, Poly], basis: Sequence[dict[tuple, Poly]], pspace: Space, ctx: Context
) -> list[tuple[Context, list[tuple[Poly, Poly]] | None]]:
    """Coefficients c with v = sum c_m basis_m as (numerator, denominator) pairs.

    ``None`` on a branch where v is not in the span.  Assumes ``basis`` is
    independent on the branch.
    """
    r = len(basis)
    if not v:
        return [(ctx, [(pspace.zero(), pspace.one())] * r)]
    if not basis:
        return [(ctx, None)]
    rows = _coord_rows(list(basis) + [v])
    leaves = eliminate(rows, r + 1, pspace, ctx.E, ctx.N, strategy="global", last_cols=[r])
    out = []
    for lf in leaves:
        c = Context(lf.E, lf.N)
        if r in lf.pivots:
            out.append((c, None))
            continue
        (vec,), _ = nullspace_from_leaf(lf, [r])
        den = vec[r]
        coeffs = []
        for m in range(r):
            num = -vec[m] if m in vec else pspace.zero()
            coeffs.append(_simplify_fraction(num, den))
        out.append((c, coeffs))
    return out


def _simplify_fraction(num: Poly, den: Poly) -> tuple[Poly, Poly]:
    if not num:
        return num, den.space.one()
    if den.is_constant():
        return num.scale(1 / den.constant_value()), den.space.one()
    q = num.exact_div(den)
    if q is not None:
        return q, den.space.one()
    lc = den.leading()[1]
    return num.scale(1 / lc), den.scale(1 / lc)


def format_fraction(f: tuple[Poly, Poly]) -> str:
    num, den = f
    if den.is_constant():
        return str(num.scale(1 / den.constant_value()).sorted())
    return f"({num.sorted()})/({den.sorted()})"


# -- components ---------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class ComponentBranch:
    ctx: Context
    t: int
    generators: tuple[VectorField, ...]
    ansatz: Ansatz
    system: LinearSystem
    branch: Branch


def extract_generators(a: Ansatz, branch: Branch) -> list[VectorField]:
    """One field per basis vector, complex unknowns rebuilt as x + i y."""
    m = a.model
    t = m.table
    lmap = _lift_map(t)
    i_unit = t.i()
    out = []
    for vec in branch.basis:
        coeffs = [t.zero() for _ in range(t.n + t.k)]
        for u, unk in enumerate(a.unknowns):
            x = vec.get(2 * u)
            y = vec.get(2 * u + 1)
            if x is None and y is None:
                continue
            c = t.zero()
            if x is not None:
                c = c + x.map_space(t, lmap)
            if y is not None:
                c = c + y.map_space(t, lmap) * i_unit
            coeffs[unk.slot] = coeffs[unk.slot] + c.mul_monomial(unk.monomial)
        out.append(VectorField(t, tuple(c.sorted() for c in coeffs)))
    return out


def compute_component(
    m: CRModel, t: int, ctx: Context | None = None, cumulative: bool = False
) -> list[ComponentBranch]:
    """Ansatz, tangency system, parametric solve and generators for weight t."""
    ctx = ctx or Context()
    a = build_ansatz(m, t, cumulative)
    pspace = param_space(m.params)
    if not a.unknowns:
        empty = LinearSystem(pspace, (), (), ())
        b = Branch(ctx.E, ctx.N, (), (), 0, 0)
        return [ComponentBranch(ctx, t, (), a, empty, b)]
    sys = extract_linear_system(tangency_data(a))
    tree = solve_parametric_linear(sys, E=ctx.E, N=ctx.N)
    out = []
    for b in tree:
        gens = extract_generators(a, b)
        out.append(ComponentBranch(Context(b.E, b.N), t, tuple(gens), a, sys, b))
    return out


def tangency_residual(m: CRModel, X: VectorField) -> list[Poly]:
    """Restricted tangency polynomials of X, built directly from the definition."""
    t = m.table
    n, k = t.n, t.k
    Z = X.coeffs[:n]
    W = X.coeffs[n:]
    out = []
    for j in range(k):
        R = m.rhs[j]
        T = W[j] - W[j].conj()
        for i in range(n):
            T = T - Z[i] * R.diff(t.z(i)) - Z[i].conj() * R.diff(t.bz(i))
        for l in range(k):
            T = T - W[l] * R.diff(t.w(l)) - W[l].conj() * R.diff(t.bw(l))
        out.append(restrict_to_M(m, T))
    return out


def verify_tangency(m: CRModel, X: VectorField, E: Sequence[Poly] = ()) -> bool:
    """True iff every tangency residual vanishes on V(E)."""
    pspace = param_space(m.params)
    res = tangency_residual(m, X)
    if not any(res):
        return True
    if not E:
        return False
    gb = buchberger_reduced(E)
    for r in res:
        for c in field_coordinates_poly(r, pspace).values():
            if normal_form(c, gb) and not radical_membership(c, list(gb)):
                return False
    return True


def field_coordinates_poly(p: Poly, pspace: Space) -> dict[tuple, Poly]:
    """Real Q[params] coefficients of each (CR monomial, re/im) of a table polynomial."""
    t = p.space
    ncr = t.ncr
    npar = len(t.params)
    acc: dict[tuple, dict] = {}
    for e, v in p.terms.items():
        d = acc.setdefault((e[:ncr], e[t.imag]), {})
        pe = e[ncr : ncr + npar]
        d[pe] = d.get(pe, 0) + v
    return {k: Poly(pspace, {e: v for e, v in d.items() if v}) for k, d in acc.items()}


def negative_via_brackets(
    g_minus1: Sequence[VectorField], rho: int, ctx: Context | None = None, pspace: Space | None = None
) -> list[tuple[Context, dict[int, list[VectorField]]]]:
    """Bracket-generated components: g_{-m} spanned by [g_{-1}, g_{-(m-1)}]."""
    ctx = ctx or Context()
    if not g_minus1:
        return [(ctx, {-m: [] for m in range(1, rho + 1)})]
    t = g_minus1[0].table
    pspace = pspace or param_space(t.params)
    states = [(ctx, {-1: list(g_minus1)})]
    for mm in range(2, rho + 1):
        nxt = []
        for c, comps in states:
            cands = [lie_bracket(x, y) for x in g_minus1 for y in comps[-(mm - 1)]]
            cands = [v for v in cands if v]
            coords = [field_coordinates(v, pspace) for v in cands]
            for c2, idx in independent_subset(coords, pspace, c):
                d = dict(comps)
                d[-mm] = [cands[i] for i in idx]
                nxt.append((c2, d))
        states = nxt
    return states


def check_fundamental(
    components: dict[int, Sequence[VectorField]], rho: int, ctx: Context | None = None, pspace: Space | None = None
) -> list[tuple[Context, bool]]:
    """g_- is generated by g_{-1}: bracket spans have the ansatz dimensions."""
    ctx = ctx or Context()
    g1 = list(components.get(-1, []))
    if not g1:
        return [(ctx, all(not components.get(-m) for m in range(2, rho + 1)))]
    t = g1[0].table
    pspace = pspace or param_space(t.params)
    out = []
    for c, comps in negative_via_brackets(g1, rho, ctx, pspace):
        out.append((c, all(len(comps[-m]) == len(components.get(-m, [])) for m in range(2, rho + 1))))
    return out


# -- full algebra -------------------------------------------------------------


@dataclass(frozen=True)
class AlgebraConfig:
    max_weight: int | None = None  # compute g_0..g_N unconditionally
    assume_fundamental: bool = False
    cap_factor: int = 3  # default safety cap is cap_factor * rho + 2
    structure: bool = True


@dataclass
class GradedAlgebra:
    ctx: Context
    components: dict[int, list[VectorField]]
    rho: int
    varrho: int
    rigid: bool
    fundamental: bool | None
    structure: list[tuple[int, int, list[tuple[int, tuple[Poly, Poly]]]]] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)
    stopped: str = ""

    @property
    def dims(self) -> dict[int, int]:
        return {t: len(g) for t, g in sorted(self.components.items())}

    @property
    def dim(self) -> int:
        return sum(len(g) for g in self.components.values())

    @property
    def basis(self) -> list[tuple[int, VectorField]]:
        return [(t, X) for t in sorted(self.components) for X in self.components[t]]


@dataclass
class _State:
    ctx: Context
    comps: dict[int, list[VectorField]]
    fundamental: bool | None
    t: int
    trivial_run: int = 0
    notes: list[str] = field(default_factory=list)


def compute_full_algebra(m: CRModel, config: AlgebraConfig | None = None) -> list[GradedAlgebra]:
    """All graded components per parameter branch, with the stopping rule."""
    config = config or AlgebraConfig()
    rho = m.rho
    pspace = param_space(m.params)
    max_weight = config.max_weight if config.max_weight is not None else m.max_weight
    if not m.transitive and max_weight is None:
        raise TerminationError("termination not reached; supply --max-weight or verify transitivity")
    cap = max_weight if max_weight is not None else config.cap_factor * rho + 2

    states = [_State(Context(), {}, None, -rho)]
    # negative part through the ansatz
    for t in range(-rho, 0):
        nxt = []
        for s in states:
            for cb in compute_component(m, t, s.ctx):
                comps = dict(s.comps)
                comps[t] = list(cb.generators)
                nxt.append(_State(cb.ctx, comps, None, t + 1))
        states = nxt
    # fundamentality
    nxt = []
    for s in states:
        if config.assume_fundamental:
            s.fundamental = True
            nxt.append(s)
            continue
        for c, fund in check_fundamental(s.comps, rho, s.ctx, pspace):
            nxt.append(_State(c, dict(s.comps), fund, 0))
    states = nxt

    finished: list[_State] = []
    while states:
        s = states.pop(0)
        t = s.t
        if max_weight is None and t > cap:
            raise TerminationError(
                f"termination not reached by weight {cap}; supply --max-weight or verify transitivity"
            )
        if max_weight is not None and t > max_weight:
            s.notes.append(f"stopped at --max-weight {max_weight}")
            finished.append(s)
            continue
        branches = compute_component(m, t, s.ctx)
        for cb in branches:
            comps = dict(s.comps)
            comps[t] = list(cb.generators)
            run = 0 if cb.generators else s.trivial_run + 1
            st = _State(cb.ctx, comps, s.fundamental, t + 1, run, list(s.notes))
            done = max_weight is None and ((s.fundamental and run >= 1) or run >= rho)
            (finished if done else states).append(st)

    out = []
    for s in finished:
        out.extend(_assemble(m, s, rho, pspace, config))
    return out


def _assemble(m: CRModel, s: _State, rho: int, pspace: Space, config: AlgebraConfig) -> list[GradedAlgebra]:
    comps = {t: g for t, g in sorted(s.comps.items())}
    nonneg = [t for t, g in comps.items() if t >= 0 and g]
    notes = list(s.notes)
    if nonneg:
        varrho = max(nonneg)
    else:
        varrho = -1
        notes.append("no nonnegative part (varrho reported as -1)")
    if not comps.get(0):
        notes.append("g_0 is trivial although the weighted dilation is always tangent")
    rigid = not any(g for t, g in comps.items() if t > 0)
    weights = slot_weights(m.table)
    coeff_rigid = all(
        max(c.wdeg_set()) <= w for g in comps.values() for X in g for c, w in zip(X.coeffs, weights) if c
    )
    if coeff_rigid != rigid:
        notes.append("rigidity flag disagrees with the coefficient-weight criterion")
    stopped = "max-weight" if any("max-weight" in n for n in notes) else (
        "first trivial component" if s.fundamental else f"{rho} successive trivial components"
    )
    alg = GradedAlgebra(s.ctx, comps, rho, varrho, rigid, s.fundamental, [], notes, stopped)
    if not config.structure:
        return [alg]
    return structure_table(alg, pspace)


def structure_table(alg: GradedAlgebra, pspace: Space | None = None) -> list[GradedAlgebra]:
    """Structure constants of every pair (i < j); may refine the branch."""
    basis = alg.basis
    if not basis:
        return [alg]
    t0 = basis[0][1].table
    pspace = pspace or param_space(t0.params)
    coords = {}
    by_weight: dict[int, list[int]] = {}
    for idx, (w, X) in enumerate(basis):
        by_weight.setdefault(w, []).append(idx)
        coords[idx] = field_coordinates(X, pspace)
    top = max(alg.components)
    bottom = min(alg.components)
    pending = [(alg.ctx, [])]
    pairs = [(i, j) for i in range(len(basis)) for j in range(i + 1, len(basis))]
    for i, j in pairs:
        wi, Xi = basis[i]
        wj, Xj = basis[j]
        br = lie_bracket(Xi, Xj)
        nxt = []
        for ctx, table in pending:
            if not br:
                nxt.append((ctx, table))
                continue
            ws = wi + wj
            target = by_weight.get(ws, [])
            v = field_coordinates(br, pspace)
            if ws > top or ws < bottom:
                # beyond the computed range every component is trivial
                target = []
            for c2, coeffs in in_span(v, [coords[k] for k in target], pspace, ctx):
                if coeffs is None:
                    if _vanishes_on(v, c2):
                        nxt.append((c2, table))
                        continue
                    raise GradingError(f"[X{i + 1}, X{j + 1}] is not in the weight-{ws} component")
                entry = [(target[n], f) for n, f in enumerate(coeffs) if f[0]]
                nxt.append((c2, table + [(i, j, entry)] if entry else table))
        pending = nxt
    out = []
    for ctx, table in pending:
        a = GradedAlgebra(ctx, alg.components, alg.rho, alg.varrho, alg.rigid, alg.fundamental, table, list(alg.notes), alg.stopped)
        if ctx != alg.ctx:
            a.notes.append("branch refined while computing structure constants")
        out.append(a)
    return out


def _vanishes_on(v: dict[tuple, Poly], ctx: Context) -> bool:
    if not ctx.E:
        return not v
    return all(radical_membership(c, list(ctx.E)) for c in v.values())


# -- structure checks ---------------------------------------------------------


def _table_dict(alg: GradedAlgebra) -> dict[tuple[int, int], dict[int, tuple[Poly, Poly]]]:
    out = {}
    for i, j, entry in alg.structure:
        out[(i, j)] = dict(entry)
    return out


def _reduce_mod(p: Poly, E: Sequence[Poly]) -> Poly:
    if not p or not E:
        return p
    return normal_form(p, buchberger_reduced(E))


def structure_residuals(alg: GradedAlgebra) -> list[tuple[int, int]]:
    """Pairs whose bracket differs from the tabulated combination on the branch."""
    basis = [X for _, X in alg.basis]
    if not basis:
        return []
    t = basis[0].table
    pspace = param_space(t.params)
    table = _table_dict(alg)
    bad = []
    for i in range(len(basis)):
        for j in range(i + 1, len(basis)):
            entry = table.get((i, j), {})
            den = pspace.one()
            for _, (_, d) in entry.items():
                if not d.is_constant():
                    den = den * d
            lhs = lie_bracket(basis[i], basis[j]).scale(lift_param(t, den))
            rhs = VectorField.zero(t)
            for m, (num, d) in entry.items():
                factor = num * (den.exact_div(d) if not d.is_constant() else den.scale(1 / d.constant_value()))
                rhs = rhs + basis[m].scale(lift_param(t, factor))
            diff = field_coordinates(lhs - rhs, pspace)
            if any(_reduce_mod(c, alg.ctx.E) and not radical_membership(c, list(alg.ctx.E)) for c in diff.values()):
                bad.append((i, j))
    return bad


def jacobi_defects(alg: GradedAlgebra) -> list[tuple[int, int, int]]:
    """Triples where the tabulated constants violate the Jacobi identity."""
    n = len(alg.basis)
    if not n:
        return []
    t0 = alg.basis[0][1].table
    pspace = param_space(t0.params)
    table = _table_dict(alg)

    def c(i, j):
        if i == j:
            return {}
        if i < j:
            return table.get((i, j), {})
        return {m: (-num, d) for m, (num, d) in table.get((j, i), {}).items()}

    def add(acc, m, f):
        num, den = f
        if m in acc:
            n0, d0 = acc[m]
            acc[m] = (n0 * den + num * d0, d0 * den)
        else:
            acc[m] = (num, den)

    bad = []
    for i in range(n):
        for j in range(i + 1, n):
            for k in range(j + 1, n):
                acc: dict[int, tuple[Poly, Poly]] = {}
                for a, b, cc in ((i, j, k), (j, k, i), (k, i, j)):
                    for m, (n1, d1) in c(a, b).items():
                        for q, (n2, d2) in c(m, cc).items():
                            add(acc, q, (n1 * n2, d1 * d2))
                for num, _ in acc.values():
                    if _reduce_mod(num, alg.ctx.E) and not radical_membership(num, list(alg.ctx.E)):
                        bad.append((i, j, k))
                        break
    return bad

"""Exact solution of homogeneous linear systems over Q[params] with case splitting.

Rows are sparse dicts ``column -> Poly`` over a parameter space without ``I``.
Elimination is fraction-free Gauss-Jordan.  Whenever a pivot candidate is a
non-constant polynomial whose nonvanishing is not already implied by the
branch, the branch splits into ``c = 0`` and ``c != 0``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import gmpy2

from .core import Poly, Q, Space, UsageError
from .groebner import PolyRing, buchberger_reduced, normal_form, radical_membership
from .tangency import LinearSystem

log = logging.getLogger(__name__)

__all__ = [
    "Branch",
    "CaseTree",
    "Leaf",
    "BranchOverflowError",
    "solve_parametric_linear",
    "nullspace_rational",
    "eliminate",
    "nullspace_from_leaf",
    "branch_consistent",
    "is_unit",
]

Row = dict[int, Poly]


class BranchOverflowError(RuntimeError):
    pass


@dataclass(frozen=True)
class Branch:
    """One case of a parametric solution.

    ``E`` vanish, every element of ``N`` is nonzero.  ``basis`` vectors map
    columns to Q[params] entries; ``denominators[i]`` is the factor that was
    cleared from vector i (the value at its free column).
    """

    E: tuple[Poly, ...]
    N: tuple[Poly, ...]
    basis: tuple[dict[int, Poly], ...]
    free: tuple[int, ...]
    rank: int
    ncols: int
    denominators: tuple[Poly, ...] = ()

    @property
    def nullity(self) -> int:
        return len(self.basis)

    def contains(self, point: dict[int, object]) -> bool:
        return not any(e.evaluate(point) for e in self.E) and all(n.evaluate(point) for n in self.N)

    def dense(self, i: int) -> list[Poly]:
        v = self.basis[i]
        zero = next(iter(v.values())).space.zero()
        return [v.get(c, zero) for c in range(self.ncols)]


@dataclass(frozen=True)
class CaseTree:
    branches: tuple[Branch, ...]
    splits: tuple[str, ...] = ()

    def __iter__(self):
        return iter(self.branches)

    def __len__(self) -> int:
        return len(self.branches)


# -- branch conditions --------------------------------------------------------


def _primitive(p: Poly) -> Poly:
    return p.primitive().sorted()


def _prod(polys: Iterable[Poly], space: Space) -> Poly:
    out = space.one()
    for p in polys:
        out = out * p
    return out


def branch_consistent(E: Sequence[Poly], N: Sequence[Poly], space: Space) -> bool:
    """Some point has E = 0 and every member of N nonzero."""
    return not radical_membership(_prod(N, space), list(E))


def is_unit(p: Poly, N: Sequence[Poly]) -> bool:
    """p is a rational constant times a product of members of N."""
    if p.is_constant():
        return bool(p)
    q = p
    changed = True
    while changed and not q.is_constant():
        changed = False
        for n in N:
            d = q.exact_div(n)
            if d is not None:
                q, changed = d, True
                if q.is_constant():
                    break
    return q.is_constant()


class _Context:
    """Branch conditions with a cached Groebner basis of E."""

    __slots__ = ("space", "E", "N", "gb", "ring")

    def __init__(self, space: Space, E: Sequence[Poly], N: Sequence[Poly]):
        self.space = space
        self.ring = PolyRing.grevlex(space)
        gb = buchberger_reduced(E, self.ring) if E else []
        self.gb = tuple(_primitive(g) for g in gb)
        self.E = self.gb
        seen, n_out = set(), []
        for n in N:
            n = _primitive(n)
            if not n.is_constant() and n not in seen:
                seen.add(n)
                n_out.append(n)
        self.N = tuple(n_out)

    def reduce(self, p: Poly) -> Poly:
        if not self.gb or p.is_constant():
            return p
        return normal_form(p, self.gb, self.ring)

    def vanishes(self, p: Poly) -> bool:
        return bool(self.gb) and radical_membership(p, list(self.gb))

    def with_zero(self, c: Poly) -> "_Context | None":
        ctx = _Context(self.space, list(self.E) + [c], self.N)
        if len(ctx.gb) == 1 and ctx.gb[0].is_constant():
            return None
        return ctx if branch_consistent(ctx.E, ctx.N, self.space) else None

    def with_nonzero(self, c: Poly) -> "_Context | None":
        ctx = _Context(self.space, self.E, list(self.N) + [c])
        return ctx if branch_consistent(ctx.E, ctx.N, self.space) else None


# -- elimination engine -------------------------------------------------------


@dataclass
class Leaf:
    """Final Gauss-Jordan state of one branch."""

    E: tuple[Poly, ...]
    N: tuple[Poly, ...]
    pivots: dict[int, Row]  # pivot column -> reduced row
    ncols: int
    space: Space

    @property
    def free(self) -> list[int]:
        return [c for c in range(self.ncols) if c not in self.pivots]

    @property
    def rank(self) -> int:
        return len(self.pivots)


def _content_normalize(row: Row) -> Row:
    num, den = 0, 1
    for p in row.values():
        for c in p.terms.values():
            num = gmpy2.gcd(num, c.numerator)
            den = gmpy2.lcm(den, c.denominator)
    if num == 1 and den == 1:
        return row
    s = Q(den, num)
    return {k: v.scale(s) for k, v in row.items()}


def _strip_units(row: Row, N: Sequence[Poly], extra: Sequence[Poly] = ()) -> Row:
    """Divide the whole row by members of N (and extra factors) while exact."""
    for n in list(N) + list(extra):
        if n.is_constant():
            continue
        while True:
            out = {}
            for k, v in row.items():
                d = v.exact_div(n)
                if d is None:
                    break
                out[k] = d
            else:
                row = out
                continue
            break
    return row


def _size(p: Poly) -> tuple[int, int]:
    return (max((sum(e) for e in p.terms), default=0), len(p.terms))


def eliminate(
    rows: Sequence[Row],
    ncols: int,
    space: Space,
    E: Sequence[Poly] = (),
    N: Sequence[Poly] = (),
    strategy: str = "global",
    last_cols: Iterable[int] = (),
    max_branches: int = 256,
    splits: list[str] | None = None,
) -> list[Leaf]:
    """Parametric Gauss-Jordan elimination.

    ``strategy="global"`` picks constant pivots anywhere (shortest row, highest
    column first), so low columns tend to stay free.  ``strategy="ordered"``
    pivots the lowest column that still has a nonzero entry, which selects
    the earliest independent columns.  Columns in ``last_cols`` are pivoted
    only when nothing else is left.
    """
    if strategy not in ("global", "ordered"):
        raise UsageError(f"unknown strategy {strategy!r}")
    last = frozenset(last_cols)
    root = _Context(space, E, N)
    if root.gb and len(root.gb) == 1 and root.gb[0].is_constant():
        return []
    if not branch_consistent(root.E, root.N, space):
        return []
    start = [dict(r) for r in rows if r]
    stack = [(root, start, {}, True)]
    leaves: list[Leaf] = []
    while stack:
        ctx, rem, piv, dirty = stack.pop()
        while True:
            if dirty and ctx.gb:
                rem = _reduce_rows(rem, ctx)
                piv = {c: r for c, r in ((c, _reduce_row(r, ctx)) for c, r in piv.items())}
                dirty = False
            rem = [r for r in rem if r]
            if not rem:
                leaves.append(Leaf(ctx.E, ctx.N, piv, ncols, space))
                if len(leaves) > max_branches:
                    raise BranchOverflowError(f"more than {max_branches} branches")
                break
            choice = _choose_pivot(rem, ctx, strategy, last)
            kind, ri, col = choice
            if kind == "split":
                c = _primitive(rem[ri][col])
                if ctx.vanishes(c):
                    # zero on the branch variety even though not reduced to 0
                    r = dict(rem[ri])
                    del r[col]
                    rem = rem[:ri] + [r] + rem[ri + 1 :]
                    continue
                za = ctx.with_zero(c)
                nb = ctx.with_nonzero(c)
                if splits is not None:
                    splits.append(str(c))
                if za is None and nb is None:
                    break
                if za is None:
                    ctx = nb
                    continue
                if nb is None:
                    ctx, dirty = za, True
                    continue
                # child B (c != 0) is explored after child A (c = 0)
                stack.append((nb, list(rem), dict(piv), False))
                ctx, dirty = za, True
                continue
            rem, piv = _pivot_step(rem, piv, ri, col, ctx)
    return leaves


def _reduce_row(r: Row, ctx: _Context) -> Row:
    out = {}
    for k, v in r.items():
        v = ctx.reduce(v)
        if v:
            out[k] = v
    return out


def _reduce_rows(rows: list[Row], ctx: _Context) -> list[Row]:
    return [_reduce_row(r, ctx) for r in rows]


def _choose_pivot(rem: list[Row], ctx: _Context, strategy: str, last: frozenset) -> tuple[str, int, int]:
    if strategy == "ordered":
        cols = set()
        for r in rem:
            cols.update(r)
        ordered = sorted(cols, key=lambda c: (c in last, c))
        col = ordered[0]
        cands = [(i, r) for i, r in enumerate(rem) if col in r]
        best = None
        for i, r in cands:
            v = r[col]
            if v.is_constant():
                k = (0, len(r), i)
            elif is_unit(v, ctx.N):
                k = (1, len(r), i)
            else:
                k = (2, _size(v), len(r), i)
            if best is None or k < best[0]:
                best = (k, i)
        kind = "split" if best[0][0] == 2 else "pivot"
        return kind, best[1], col
    best = None
    for i, r in enumerate(rem):
        lr = len(r)
        for col, v in r.items():
            if v.is_constant():
                k = (col in last, 0, lr, -col, i)
                if best is None or k < best[0]:
                    best = (k, i, col)
    if best is not None and not best[0][0]:
        return "pivot", best[1], best[2]
    fallback = best
    best = None
    for i, r in enumerate(rem):
        for col, v in r.items():
            if col in last or v.is_constant():
                continue
            if is_unit(v, ctx.N):
                k = (0, len(r), _size(v), -col, i)
            else:
                k = (1, _size(v), len(r), -col, i)
            if best is None or k < best[0]:
                best = (k, i, col)
    if best is not None:
        return ("pivot" if best[0][0] == 0 else "split"), best[1], best[2]
    if fallback is not None:
        return "pivot", fallback[1], fallback[2]
    for i, r in enumerate(rem):
        for col, v in r.items():
            k = (0 if is_unit(v, ctx.N) else 1, _size(v), len(r), -col, i)
            if best is None or k < best[0]:
                best = (k, i, col)
    return ("pivot" if best[0][0] == 0 else "split"), best[1], best[2]


def _pivot_step(rem: list[Row], piv: dict[int, Row], ri: int, col: int, ctx: _Context):
    prow = rem[ri]
    p = prow[col]
    if p.is_constant():
        inv = 1 / p.constant_value()
        prow = {k: v.scale(inv) for k, v in prow.items()}
        p = prow[col]
    else:
        prow = _content_normalize(prow)
        p = prow[col]
    const = p.is_constant()
    factors = [_primitive(p)] if not const else []

    def elim(r: Row) -> Row:
        q = r.get(col)
        if q is None:
            return r
        if const:
            out = dict(r)
            for k, v in prow.items():
                w = out.get(k)
                w = -(q * v) if w is None else w - q * v
                if w:
                    out[k] = w
                else:
                    out.pop(k, None)
            out.pop(col, None)
            return out
        out = {}
        for k in set(r) | set(prow):
            if k == col:
                continue
            a = r.get(k)
            b = prow.get(k)
            w = (p * a if a is not None else p.space.zero()) - (q * b if b is not None else p.space.zero())
            w = ctx.reduce(w)
            if w:
                out[k] = w
        if out:
            out = _content_normalize(_strip_units(out, ctx.N, factors))
        return out

    new_rem = [elim(r) for i, r in enumerate(rem) if i != ri]
    new_piv = {c: elim(r) for c, r in piv.items()}
    new_piv[col] = prow
    return new_rem, new_piv


# -- nullspaces ---------------------------------------------------------------


def _normalize_vector(v: dict[int, Poly]) -> dict[int, Poly]:
    v = _content_normalize(v)
    first = v[min(v)]
    if first.leading()[1] < 0:
        v = {k: -x for k, x in v.items()}
    return dict(sorted(v.items()))


def nullspace_from_leaf(leaf: Leaf, cols: Sequence[int] | None = None) -> tuple[list[dict[int, Poly]], list[Poly]]:
    """One vector per free column (one-hot), denominators cleared."""
    space = leaf.space
    out, dens = [], []
    free = leaf.free if cols is None else list(cols)
    for f in free:
        involved = [(c, r) for c, r in leaf.pivots.items() if f in r]
        dist: list[Poly] = []
        for c, r in involved:
            pp = _primitive(r[c])
            if not pp.is_constant() and pp not in dist:
                dist.append(pp)
        L = _prod(dist, space)
        v: dict[int, Poly] = {f: L}
        for c, r in involved:
            piv = r[c]
            share = L.exact_div(piv)
            if share is None:
                # pivot altered modulo E: keep the vector polynomial by scaling everything
                v = {k: x * piv for k, x in v.items()}
                L = L * piv
                share = L.exact_div(piv)
            v[c] = -(r[f] * share)
        for d in dist:
            while True:
                q = {}
                for k, x in v.items():
                    y = x.exact_div(d)
                    if y is None:
                        break
                    q[k] = y
                else:
                    v = q
                    continue
                break
        v = {k: x for k, x in v.items() if x}
        v = _normalize_vector(v)
        out.append(v)
        dens.append(v[f])
    return out, dens


def _system_rows(sys: LinearSystem | Sequence[Row]) -> tuple[list[Row], int | None, Space | None]:
    if isinstance(sys, LinearSystem):
        return [dict(r) for r in sys.rows], sys.ncols, sys.space
    return [dict(r) for r in sys], None, None


def nullspace_rational(sys: LinearSystem | Sequence[Row], ncols: int | None = None, space: Space | None = None) -> list[dict[int, Poly]]:
    """Exact nullspace over Q of a parameter-free system."""
    rows, n0, sp0 = _system_rows(sys)
    ncols = n0 if ncols is None else ncols
    space = sp0 if space is None else space
    if any(not v.is_constant() for r in rows for v in r.values()):
        raise UsageError("nullspace_rational needs a parameter-free system")
    return _rational_nullspace(rows, ncols, space)[0]


def _rational_nullspace(rows: list[Row], ncols: int, space: Space) -> tuple[list[dict[int, Poly]], list[int]]:
    qrows = [{k: v.constant_value() for k, v in r.items()} for r in rows]
    piv = _rational_rref(qrows)
    free = [c for c in range(ncols) if c not in piv]
    basis = []
    one = space.one()
    for f in free:
        v = {f: Q(1)}
        for c, r in piv.items():
            x = r.get(f)
            if x:
                v[c] = -x
        den = 1
        for x in v.values():
            den = gmpy2.lcm(den, x.denominator)
        vec = {k: space.const(x * den) for k, x in v.items()}
        basis.append(_normalize_vector(vec))
    return basis, free


def _rational_rref(rows: list[dict[int, Q]]) -> dict[int, dict[int, Q]]:
    """Incremental Gauss-Jordan; each row is reduced by existing pivots, then
    pivoted on its highest column."""
    piv: dict[int, dict[int, Q]] = {}
    for r in rows:
        r = {k: v for k, v in r.items() if v}
        # pivot rows are fully reduced, so one pass clears every pivot column
        for c in [c for c in r if c in piv]:
            x = r[c]
            for k, v in piv[c].items():
                w = r.get(k, 0) - x * v
                if w:
                    r[k] = w
                else:
                    r.pop(k, None)
        if not r:
            continue
        col = max(r)
        inv = 1 / r[col]
        r = {k: v * inv for k, v in r.items()}
        for c, pr in piv.items():
            x = pr.get(col)
            if x:
                for k, v in r.items():
                    w = pr.get(k, 0) - x * v
                    if w:
                        pr[k] = w
                    else:
                        pr.pop(k, None)
        piv[col] = r
    return piv


def rational_rank(rows: list[dict[int, Q]]) -> int:
    return len(_rational_rref([dict(r) for r in rows]))


def solve_parametric_linear(
    sys: LinearSystem | Sequence[Row],
    params: Sequence[str] | None = None,
    E: Sequence[Poly] = (),
    N: Sequence[Poly] = (),
    ncols: int | None = None,
    space: Space | None = None,
    max_branches: int = 256,
) -> CaseTree:
    """Case tree of a homogeneous system over Q[params].

    Parameter-free systems on an unconditioned branch take the rational fast
    path and yield a single branch.
    """
    rows, n0, sp0 = _system_rows(sys)
    ncols = n0 if ncols is None else ncols
    space = sp0 if space is None else space
    if ncols is None or space is None:
        raise UsageError("ncols and space are required for raw row lists")
    if all(v.is_constant() for r in rows for v in r.values()):
        ctx = _Context(space, E, N)
        if (ctx.gb and ctx.gb[0].is_constant()) or not branch_consistent(ctx.E, ctx.N, space):
            return CaseTree(())
        basis, free = _rational_nullspace(rows, ncols, space)
        free = tuple(free)
        return CaseTree(
            (Branch(ctx.E, ctx.N, tuple(basis), free, ncols - len(basis), ncols, tuple(space.one() for _ in basis)),)
        )
    splits: list[str] = []
    leaves = eliminate(rows, ncols, space, E, N, "global", max_branches=max_branches, splits=splits)
    branches = []
    for leaf in leaves:
        basis, dens = nullspace_from_leaf(leaf)
        branches.append(Branch(leaf.E, leaf.N, tuple(basis), tuple(leaf.free), leaf.rank, ncols, tuple(dens)))
    return CaseTree(tuple(branches), tuple(splits))

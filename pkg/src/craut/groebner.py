"""Buchberger's algorithm over Q, radical membership and comprehensive Groebner systems."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from functools import lru_cache
from operator import add, sub
from typing import Callable, Iterable, Sequence

from .core import Poly, Q, Space, param_space, parse_poly

log = logging.getLogger(__name__)

__all__ = [
    "PolyRing",
    "CGSTriple",
    "CGSOverflowError",
    "buchberger_reduced",
    "normal_form",
    "radical_membership",
    "ideal_contains",
    "same_radical",
    "comprehensive_groebner_system",
    "cgs_from_strings",
]

Exps = tuple[int, ...]
Terms = dict[Exps, Q]


def _grevlex(idx: Sequence[int]) -> Callable[[Exps], tuple]:
    rev = list(reversed(idx))

    def key(e):
        return (sum(e[j] for j in idx),) + tuple(-e[j] for j in rev)

    return key


def _lex(idx: Sequence[int]) -> Callable[[Exps], tuple]:
    def key(e):
        return tuple(e[j] for j in idx)

    return key


_ORDERS = {"grevlex": _grevlex, "lex": _lex}


@dataclass(frozen=True, eq=False)
class PolyRing:
    """A Space together with a monomial order.

    ``blocks`` lists groups of variable indices, most significant first; each
    block is ordered by ``orders[i]`` with its variables listed from largest to
    smallest.  A single block gives a plain order on all variables.
    """

    space: Space
    blocks: tuple[tuple[int, ...], ...]
    orders: tuple[str, ...]
    key: Callable[[Exps], tuple] = field(init=False, repr=False)

    def __post_init__(self):
        seen = sorted(j for b in self.blocks for j in b)
        if seen != list(range(self.space.nvars)):
            raise ValueError("blocks must partition the variables")
        if len(self.orders) != len(self.blocks) or any(o not in _ORDERS for o in self.orders):
            raise ValueError(f"unknown monomial order in {self.orders}")
        keys = [_ORDERS[o](b) for o, b in zip(self.orders, self.blocks)]
        if len(keys) == 1:
            object.__setattr__(self, "key", keys[0])
        else:
            object.__setattr__(self, "key", lambda e: tuple(k(e) for k in keys))

    @classmethod
    def grevlex(cls, space: Space, order: Sequence[int] | None = None) -> PolyRing:
        order = tuple(range(space.nvars)) if order is None else tuple(order)
        return cls(space, (order,), ("grevlex",))

    @classmethod
    def block(cls, space: Space, main: Sequence[int], params: Sequence[int], order: str = "grevlex") -> PolyRing:
        return cls(space, (tuple(main), tuple(params)), (order, order))

    def lm(self, p: Poly | Terms) -> Exps:
        terms = p.terms if isinstance(p, Poly) else p
        return max(terms, key=self.key)


# -- core Buchberger ----------------------------------------------------------


class _GPoly:
    __slots__ = ("terms", "lm", "lc", "sugar")

    def __init__(self, terms: Terms, key, sugar: int | None = None):
        self.terms = terms
        self.lm = max(terms, key=key)
        self.lc = terms[self.lm]
        self.sugar = max(sum(e) for e in terms) if sugar is None else sugar


def _divides(a: Exps, b: Exps) -> bool:
    return all(x <= y for x, y in zip(a, b))


def _lcm(a: Exps, b: Exps) -> Exps:
    return tuple(map(max, a, b))


def _coprime(a: Exps, b: Exps) -> bool:
    return not any(x and y for x, y in zip(a, b))


def _sub_multiple(f: Terms, c: Q, shift: Exps, g: Terms) -> None:
    """f -= c * x^shift * g, in place."""
    for e, v in g.items():
        t = tuple(map(add, e, shift))
        w = f.get(t)
        if w is None:
            f[t] = -c * v
        else:
            w = w - c * v
            if w:
                f[t] = w
            else:
                del f[t]


def _reduce(f: Terms, basis: Sequence[_GPoly], key, full: bool = True) -> Terms:
    f = dict(f)
    rem: Terms = {}
    while f:
        m = max(f, key=key)
        c = f[m]
        for g in basis:
            if _divides(g.lm, m):
                _sub_multiple(f, c / g.lc, tuple(map(sub, m, g.lm)), g.terms)
                break
        else:
            if not full:
                rem.update(f)
                return rem
            rem[m] = c
            del f[m]
    return rem


def _monic(terms: Terms, key) -> Terms:
    lc = terms[max(terms, key=key)]
    return {e: v / lc for e, v in terms.items()}


def _buchberger(polys: Iterable[Terms], key) -> list[Terms]:
    """Reduced Groebner basis (monic) of the given term dicts.

    Sugar selection with the Gebauer-Moeller criteria.
    """
    basis: list[_GPoly] = []
    active: list[bool] = []
    pairs: list[tuple[int, int, Exps, int]] = []

    def update(h: _GPoly):
        nonlocal pairs
        r = len(basis)
        cand = []
        for i, g in enumerate(basis):
            if active[i]:
                l = _lcm(g.lm, h.lm)
                sug = max(g.sugar - sum(g.lm), h.sugar - sum(h.lm)) + sum(l)
                cand.append((i, l, sug, _coprime(g.lm, h.lm)))
        kept = []
        for idx, (i, l, sug, cop) in enumerate(cand):
            if cop:
                kept.append((i, l, sug, cop))
                continue
            others = cand[idx + 1 :] + kept
            if not any(_divides(o[1], l) for o in others):
                kept.append((i, l, sug, cop))
        new = [(i, r, l, sug) for i, l, sug, cop in kept if not cop]
        pairs = [
            p
            for p in pairs
            if not _divides(h.lm, p[2])
            or _lcm(basis[p[0]].lm, h.lm) == p[2]
            or _lcm(basis[p[1]].lm, h.lm) == p[2]
        ]
        pairs.extend(new)
        for i, g in enumerate(basis):
            if active[i] and _divides(h.lm, g.lm):
                active[i] = False
        basis.append(h)
        active.append(True)

    start = [_GPoly(_monic(f, key), key) for f in polys if f]
    start.sort(key=lambda g: key(g.lm))
    for g in start:
        t = _reduce(g.terms, basis, key)
        if t:
            h = _GPoly(_monic(t, key), key, g.sugar)
            if not any(h.lm):
                return [{h.lm: Q(1)}]
            update(h)
    while pairs:
        pairs.sort(key=lambda p: (p[3], key(p[2])))
        i, j, l, sug = pairs.pop(0)
        gi, gj = basis[i], basis[j]
        s: Terms = {}
        _sub_multiple(s, Q(-1), tuple(map(sub, l, gi.lm)), gi.terms)
        _sub_multiple(s, Q(1), tuple(map(sub, l, gj.lm)), gj.terms)
        t = _reduce(s, basis, key)
        if t:
            h = _GPoly(_monic(t, key), key, sug)
            if not any(h.lm):
                return [{h.lm: Q(1)}]
            update(h)
    live = [g for g, a in zip(basis, active) if a]
    live.sort(key=lambda g: key(g.lm))
    minimal = []
    for g in live:
        if not any(_divides(m.lm, g.lm) for m in minimal):
            minimal.append(g)
    out: list[Terms] = []
    for g in minimal:
        others = [h for h in minimal if h is not g]
        out.append(_monic(_reduce(g.terms, others, key), key))
    out.sort(key=lambda t: key(max(t, key=key)))
    return out


def buchberger_reduced(gens: Iterable[Poly], ring: PolyRing | None = None) -> list[Poly]:
    """Unique reduced Groebner basis, monic, sorted by increasing leading monomial."""
    gens = [g for g in gens if g]
    if not gens:
        return []
    space = gens[0].space
    ring = ring or PolyRing.grevlex(space)
    if space.imag >= 0 and any(g.degree_in(space.imag) for g in gens):
        raise ValueError("Groebner computations need rational coefficients (no I)")
    basis = _buchberger([g.terms for g in gens], ring.key)
    return [Poly(space, t).sorted() for t in basis]


def normal_form(f: Poly, basis: Sequence[Poly], ring: PolyRing | None = None) -> Poly:
    if not f or not basis:
        return f
    ring = ring or PolyRing.grevlex(f.space)
    gs = [_GPoly(b.terms, ring.key) for b in basis if b]
    return Poly(f.space, _reduce(f.terms, gs, ring.key))


def ideal_contains(f: Poly, gens: Sequence[Poly], ring: PolyRing | None = None) -> bool:
    return not normal_form(f, buchberger_reduced(gens, ring), ring)


# -- radical membership -------------------------------------------------------


def _extend_by_tau(space: Space) -> tuple[Space, list[int]]:
    names = tuple(space.names) + ("_tau",)
    n = len(names)
    return Space(names, tuple(space.weights) + (0,), tuple(space.partner) + (n - 1,), space.imag), list(range(n - 1))


@lru_cache(maxsize=65536)
def _radical_cached(space: Space, f_key: frozenset, e_key: frozenset) -> bool:
    f = Poly(space, dict(f_key))
    E = [Poly(space, dict(k)) for k in e_key]
    ext, idx = _extend_by_tau(space)
    m = idx + [-1]
    tau = ext.nvars - 1
    fe = f.map_space(ext, idx)
    gens = [e.map_space(ext, idx) for e in E]
    gens.append(ext.one() - ext.gen(tau) * fe)
    basis = _buchberger([g.terms for g in gens if g], PolyRing.grevlex(ext).key)
    return len(basis) == 1 and not any(next(iter(basis[0])))


def radical_membership(f: Poly, E: Sequence[Poly], ring: PolyRing | None = None) -> bool:
    """True iff f lies in the radical of <E> (Rabinowitsch: 1 in <E, 1 - tau*f>)."""
    E = [e for e in E if e]
    if not f:
        return True
    if not E:
        return False
    if f.is_constant():
        return _radical_cached(f.space, frozenset({(0,) * f.space.nvars: Q(1)}.items()), frozenset(frozenset(e.terms.items()) for e in E))
    return _radical_cached(f.space, frozenset(f.terms.items()), frozenset(frozenset(e.terms.items()) for e in E))


def same_radical(A: Sequence[Poly], B: Sequence[Poly]) -> bool:
    return all(radical_membership(a, B) for a in A) and all(radical_membership(b, A) for b in B)


# -- comprehensive Groebner systems ------------------------------------------


class CGSOverflowError(RuntimeError):
    pass


@dataclass(frozen=True)
class CGSTriple:
    """Region V(E) minus V(N) of parameter space, and the basis valid there.

    ``N`` is disjunctive: a point belongs to the region when E vanishes and at
    least one element of N does not.  An empty ``N`` means no restriction.
    Polynomials live in the joint (variables + parameters) space.
    """

    E: tuple[Poly, ...]
    N: tuple[Poly, ...]
    G: tuple[Poly, ...]

    def contains(self, point: dict[int, object]) -> bool:
        if any(e.evaluate(point) for e in self.E):
            return False
        return not self.N or any(n.evaluate(point) for n in self.N)


def _primitive_set(polys: Iterable[Poly]) -> list[Poly]:
    seen, out = set(), []
    for p in polys:
        if not p:
            continue
        p = p.primitive().sorted()
        if p not in seen:
            seen.add(p)
            out.append(p)
    return out


def _consistent(E: Sequence[Poly], N: Sequence[Poly]) -> bool:
    """V(E) minus the common zeros of N is nonempty (over the algebraic closure)."""
    return any(not radical_membership(n, E) for n in N)


def _clean_N(E: Sequence[Poly], N: Sequence[Poly]) -> list[Poly]:
    """Drop members that vanish on V(E); they do not enlarge the region."""
    return [n for n in _primitive_set(N) if not radical_membership(n, E)]


def _display_N(N: Sequence[Poly]) -> tuple[Poly, ...]:
    return tuple(n for n in N if not n.is_constant())


def comprehensive_groebner_system(
    gens: Sequence[Poly],
    params: Sequence[int],
    variables: Sequence[int],
    order: str = "grevlex",
    max_branches: int = 64,
    max_depth: int = 32,
) -> list[CGSTriple]:
    """Comprehensive Groebner system of ``gens`` in Q[params][variables].

    ``variables`` are listed from largest to smallest in the monomial order and
    the block order puts all of them above the parameters.  Branching follows
    the vanishing of leading coefficients of a Groebner basis in the block
    order; inconsistent branches are pruned with radical membership.
    """
    gens = [g for g in gens if g]
    if not gens:
        return []
    space = gens[0].space
    ring = PolyRing.block(space, variables, params, order)
    key = ring.key
    pset = set(params)
    pring = PolyRing.block(space, params, variables, order)
    out: list[CGSTriple] = []
    one = space.one()

    def is_param_poly(p: Poly) -> bool:
        return all(not x or j in pset for e in p.terms for j, x in enumerate(e))

    def lead_coeff(g: Poly) -> Poly:
        lm = max(g.terms, key=key)
        vpart = tuple(lm[j] if j not in pset else 0 for j in range(space.nvars))
        terms = {}
        for e, c in g.terms.items():
            if all(e[j] == vpart[j] for j in variables):
                terms[tuple(0 if j not in pset else e[j] for j in range(space.nvars))] = c
        return Poly(space, terms)

    def main_lm(g: Poly) -> Exps:
        lm = max(g.terms, key=key)
        return tuple(lm[j] for j in variables)

    def emit(t: CGSTriple):
        if len(out) >= max_branches:
            raise CGSOverflowError(f"more than {max_branches} branches")
        out.append(t)

    def pgb(E: list[Poly], N: list[Poly], F: list[Poly], depth: int):
        if depth > max_depth:
            raise CGSOverflowError(f"recursion deeper than {max_depth}")
        if not _consistent(E, N):
            return
        G = buchberger_reduced(list(F) + list(E), ring)
        if any(g.is_constant() for g in G):
            emit(CGSTriple(tuple(E), _display_N(_clean_N(E, N)), (one,)))
            return
        Gr = [g for g in G if is_param_poly(g)]
        Gr = buchberger_reduced(Gr, pring) if Gr else []
        if Gr:
            if not _consistent(Gr, N):
                emit(CGSTriple(tuple(E), _display_N(_clean_N(E, N)), (one,)))
                return
            NG = _clean_N(E, [n * g for n in N for g in Gr])
            if NG:
                emit(CGSTriple(tuple(E), _display_N(NG), (one,)))
        Gm_all = [g for g in G if not is_param_poly(g)]
        # minimal dividing set with respect to leading monomials in the main variables
        lms = [main_lm(g) for g in Gm_all]
        Gm = []
        for i, g in enumerate(Gm_all):
            if any(
                j != i and _divides(lms[j], lms[i]) and (lms[j] != lms[i] or j < i) for j in range(len(Gm_all))
            ):
                continue
            Gm.append(g)
        hs = [lead_coeff(g) for g in Gm]
        hprod = one
        for h in hs:
            hprod = hprod * h
        Nh = _clean_N(Gr, [n * hprod for n in N])
        if Nh:
            emit(CGSTriple(tuple(Gr), _display_N(Nh), tuple(g.primitive().sorted() for g in Gm)))
        prefix = one
        for h in hs:
            if not h.is_constant():
                E2 = buchberger_reduced(Gr + [h], pring)
                N2 = [n * prefix for n in N]
                if not (len(E2) == 1 and E2[0].is_constant()):
                    pgb(E2, N2, Gm_all, depth + 1)
            prefix = prefix * h

    pgb([], [one], gens, 0)
    return out


def cgs_from_strings(
    polys: Sequence[str], params: Sequence[str], variables: Sequence[str], **kw
) -> tuple[Space, list[CGSTriple]]:
    """Convenience wrapper: ``variables`` listed from largest to smallest."""
    space = param_space(list(variables) + list(params))
    gens = [parse_poly(space, s) for s in polys]
    nv = len(variables)
    res = comprehensive_groebner_system(gens, list(range(nv, space.nvars)), list(range(nv)), **kw)
    return space, res

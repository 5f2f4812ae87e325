"""Exact sparse polynomials over Q(i)[params] with weighted, bar-paired variables.

A polynomial lives in a :class:`Space`, which fixes the variable layout, the
weights, the conjugation pairing and (optionally) which slot holds the
imaginary unit ``I``.  The imaginary unit is stored as an ordinary variable and
``I^2 = -1`` is applied on multiplication, so every coefficient is a plain
rational.  A Gaussian-rational coefficient ``a + b*i`` therefore shows up as two
terms that differ only in the ``I`` exponent.
"""

from __future__ import annotations

import functools
import itertools
import re
from dataclasses import dataclass, field
from operator import add
from typing import Iterable, Iterator, Mapping, Sequence

from gmpy2 import mpq as Q

Exps = tuple[int, ...]

__all__ = [
    "Q",
    "Space",
    "VarTable",
    "Poly",
    "UsageError",
    "InhomogeneousError",
    "INHOMOGENEOUS",
    "param_space",
    "scalar_space",
    "coeff_conj",
    "poly_mul",
    "poly_conj",
    "substitute",
    "weighted_degree",
    "enumerate_weighted_monomials",
    "partial_derivative",
    "parse_poly",
    "ParseError",
]


class UsageError(ValueError):
    """Operands or arguments that do not belong together."""


class InhomogeneousError(ValueError):
    pass


INHOMOGENEOUS = "inhomogeneous"


@dataclass(frozen=True, eq=False)
class Space:
    """Variable layout for a family of polynomials.

    ``partner[j]`` is the conjugate variable of ``j`` (``j`` itself for real
    variables); ``imag`` is the index of ``I`` or -1.
    """

    names: tuple[str, ...]
    weights: tuple[int, ...]
    partner: tuple[int, ...]
    imag: int = -1
    index: dict[str, int] = field(init=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "index", {s: j for j, s in enumerate(self.names)})
        if len(self.index) != len(self.names):
            raise UsageError(f"duplicate variable names in {self.names}")
        p = self.partner
        if sorted(p) != list(range(len(p))) or any(p[p[j]] != j for j in range(len(p))):
            raise UsageError("bar-pairing must be an involution")

    @property
    def nvars(self) -> int:
        return len(self.names)

    @property
    def print_order(self) -> tuple[int, ...]:
        """Scalars (weight 0 variables) are printed before the geometric variables."""
        n = len(self.names)
        return tuple(j for j in range(n) if self.weights[j] == 0) + tuple(
            j for j in range(n) if self.weights[j] != 0
        )

    def key(self, e: Exps):
        """Sort key: weighted degree, total degree, then reverse lexicographic."""
        return (sum(map(int.__mul__, self.weights, e)), sum(e), tuple(-x for x in reversed(e)))

    def zero(self) -> Poly:
        return Poly(self, {})

    def const(self, c) -> Poly:
        c = Q(c)
        return Poly(self, {(0,) * self.nvars: c} if c else {})

    def one(self) -> Poly:
        return self.const(1)

    def gen(self, name_or_index, power: int = 1) -> Poly:
        j = self.index[name_or_index] if isinstance(name_or_index, str) else name_or_index
        e = [0] * self.nvars
        e[j] = power
        return Poly(self, {tuple(e): Q(1)}).normalized_imag()

    def monomial(self, e: Exps, c=1) -> Poly:
        return Poly(self, {tuple(e): Q(c)}).normalized_imag()

    def i(self) -> Poly:
        if self.imag < 0:
            raise UsageError("space has no imaginary unit")
        return self.gen(self.imag)


def param_space(params: Sequence[str], with_imag: bool = False) -> Space:
    """Q[params] (real parameters, weight 0), optionally extended by I.

    Cached, so equal parameter lists share one Space and their polynomials mix.
    """
    return _param_space(tuple(params), bool(with_imag))


@functools.lru_cache(maxsize=None)
def _param_space(params: tuple[str, ...], with_imag: bool) -> Space:
    names = tuple(params) + (("I",) if with_imag else ())
    n = len(names)
    return Space(names, (0,) * n, tuple(range(n)), n - 1 if with_imag else -1)


def scalar_space(params: Sequence[str]) -> Space:
    """The coefficient ring Q(i)[params] of CoeffScalar values."""
    return param_space(params, with_imag=True)


class VarTable(Space):
    """z1..zn, bz1..bzn, w1..wk, bw1..bwk, parameters, I (in that order)."""

    def __init__(self, n: int, weights_w: Sequence[int], params: Sequence[str] = ()):
        weights_w = tuple(int(x) for x in weights_w)
        if n < 1:
            raise UsageError("CR dimension must be >= 1")
        if any(x < 1 for x in weights_w) or list(weights_w) != sorted(weights_w):
            raise UsageError(f"w weights must be positive and nondecreasing: {weights_w}")
        k = len(weights_w)
        names = (
            [f"z{j + 1}" for j in range(n)]
            + [f"bz{j + 1}" for j in range(n)]
            + [f"w{l + 1}" for l in range(k)]
            + [f"bw{l + 1}" for l in range(k)]
            + list(params)
            + ["I"]
        )
        weights = [1] * (2 * n) + list(weights_w) * 2 + [0] * (len(params) + 1)
        partner = (
            [n + j for j in range(n)]
            + list(range(n))
            + [2 * n + k + l for l in range(k)]
            + [2 * n + l for l in range(k)]
            + list(range(2 * n + 2 * k, len(names)))
        )
        super().__init__(tuple(names), tuple(weights), tuple(partner), len(names) - 1)
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "k", k)
        object.__setattr__(self, "weights_w", weights_w)
        object.__setattr__(self, "params", tuple(params))

    # index helpers (0-based)
    def z(self, j: int) -> int:
        return j

    def bz(self, j: int) -> int:
        return self.n + j

    def w(self, l: int) -> int:
        return 2 * self.n + l

    def bw(self, l: int) -> int:
        return 2 * self.n + self.k + l

    @property
    def ncr(self) -> int:
        """Number of z, bz, w, bw slots (the geometric part of an exponent vector)."""
        return 2 * self.n + 2 * self.k

    @property
    def holomorphic(self) -> tuple[int, ...]:
        return tuple(range(self.n)) + tuple(self.w(l) for l in range(self.k))

    @property
    def barred(self) -> tuple[int, ...]:
        return tuple(self.bz(j) for j in range(self.n)) + tuple(self.bw(l) for l in range(self.k))

    @property
    def param_slice(self) -> slice:
        return slice(self.ncr, self.ncr + len(self.params))

    def same_as(self, other: "VarTable") -> bool:
        return (
            isinstance(other, VarTable)
            and self.n == other.n
            and self.weights_w == other.weights_w
            and self.params == other.params
        )


class Poly:
    """Immutable sparse polynomial; ``terms`` maps exponent tuples to nonzero rationals."""

    __slots__ = ("space", "terms", "_hash")

    def __init__(self, space: Space, terms: dict[Exps, Q]):
        self.space = space
        self.terms = terms
        self._hash = None

    @classmethod
    def from_terms(cls, space: Space, items: Iterable[tuple[Sequence[int], object]]) -> Poly:
        """Build in canonical form: zero coefficients dropped, terms sorted."""
        acc: dict[Exps, Q] = {}
        for e, c in items:
            e = tuple(e)
            if len(e) != space.nvars:
                raise UsageError("exponent vector length does not match the space")
            acc[e] = acc.get(e, Q(0)) + Q(c)
        p = Poly(space, {e: c for e, c in acc.items() if c}).normalized_imag()
        return p.sorted()

    def sorted(self) -> Poly:
        key = self.space.key
        return Poly(self.space, dict(sorted(self.terms.items(), key=lambda t: key(t[0]), reverse=True)))

    def normalized_imag(self) -> Poly:
        j = self.space.imag
        if j < 0 or all(e[j] < 2 for e in self.terms):
            return self
        out: dict[Exps, Q] = {}
        for e, c in self.terms.items():
            if e[j] >= 2:
                if e[j] & 2:
                    c = -c
                e = e[:j] + (e[j] & 1,) + e[j + 1 :]
            v = out.get(e, 0) + c
            if v:
                out[e] = v
            else:
                out.pop(e, None)
        return Poly(self.space, out)

    # -- basic protocol -------------------------------------------------------
    def __bool__(self) -> bool:
        return bool(self.terms)

    def __len__(self) -> int:
        return len(self.terms)

    def __eq__(self, other) -> bool:
        if isinstance(other, Poly):
            return self.space is other.space and self.terms == other.terms
        if not self.terms:
            return other == 0
        if self.is_constant():
            return self.constant_value() == other
        return False

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(frozenset(self.terms.items()))
        return self._hash

    def items(self) -> Iterator[tuple[Exps, Q]]:
        """Terms in descending term order."""
        key = self.space.key
        return iter(sorted(self.terms.items(), key=lambda t: key(t[0]), reverse=True))

    def is_constant(self) -> bool:
        if not self.terms:
            return True
        if len(self.terms) != 1:
            return False
        (e,) = self.terms
        return not any(e)

    def constant_value(self) -> Q:
        return self.terms.get((0,) * self.space.nvars, Q(0))

    def _check(self, other: Poly):
        if other.space is not self.space:
            raise UsageError("polynomials belong to different variable tables")

    def _coerce(self, other) -> Poly:
        if isinstance(other, Poly):
            self._check(other)
            return other
        return self.space.const(other)

    # -- ring operations ------------------------------------------------------
    def __add__(self, other) -> Poly:
        other = self._coerce(other)
        if len(other.terms) > len(self.terms):
            a, b = other.terms, self.terms
        else:
            a, b = self.terms, other.terms
        out = dict(a)
        for e, c in b.items():
            v = out.get(e)
            if v is None:
                out[e] = c
            else:
                v = v + c
                if v:
                    out[e] = v
                else:
                    del out[e]
        return Poly(self.space, out)

    __radd__ = __add__

    def __neg__(self) -> Poly:
        return Poly(self.space, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other) -> Poly:
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> Poly:
        return self._coerce(other) - self

    def scale(self, c) -> Poly:
        c = Q(c)
        if not c:
            return self.space.zero()
        return Poly(self.space, {e: v * c for e, v in self.terms.items()})

    def __mul__(self, other) -> Poly:
        if not isinstance(other, Poly):
            return self.scale(other)
        self._check(other)
        a, b = self.terms, other.terms
        if len(a) < len(b):
            a, b = b, a
        j = self.space.imag
        out: dict[Exps, Q] = {}
        get = out.get
        for e2, c2 in b.items():
            for e1, c1 in a.items():
                e = tuple(map(add, e1, e2))
                c = c1 * c2
                if j >= 0 and e[j] >= 2:
                    if e[j] & 2:
                        c = -c
                    e = e[:j] + (e[j] & 1,) + e[j + 1 :]
                v = get(e)
                if v is None:
                    out[e] = c
                else:
                    v = v + c
                    if v:
                        out[e] = v
                    else:
                        del out[e]
        return Poly(self.space, out)

    __rmul__ = __mul__

    def __pow__(self, n: int) -> Poly:
        if n < 0:
            raise UsageError("negative power")
        result = self.space.one()
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    def mul_monomial(self, e: Exps, c=1) -> Poly:
        c = Q(c)
        return Poly(self.space, {tuple(map(add, e0, e)): v * c for e0, v in self.terms.items()}).normalized_imag()

    # -- structure ------------------------------------------------------------
    def conj(self) -> Poly:
        p, j = self.space.partner, self.space.imag
        out = {}
        for e, c in self.terms.items():
            if j >= 0 and e[j]:
                c = -c
            out[tuple(e[p[m]] for m in range(len(e)))] = c
        return Poly(self.space, out)

    def diff(self, var) -> Poly:
        j = self.space.index[var] if isinstance(var, str) else var
        out = {}
        for e, c in self.terms.items():
            if e[j]:
                out[e[:j] + (e[j] - 1,) + e[j + 1 :]] = c * e[j]
        return Poly(self.space, out)

    def degree_in(self, j: int) -> int:
        return max((e[j] for e in self.terms), default=0)

    def subs(self, var, value: Poly) -> Poly:
        """Replace variable ``var`` by the polynomial ``value``."""
        j = self.space.index[var] if isinstance(var, str) else var
        value = self._coerce(value)
        powers = [self.space.one()]
        rest: dict[Exps, dict[Exps, Q]] = {}
        for e, c in self.terms.items():
            rest.setdefault(e[j], {})[e[:j] + (0,) + e[j + 1 :]] = c
        out = self.space.zero()
        for m in sorted(rest):
            while len(powers) <= m:
                powers.append(powers[-1] * value)
            out = out + Poly(self.space, rest[m]) * powers[m]
        return out

    def subs_many(self, values: Mapping[int, Poly]) -> Poly:
        """Simultaneous substitution of several variables (values must not mention them)."""
        idx = sorted(values)
        if not idx:
            return self
        powers: dict[int, list[Poly]] = {j: [self.space.one()] for j in idx}

        def pw(j, m):
            lst = powers[j]
            while len(lst) <= m:
                lst.append(lst[-1] * values[j])
            return lst[m]

        groups: dict[tuple[int, ...], dict[Exps, Q]] = {}
        for e, c in self.terms.items():
            ms = tuple(e[j] for j in idx)
            e2 = list(e)
            for j in idx:
                e2[j] = 0
            groups.setdefault(ms, {})[tuple(e2)] = c
        out = self.space.zero()
        for ms, terms in groups.items():
            block = Poly(self.space, terms)
            for j, m in zip(idx, ms):
                if m:
                    block = block * pw(j, m)
            out = out + block
        return out

    def evaluate(self, values: Mapping[int, object]) -> Poly:
        """Specialize some variables to rational numbers."""
        out: dict[Exps, Q] = {}
        for e, c in self.terms.items():
            e2 = list(e)
            for j, v in values.items():
                if e[j]:
                    c = c * Q(v) ** e[j]
                    e2[j] = 0
            if c:
                t = tuple(e2)
                v = out.get(t, 0) + c
                if v:
                    out[t] = v
                else:
                    out.pop(t, None)
        return Poly(self.space, out)

    def wdeg_set(self) -> set[int]:
        w = self.space.weights
        return {sum(map(int.__mul__, w, e)) for e in self.terms}

    def homogeneous_part(self, d: int) -> Poly:
        w = self.space.weights
        return Poly(self.space, {e: c for e, c in self.terms.items() if sum(map(int.__mul__, w, e)) == d})

    def rational_content(self) -> Q:
        """Positive rational c with self/c having coprime integer coefficients."""
        import gmpy2

        if not self.terms:
            return Q(1)
        num = 0
        den = 1
        for c in self.terms.values():
            num = gmpy2.gcd(num, c.numerator)
            den = gmpy2.lcm(den, c.denominator)
        return Q(num, den)

    def exact_div(self, other: Poly) -> Poly | None:
        """Quotient self/other when the division is exact, else None."""
        self._check(other)
        if not other:
            raise ZeroDivisionError("division by the zero polynomial")
        if other.is_constant():
            return self.scale(1 / other.constant_value())
        j = self.space.imag
        if j >= 0 and any(e[j] for e in other.terms):
            # divide by the I-free norm other * sigma(other), sigma: I -> -I
            sig = Poly(self.space, {e: (-c if e[j] else c) for e, c in other.terms.items()})
            return (self * sig).exact_div(other * sig)
        key = self.space.key
        lb = max(other.terms, key=key)
        cb = other.terms[lb]
        rest = dict(self.terms)
        quot: dict[Exps, Q] = {}
        while rest:
            m = max(rest, key=key)
            if any(x < y for x, y in zip(m, lb)):
                return None
            shift = tuple(x - y for x, y in zip(m, lb))
            c = rest[m] / cb
            quot[shift] = c
            for e, v in other.terms.items():
                t = tuple(map(add, e, shift))
                w = rest.get(t, 0) - c * v
                if w:
                    rest[t] = w
                else:
                    rest.pop(t, None)
        return Poly(self.space, quot)

    def leading(self) -> tuple[Exps, Q]:
        key = self.space.key
        e = max(self.terms, key=key)
        return e, self.terms[e]

    def primitive(self) -> Poly:
        """Content removed and sign normalized (positive leading coefficient)."""
        if not self.terms:
            return self
        c = self.rational_content()
        if self.leading()[1] < 0:
            c = -c
        return self.scale(1 / c)

    def monic(self) -> Poly:
        if not self.terms:
            return self
        return self.scale(1 / self.leading()[1])

    def map_space(self, space: Space, index_map: Sequence[int]) -> Poly:
        """Move into ``space``; variable j goes to slot index_map[j] (-1: must be absent)."""
        n = space.nvars
        out: dict[Exps, Q] = {}
        for e, c in self.terms.items():
            e2 = [0] * n
            for j, x in enumerate(e):
                if x:
                    t = index_map[j]
                    if t < 0:
                        raise UsageError(f"variable {self.space.names[j]} has no image")
                    e2[t] += x
            t = tuple(e2)
            v = out.get(t, 0) + c
            if v:
                out[t] = v
            else:
                out.pop(t, None)
        return Poly(space, out).normalized_imag()

    def variables(self) -> set[int]:
        return {j for e in self.terms for j, x in enumerate(e) if x}

    def __repr__(self) -> str:
        return f"Poly({self})"

    def __str__(self) -> str:
        return format_poly(self)


def _fmt_coeff(c: Q) -> str:
    return str(c) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"


def format_monomial(names: Sequence[str], e: Sequence[int], order: Sequence[int] | None = None) -> str:
    order = range(len(e)) if order is None else order
    return "*".join(names[j] if e[j] == 1 else f"{names[j]}^{e[j]}" for j in order if e[j])


def format_poly(p: Poly) -> str:
    if not p.terms:
        return "0"
    names = p.space.names
    order = p.space.print_order
    parts = []
    for e, c in p.items():
        mono = format_monomial(names, e, order)
        if not mono:
            s = _fmt_coeff(abs(c))
        elif abs(c) == 1:
            s = mono
        else:
            s = f"{_fmt_coeff(abs(c))}*{mono}"
        parts.append(("-" if c < 0 else "+", s))
    first_sign, first = parts[0]
    out = ("-" if first_sign == "-" else "") + first
    for sign, s in parts[1:]:
        out += f" {sign} {s}"
    return out


# -- operation-level API ------------------------------------------------------


def coeff_conj(s: Poly) -> Poly:
    """Complex conjugation of a CoeffScalar (parameters are real)."""
    return s.conj()


def poly_mul(p: Poly, q: Poly) -> Poly:
    if p.space is not q.space:
        raise UsageError("polynomials belong to different variable tables")
    return p * q


def poly_conj(p: Poly) -> Poly:
    return p.conj()


def substitute(p: Poly, var, value: Poly) -> Poly:
    return p.subs(var, value)


def partial_derivative(p: Poly, var) -> Poly:
    return p.diff(var)


def weighted_degree(p: Poly) -> int | str:
    """Weighted degree of a homogeneous polynomial, or ``INHOMOGENEOUS``."""
    if not p.terms:
        raise InhomogeneousError("the zero polynomial has no weighted degree")
    ds = p.wdeg_set()
    return ds.pop() if len(ds) == 1 else INHOMOGENEOUS


def enumerate_weighted_monomials(space: Space, weight: int, allowed: Sequence) -> list[Exps]:
    """All monomials in the ``allowed`` variables of exactly the given weighted degree.

    Ordered by descending term order of ``space``.
    """
    if weight < 0:
        return []
    idx = [space.index[a] if isinstance(a, str) else a for a in allowed]
    if any(space.weights[j] <= 0 for j in idx):
        raise UsageError("only positive-weight variables can be enumerated")
    idx = sorted(set(idx))
    out: list[Exps] = []
    e = [0] * space.nvars

    def rec(pos: int, remaining: int):
        if pos == len(idx):
            if remaining == 0:
                out.append(tuple(e))
            return
        j = idx[pos]
        wj = space.weights[j]
        for m in range(remaining // wj + 1):
            e[j] = m
            rec(pos + 1, remaining - m * wj)
        e[j] = 0

    rec(0, weight)
    out.sort(key=space.key, reverse=True)
    return out


def brute_force_weighted_monomials(space: Space, weight: int, allowed: Sequence) -> set[Exps]:
    """Reference enumeration over the full exponent box [0, weight]^|allowed|."""
    idx = [space.index[a] if isinstance(a, str) else a for a in allowed]
    found = set()
    for combo in itertools.product(range(weight + 1), repeat=len(idx)):
        if sum(space.weights[j] * m for j, m in zip(idx, combo)) == weight:
            e = [0] * space.nvars
            for j, m in zip(idx, combo):
                e[j] = m
            found.add(tuple(e))
    return found


# -- expression parser --------------------------------------------------------


class ParseError(ValueError):
    """Malformed expression; ``pos`` is the 0-based offset of the offending token."""

    def __init__(self, msg: str, text: str, pos: int):
        line = text.count("\n", 0, pos) + 1
        col = pos - (text.rfind("\n", 0, pos) + 1) + 1
        super().__init__(f"{msg} at line {line}, column {col}")
        self.line, self.col, self.pos = line, col, pos


_TOKEN = re.compile(r"\s*(?:(\d+)|([A-Za-z_][A-Za-z_0-9]*)|(.))", re.S)


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    out = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m.group(0).strip() == "":
            break
        if m.group(1) is not None:
            out.append(("num", m.group(1), m.start(1)))
        elif m.group(2) is not None:
            out.append(("name", m.group(2), m.start(2)))
        else:
            ch = m.group(3)
            if ch not in "+-*/^()":
                raise ParseError(f"unexpected character {ch!r}", text, m.start(3))
            out.append(("op", ch, m.start(3)))
        pos = m.end()
    out.append(("end", "", len(text)))
    return out


def parse_poly(space: Space, text: str) -> Poly:
    """Parse ``+ - * / ^`` expressions over the names of ``space``.

    Division is only allowed by nonzero rational constants, so ``3/2*z1`` and
    ``(z1+bz1)/2`` both work.
    """
    toks = _tokenize(text)
    pos = 0

    def peek():
        return toks[pos]

    def take():
        nonlocal pos
        t = toks[pos]
        pos += 1
        return t

    def expr() -> Poly:
        sign = 1
        while peek()[0] == "op" and peek()[1] in "+-":
            if take()[1] == "-":
                sign = -sign
        acc = term() if sign > 0 else -term()
        while peek()[0] == "op" and peek()[1] in "+-":
            op = take()[1]
            t = term()
            acc = acc + t if op == "+" else acc - t
        return acc

    def term() -> Poly:
        acc = power()
        while peek()[0] == "op" and peek()[1] in "*/":
            _, op, at = take()
            if op == "*":
                acc = acc * power()
            else:
                d = power()
                if not d.is_constant() or not d:
                    raise ParseError("division by a non-constant or zero", text, at)
                acc = acc.scale(1 / d.constant_value())
        return acc

    def power() -> Poly:
        base = unary()
        if peek()[0] == "op" and peek()[1] == "^":
            take()
            kind, val, at = take()
            if kind != "num":
                raise ParseError("exponent must be a nonnegative integer", text, at)
            return base ** int(val)
        return base

    def unary() -> Poly:
        if peek()[0] == "op" and peek()[1] in "+-":
            neg = take()[1] == "-"
            u = unary()
            return -u if neg else u
        return atom()

    def atom() -> Poly:
        kind, val, at = take()
        if kind == "num":
            return space.const(int(val))
        if kind == "name":
            if val not in space.index:
                raise ParseError(f"unknown symbol {val!r}", text, at)
            return space.gen(val)
        if kind == "op" and val == "(":
            e = expr()
            k2, v2, at2 = take()
            if v2 != ")":
                raise ParseError("expected ')'", text, at2)
            return e
        raise ParseError(f"unexpected {'end of input' if kind == 'end' else repr(val)}", text, at)

    result = expr()
    kind, val, at = peek()
    if kind != "end":
        raise ParseError(f"unexpected {val!r}", text, at)
    return result.sorted()

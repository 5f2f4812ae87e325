"""Weighted homogeneous CR models ``w_j - bw_j = R_j(z, bz, w, bw)``."""

from __future__ import annotations

import functools
import json
import logging
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Any, Sequence

from .core import INHOMOGENEOUS, ParseError, Poly, VarTable, format_monomial, parse_poly, weighted_degree

log = logging.getLogger(__name__)

__all__ = [
    "CRModel",
    "ModelError",
    "StratificationError",
    "Violation",
    "validate_model",
    "restrict_to_M",
    "load_model",
    "model_from_dict",
    "model_to_dict",
    "builtin_model",
    "builtin_model_names",
]

MODELS_DIR = Path(__file__).with_name("models")


class ModelError(ValueError):
    """A model file or model definition that cannot be used."""


class StratificationError(ModelError):
    pass


@dataclass(frozen=True)
class Violation:
    kind: str
    equation: int  # 1-based index j of R_j, 0 for model-level problems
    detail: str
    fatal: bool = True

    def __str__(self) -> str:
        where = f"R{self.equation}: " if self.equation else ""
        tag = "" if self.fatal else " (warning)"
        return f"{where}{self.kind}{tag}: {self.detail}"


@dataclass(frozen=True, eq=False)
class CRModel:
    table: VarTable
    rhs: tuple[Poly, ...]
    name: str = "model"
    transitive: bool = True
    max_weight: int | None = None

    def __post_init__(self):
        if len(self.rhs) != self.table.k:
            raise ModelError(f"expected {self.table.k} right-hand sides, got {len(self.rhs)}")
        for r in self.rhs:
            if r.space is not self.table:
                raise ModelError("right-hand side built over a different variable table")

    @property
    def n(self) -> int:
        return self.table.n

    @property
    def k(self) -> int:
        return self.table.k

    @property
    def weights_w(self) -> tuple[int, ...]:
        return self.table.weights_w

    @property
    def params(self) -> tuple[str, ...]:
        return self.table.params

    @property
    def rho(self) -> int:
        return self.table.weights_w[-1]

    def defining_relation(self, j: int) -> Poly:
        """R_j - w_j + bw_j (0-based j), which vanishes on M."""
        t = self.table
        return self.rhs[j] - t.gen(t.w(j)) + t.gen(t.bw(j))

    @cached_property
    def bar_w_substitution(self) -> dict[int, Poly]:
        """bw_l expressed on M without any barred w, built in increasing weight."""
        t = self.table
        order = sorted(range(t.k), key=lambda l: (t.weights_w[l], l))
        subs: dict[int, Poly] = {}
        for l in order:
            r = self.rhs[l]
            used = {m for m in range(t.k) if r.degree_in(t.bw(m)) or r.degree_in(t.w(m))}
            bad = [m for m in used if t.weights_w[m] >= t.weights_w[l]]
            if bad:
                raise StratificationError(
                    f"R{l + 1} involves w{bad[0] + 1} whose weight is not below [w{l + 1}]"
                )
            expr = t.gen(t.w(l)) - r
            inner = {t.bw(m): subs[t.bw(m)] for m in used if t.bw(m) in subs}
            subs[t.bw(l)] = expr.subs_many(inner)
        return subs


def restrict_to_M(m: CRModel, p: Poly) -> Poly:
    """Eliminate every barred w from ``p`` using the defining equations."""
    t = m.table
    if p.space is not t:
        raise ModelError("polynomial does not belong to the model's variable table")
    used = {j: v for j, v in m.bar_w_substitution.items() if p.degree_in(j)}
    return p.subs_many(used) if used else p


def _support_str(t: VarTable, e) -> str:
    return format_monomial(t.names, e) or "1"


def _ratio_if_proportional(c: Poly, phi: Poly) -> bool:
    """True when every term of ``phi`` occurs in ``c`` with one common (parametric) ratio.

    Both polynomials live in the model table; coefficients are split into the
    z/bz part and the parameter/I part so the ratio may depend on parameters.
    """
    t = c.space
    ncr = t.ncr

    def split(p: Poly) -> dict[tuple, Poly]:
        out: dict[tuple, dict] = {}
        for e, v in p.terms.items():
            out.setdefault(e[:ncr], {})[(0,) * ncr + e[ncr:]] = v
        return {k: Poly(t, d) for k, d in out.items()}

    cs, ps = split(c), split(phi)
    if not ps or any(k not in cs for k in ps):
        return False
    keys = list(ps)
    k0 = keys[0]
    return all(cs[k] * ps[k0] == cs[k0] * ps[k] for k in keys[1:])


def validate_model(m: CRModel) -> list[Violation]:
    """Check homogeneity, anti-reality, pure terms and stratification.

    The Bloom-Graham ``u^alpha * Phi_j`` condition is reported with
    ``fatal=False``.
    """
    t = m.table
    out: list[Violation] = []
    unbarred = set(t.holomorphic)
    barred = set(t.barred)
    for j, r in enumerate(m.rhs):
        lj = t.weights_w[j]
        if not r:
            out.append(Violation("zero right-hand side", j + 1, "R_j must be nonzero"))
            continue
        d = weighted_degree(r)
        if d == INHOMOGENEOUS:
            bad = sorted(r.wdeg_set())
            out.append(Violation("inhomogeneous weight", j + 1, f"term weights {bad}, expected {lj}"))
        elif d != lj:
            out.append(Violation("inhomogeneous weight", j + 1, f"weight {d}, expected [w{j + 1}] = {lj}"))
        if r.conj() != -r:
            out.append(Violation("not anti-real", j + 1, "conj(R_j) must equal -R_j"))
        for e in r.terms:
            vs = {i for i, x in enumerate(e) if x}
            if not vs & barred or not vs & unbarred:
                out.append(Violation("pluriharmonic term", j + 1, f"pure monomial {_support_str(t, e)}"))
        for l in range(t.k):
            if (r.degree_in(t.w(l)) or r.degree_in(t.bw(l))) and t.weights_w[l] >= lj:
                out.append(
                    Violation("stratification", j + 1, f"uses w{l + 1} with [w{l + 1}] >= [w{j + 1}]")
                )
    if any(v.fatal for v in out):
        return out
    out.extend(_bloom_graham_ii(m))
    return out


def _bloom_graham_ii(m: CRModel) -> list[Violation]:
    """Terms u^alpha * Phi_j inside Phi_i (j < i), read off at v = 0."""
    t = m.table
    on_u = {t.bw(l): t.gen(t.w(l)) for l in range(t.k)}
    u_form = [r.subs_many(on_u) for r in m.rhs]
    pure = [r.evaluate({t.w(l): 0 for l in range(t.k)}) for r in u_form]
    out = []
    for i in range(t.k):
        groups: dict[tuple, dict] = {}
        for e, c in u_form[i].terms.items():
            alpha = tuple(e[t.w(l)] for l in range(t.k))
            if any(alpha):
                e2 = list(e)
                for l in range(t.k):
                    e2[t.w(l)] = 0
                groups.setdefault(alpha, {})[tuple(e2)] = c
        for alpha, terms in sorted(groups.items()):
            coeff = Poly(t, terms)
            wa = sum(a * w for a, w in zip(alpha, t.weights_w))
            for j in range(i):
                if t.weights_w[j] + wa != t.weights_w[i] or not pure[j]:
                    continue
                if _ratio_if_proportional(coeff, pure[j]):
                    mono = "*".join(f"u{l + 1}^{a}" if a > 1 else f"u{l + 1}" for l, a in enumerate(alpha) if a)
                    out.append(
                        Violation("Bloom-Graham (ii)", i + 1, f"contains a multiple of {mono}*Phi{j + 1}", fatal=False)
                    )
    return out


# -- model files --------------------------------------------------------------


def _param_names(raw: Sequence[Any]) -> list[str]:
    names = []
    for p in raw:
        if isinstance(p, str):
            names.append(p)
        elif isinstance(p, dict) and "name" in p:
            if p.get("domain", "real") != "real":
                raise ModelError(f"parameter {p['name']!r}: only real parameters are supported")
            names.append(p["name"])
        else:
            raise ModelError(f"bad parameter entry {p!r}")
    return names


def model_from_dict(doc: dict, name: str | None = None) -> CRModel:
    try:
        n = int(doc["cr_dim"])
        k = int(doc["codim"])
        weights = [int(x) for x in doc["weights_w"]]
        rhs_src = list(doc["rhs"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ModelError(f"malformed model document: {exc}") from None
    params = _param_names(doc.get("parameters", []))
    if len(weights) != k or len(rhs_src) != k:
        raise ModelError(f"codim {k} does not match weights_w/rhs lengths")
    try:
        table = VarTable(n, weights, params)
    except ValueError as exc:
        raise ModelError(str(exc)) from None
    rhs = []
    for j, src in enumerate(rhs_src):
        try:
            rhs.append(parse_poly(table, str(src)))
        except ParseError as exc:
            raise ModelError(f"rhs[{j}]: {exc}") from None
    return CRModel(
        table,
        tuple(rhs),
        name=name or doc.get("name", "model"),
        transitive=bool(doc.get("transitive", True)),
        max_weight=doc.get("max_weight"),
    )


def load_model(path: str | Path) -> CRModel:
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ModelError(f"{path}: {exc.msg} at line {exc.lineno}, column {exc.colno}") from None
    return model_from_dict(doc, name=doc.get("name", path.stem))


def model_to_dict(m: CRModel) -> dict:
    return {
        "name": m.name,
        "cr_dim": m.n,
        "codim": m.k,
        "weights_w": list(m.weights_w),
        "parameters": list(m.params),
        "rhs": [str(r) for r in m.rhs],
    }


def builtin_model_names() -> list[str]:
    return sorted(p.stem for p in MODELS_DIR.glob("*.json"))


@functools.lru_cache(maxsize=None)
def builtin_model(name: str) -> CRModel:
    """Bundled model by file stem; cached, so repeated calls share one variable table."""
    path = MODELS_DIR / f"{name}.json"
    if not path.exists():
        raise ModelError(f"no bundled model named {name!r}")
    return load_model(path)

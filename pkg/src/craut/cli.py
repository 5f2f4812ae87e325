"""Command line: ``craut run MODEL`` and ``craut cgs FILE``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Sequence

from .core import ParseError, UsageError
from .groebner import CGSOverflowError, cgs_from_strings
from .liealg import (
    AlgebraConfig,
    Context,
    GradedAlgebra,
    TerminationError,
    compute_component,
    compute_full_algebra,
    format_fraction,
)
from .linsolve import BranchOverflowError
from .model import CRModel, ModelError, builtin_model, builtin_model_names, load_model, validate_model
from .tangency import complex_rows, format_complex_row, tangency_data

log = logging.getLogger(__name__)

EXIT_OK, EXIT_INVALID, EXIT_TERMINATION = 0, 1, 2


@dataclass(frozen=True)
class RunConfig:
    model: str
    mode: str = "full"  # full | component | up-to | cgs
    t: int | None = None
    max_weight: int | None = None
    assume_fundamental: bool = False
    format: str = "text"
    show_systems: bool = False
    timing: bool = False

    def __post_init__(self):
        if self.mode not in ("full", "component", "up-to", "cgs"):
            raise UsageError(f"unknown mode {self.mode!r}")
        if self.mode in ("component", "up-to") and self.t is None:
            raise UsageError(f"mode {self.mode} needs a weight")
        if self.format not in ("text", "json"):
            raise UsageError(f"unknown format {self.format!r}")


@dataclass
class BranchReport:
    null: list[str]
    nonnull: list[str]
    components: dict[str, list[dict]]
    dims: dict[str, int]
    dim: int
    rho: int
    varrho: int | None = None
    rigid: bool | None = None
    fundamental: bool | None = None
    structure: list[list] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)


@dataclass
class Report:
    model: str
    mode: str
    branches: list[BranchReport]
    systems: list[dict] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)
    timing: float | None = None

    def to_dict(self) -> dict:
        d = asdict(self)
        if self.timing is None:
            d.pop("timing")
        return d

    @classmethod
    def from_dict(cls, d: dict) -> Report:
        return cls(
            model=d["model"],
            mode=d["mode"],
            branches=[BranchReport(**b) for b in d["branches"]],
            systems=list(d.get("systems", [])),
            warnings=list(d.get("warnings", [])),
            timing=d.get("timing"),
        )


def _ctx_strings(ctx: Context) -> tuple[list[str], list[str]]:
    return [str(p.sorted()) for p in ctx.E], [str(p.sorted()) for p in ctx.N]


def _gens_json(gens) -> list[dict]:
    return [{"coeffs": X.to_dict()} for X in gens]


def _branch_from_algebra(a: GradedAlgebra) -> BranchReport:
    null, nonnull = _ctx_strings(a.ctx)
    structure = [
        [i + 1, j + 1, [{"m": m + 1, "c": format_fraction(f)} for m, f in entry]] for i, j, entry in a.structure
    ]
    return BranchReport(
        null=null,
        nonnull=nonnull,
        components={str(t): _gens_json(g) for t, g in a.components.items()},
        dims={str(t): n for t, n in a.dims.items()},
        dim=a.dim,
        rho=a.rho,
        varrho=a.varrho,
        rigid=a.rigid,
        fundamental=a.fundamental,
        structure=structure,
        notes=list(a.notes),
    )


def _systems(m: CRModel, t: int, cumulative: bool) -> list[dict]:
    cb = compute_component(m, t, cumulative=cumulative)[0]
    a = cb.ansatz
    if not a.unknowns:
        return []
    out = [{"t": t, "unknowns": a.describe(), "equations": {}}]
    eqs = out[0]["equations"]
    for r in complex_rows(tangency_data(a)):
        eqs.setdefault(str(r.equation + 1), []).append(format_complex_row(r, a) + " = 0")
    return out


def run(cfg: RunConfig) -> tuple[Report, int]:
    """Execute the pipeline; returns the report and the exit code."""
    m = _load(cfg.model)
    warnings = []
    fatal = []
    for v in validate_model(m):
        (fatal if v.fatal else warnings).append(str(v))
    if fatal:
        return Report(m.name, cfg.mode, [], warnings=fatal + warnings), EXIT_INVALID
    if cfg.mode in ("component", "up-to") and cfg.t < -m.rho:
        raise UsageError(f"weight {cfg.t} is below -rho = {-m.rho}")
    t0 = time.perf_counter()
    systems = []
    if cfg.show_systems and cfg.mode in ("component", "up-to"):
        systems = _systems(m, cfg.t, cfg.mode == "up-to")
    branches = []
    if cfg.mode == "full":
        conf = AlgebraConfig(max_weight=cfg.max_weight, assume_fundamental=cfg.assume_fundamental)
        algs = compute_full_algebra(m, conf)
        branches = [_branch_from_algebra(a) for a in algs]
        for a in algs:
            warnings.extend(f"[{', '.join(_ctx_strings(a.ctx)[0]) or 'generic'}] {n}" for n in a.notes)
    else:
        for cb in compute_component(m, cfg.t, cumulative=cfg.mode == "up-to"):
            null, nonnull = _ctx_strings(cb.ctx)
            key = str(cfg.t) if cfg.mode == "component" else f"<={cfg.t}"
            branches.append(
                BranchReport(
                    null, nonnull, {key: _gens_json(cb.generators)}, {key: len(cb.generators)}, len(cb.generators), m.rho
                )
            )
    timing = round(time.perf_counter() - t0, 3) if cfg.timing else None
    return Report(m.name, cfg.mode, branches, systems, warnings, timing), EXIT_OK


def _load(spec: str) -> CRModel:
    p = Path(spec)
    if p.exists():
        return load_model(p)
    if spec in builtin_model_names():
        return builtin_model(spec)
    raise ModelError(f"{spec}: no such file or bundled model")


def emit_report(r: Report, fmt: str = "text") -> bytes:
    if fmt == "json":
        return (json.dumps(r.to_dict(), indent=2, ensure_ascii=False) + "\n").encode("utf-8")
    lines = [f"model: {r.model}"]
    for w in r.warnings:
        lines.append(f"warning: {w}")
    for s in r.systems:
        lines.append(f"ansatz for weight {s['t']}:")
        lines += [f"  {u}" for u in s["unknowns"]]
        for j, eqs in s["equations"].items():
            lines.append(f"Sys^{{{s['t']},{j}}}:")
            lines += [f"  {e}" for e in eqs]
    for bi, b in enumerate(r.branches, 1):
        lines.append(f"branch {bi}: null = {{{', '.join(b.null)}}}, nonnull = {{{', '.join(b.nonnull)}}}")
        n = 0
        for t, gens in b.components.items():
            lines.append(f"  g_{t}: dim {len(gens)}")
            for g in gens:
                n += 1
                lines.append(f"    X{n} = {_field_text(g['coeffs'])}")
        lines.append(f"  dim: {b.dim}")
        lines.append(f"  rho: {b.rho}")
        if b.varrho is not None:
            lines.append(f"  varrho: {b.varrho}")
            lines.append(f"  rigid: {str(b.rigid).lower()}")
            lines.append(f"  fundamental: {str(b.fundamental).lower()}")
        if b.structure:
            lines.append("  brackets:")
            for i, j, entry in b.structure:
                rhs = " + ".join(_term(e["c"], f"X{e['m']}") for e in entry).replace("+ -", "- ")
                lines.append(f"    [X{i}, X{j}] = {rhs}")
        for note in b.notes:
            lines.append(f"  note: {note}")
    if r.timing is not None:
        lines.append(f"time: {r.timing} s")
    return ("\n".join(lines) + "\n").encode("utf-8")


def _term(c: str, sym: str) -> str:
    if c == "1":
        return sym
    if c == "-1":
        return f"-{sym}"
    if " " in c:
        return f"({c})*{sym}"
    return f"{c}*{sym}"


def _field_text(coeffs: dict[str, str]) -> str:
    parts = []
    for slot, c in coeffs.items():
        if c == "1":
            parts.append(f"∂{slot}")
        elif c == "-1":
            parts.append(f"-∂{slot}")
        elif any(op in c[1:] for op in "+-"):
            parts.append(f"({c}) ∂{slot}")
        else:
            parts.append(f"{c} ∂{slot}")
    return " + ".join(parts).replace("+ -", "- ") or "0"


# -- cgs ----------------------------------------------------------------------


def run_cgs(path: str, fmt: str = "text") -> bytes:
    text = Path(path).read_text(encoding="utf-8")
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ModelError(f"{path}: {exc.msg} at line {exc.lineno}, column {exc.colno}") from None
    space, triples = cgs_from_strings(doc["polynomials"], doc["parameters"], doc["variables"])
    rows = [
        {
            "null": [str(p.sorted()) for p in tr.E],
            "nonnull": [str(p.sorted()) for p in tr.N],
            "basis": [str(p.sorted()) for p in tr.G],
        }
        for tr in triples
    ]
    if fmt == "json":
        return (json.dumps({"branches": rows}, indent=2) + "\n").encode("utf-8")
    out = []
    for i, r in enumerate(rows, 1):
        out.append(f"{i}: E = {{{', '.join(r['null'])}}}  N = {{{', '.join(r['nonnull'])}}}  G = {{{', '.join(r['basis'])}}}")
    return ("\n".join(out) + "\n").encode("utf-8")


# -- entry point --------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="craut", description=__doc__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="compute the algebra of a model (file path or bundled name)")
    r.add_argument("model")
    mode = r.add_mutually_exclusive_group()
    mode.add_argument("--full", action="store_true", help="all components with the stopping rule (default)")
    mode.add_argument("--component", type=int, metavar="T", help="only the weight-T component")
    mode.add_argument("--up-to", type=int, metavar="T", help="cumulative ansatz of all weights <= T")
    r.add_argument("--max-weight", type=int, metavar="N", help="compute g_0..g_N without the stopping rule")
    fund = r.add_mutually_exclusive_group()
    fund.add_argument("--assume-fundamental", action="store_true")
    fund.add_argument("--check-fundamental", action="store_true", help="bracket check of g_- (default)")
    r.add_argument("--format", choices=("text", "json"), default="text")
    r.add_argument("--show-systems", action="store_true", help="print the tangency systems per equation")
    r.add_argument("--timing", action="store_true", help="include wall time (breaks byte-identical output)")

    c = sub.add_parser("cgs", help="comprehensive Groebner system of a JSON input")
    c.add_argument("file")
    c.add_argument("--format", choices=("text", "json"), default="text")

    sub.add_parser("models", help="list bundled models")
    return p


def config_from_args(a: argparse.Namespace) -> RunConfig:
    if a.component is not None:
        mode, t = "component", a.component
    elif a.up_to is not None:
        mode, t = "up-to", a.up_to
    else:
        mode, t = "full", None
    return RunConfig(
        model=a.model,
        mode=mode,
        t=t,
        max_weight=a.max_weight,
        assume_fundamental=a.assume_fundamental,
        format=a.format,
        show_systems=a.show_systems,
        timing=a.timing,
    )


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    out = sys.stdout.buffer
    try:
        if args.command == "models":
            out.write(("\n".join(builtin_model_names()) + "\n").encode())
            return EXIT_OK
        if args.command == "cgs":
            out.write(run_cgs(args.file, args.format))
            return EXIT_OK
        cfg = config_from_args(args)
        report, code = run(cfg)
        out.write(emit_report(report, cfg.format))
        return code
    except TerminationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_TERMINATION
    except (ModelError, ParseError, UsageError, KeyError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (BranchOverflowError, CGSOverflowError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    finally:
        out.flush()

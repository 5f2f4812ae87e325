"""Comprehensive Groebner system of the four-branch example
{a x - b, b y - a, c x^2 - y, c y^2 - x} with parameters a, b, c."""

from __future__ import annotations

from craut.core import format_poly
from craut.groebner import cgs_from_strings

POLYS = ["a*x-b", "b*y-a", "c*x^2-y", "c*y^2-x"]


def main() -> int:
    _, triples = cgs_from_strings(POLYS, ["a", "b", "c"], ["x", "y"])
    for k, tr in enumerate(triples, 1):
        show = lambda ps: "{" + ", ".join(format_poly(p) for p in ps) + "}"
        print(f"branch {k}: null = {show(tr.E)}, nonnull = {show(tr.N)}")
        print(f"  basis = {show(tr.G)}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())

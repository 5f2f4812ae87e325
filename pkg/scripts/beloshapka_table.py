"""Recompute (rho, varrho, dim) for the bundled M1..M17 models and compare with
the published table.  Dimensions are printed per branch as "origin | others"."""

from __future__ import annotations

import argparse
import time

from craut.core import Q
from craut.liealg import compute_full_algebra
from craut.model import builtin_model

# name -> (rho, varrho, dim at zero parameters, dim otherwise)
PUBLISHED = {
    "m01": (2, 2, 8, None),
    "m02": (3, 0, 5, None),
    "m03": (3, 0, 7, None),
    "m04": (4, 0, 7, None),
    "m05": (4, 0, 9, 8),
    "m06": (4, 0, 10, None),
    "m07": (5, 0, 10, 9),
    "m08": (5, 0, 12, 10),
    "m09": (5, 0, 12, 11),
    "m10": (5, 0, 14, 12),
    "m11": (5, -1, 13, None),
    "m12": (5, -1, 14, None),
    "m13": (None, -1, 15, None),
    "m14": (None, -1, 16, None),
    "m15": (None, -1, 17, None),
    "m16": (None, -1, 18, None),
    "m17": (None, -1, 19, None),
}


def _fmt(left, right):
    return str(left) if right is None else f"{left} | {right}"


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("models", nargs="*", default=sorted(PUBLISHED))
    args = ap.parse_args(argv)
    print(f"{'model':6} {'rho':>4} {'varrho':>7} {'dim':>10} {'published':>10} {'secs':>6}  flags")
    for name in args.models:
        m = builtin_model(name)
        t0 = time.perf_counter()
        algs = compute_full_algebra(m)
        secs = time.perf_counter() - t0
        origin = {j: Q(0) for j in range(len(m.params))}
        left = [a.dim for a in algs if a.ctx.contains(origin)]
        right = sorted({a.dim for a in algs if not a.ctx.contains(origin)})
        got_left = left[0] if left else None
        got_right = None if not right or right == [got_left] else ",".join(map(str, right))
        rho, varrho, pl, pr = PUBLISHED[name]
        varrhos = sorted({a.varrho for a in algs})
        flags = []
        if rho is not None and m.rho != rho:
            flags.append("rho")
        if varrhos != [varrho]:
            flags.append(f"varrho (published {varrho})")
        if (got_left, got_right) != (pl, None if pr is None else str(pr)):
            flags.append("dim")
        vr = ",".join(map(str, varrhos))
        print(f"{name:6} {m.rho:>4} {vr:>7} {_fmt(got_left, got_right):>10} {_fmt(pl, pr):>10} {secs:6.2f}  {' '.join(flags)}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())

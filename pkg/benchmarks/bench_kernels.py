"""Compiled vs pure-Python kernels on the d = 5 fixture and a Fincke-Pohst search.

    python3 benchmarks/bench_kernels.py [--repeat 3] [--T 16 32 64]

Prints one line per case with the best time of each backend, the speedup,
and whether both backends returned the same result.
"""
from __future__ import annotations

import argparse
import math
import sys
import time
from pathlib import Path

import numpy as np

from quadsurf import kernels, load_pair
from quadsurf.enumerate import Annulus, Region, count_points
from quadsurf.lattice import lll, short_vectors

FIXTURE = Path(__file__).resolve().parent.parent / "fixtures" / "main_pair.txt"


def best_of(fn, repeat):
    out, best = None, float("inf")
    for _ in range(repeat):
        t = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t)
    return out, best


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--T", type=int, nargs="+", default=[16, 32, 64])
    ap.add_argument("--fp-dim", type=int, default=10)
    args = ap.parse_args(argv)
    if not kernels.have_compiled():
        print("compiled kernels not built; run `pip install -e . --no-build-isolation`")
        return 1
    spec = load_pair(FIXTURE)
    R = Region.box((0, 1))
    print(f"{'case':<28}{'cython s':>12}{'python s':>12}{'speedup':>10}  same")
    for T in args.T:
        ann = Annulus.ball(T)
        res = {}
        for b in ("cython", "python"):
            res[b] = best_of(lambda: count_points(spec.Q, spec.a, ann, spec.M, R, backend=b),
                             args.repeat)
        (cc, tc), (cp, tp) = res["cython"], res["python"]
        print(f"{'enumerate T=' + str(T):<28}{tc:>12.4f}{tp:>12.4f}{tp / tc:>10.1f}  {cc == cp}")

    rng = np.random.default_rng(0)
    n = args.fp_dim
    B, _ = lll(rng.standard_normal((n, n)))
    # about 1.8^n / 2 vectors: radius relative to the Gaussian heuristic
    vol_ball = np.pi ** (n / 2) / math.gamma(n / 2 + 1)
    bound = 1.8 * (abs(np.linalg.det(B)) / vol_ball) ** (1 / n)
    res = {}
    for b in ("cython", "python"):
        res[b] = best_of(lambda: short_vectors(B, bound, backend=b)[0], args.repeat)
    (xc, tc), (xp, tp) = res["cython"], res["python"]
    print(f"{'fincke-pohst d=' + str(n) + f' ({len(xc)} vec)':<28}{tc:>12.4f}{tp:>12.4f}"
          f"{tp / tc:>10.1f}  {np.array_equal(xc, xp)}")
    return 0


if __name__ == "__main__":
    sys.exit(main())

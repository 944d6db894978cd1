"""Integer points on Q(v) = a inside norm annuli, optionally with M(v) in R.

Denominators of Q and of the rows of M are cleared once, so the kernels
work on integers only.  Norm conditions are closed, ``t1 <= |v| <= t2``;
an :class:`Annulus` built with ``open_inner=True`` excludes the inner
sphere, which is how dyadic shells (T/2, T] are formed.
"""
from __future__ import annotations

import itertools
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Sequence

import numpy as np

from . import kernels
from .errors import BudgetExceeded, QuadsurfError
from .field import QuadScalar, as_fraction
from .forms import LinearMap, QuadraticForm
from .series import ExperimentSeries

_SAFE = 2 ** 62


# ---------------------------------------------------------------------------
# regions and annuli
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Region:
    """Finite union of closed boxes in R^s with rational endpoints, interiors disjoint."""

    boxes: tuple[tuple[tuple[Fraction, Fraction], ...], ...]
    dim: int

    def __init__(self, boxes: Sequence, dim: int | None = None):
        bx = []
        for b in boxes:
            sides = tuple((as_fraction(lo), as_fraction(hi)) for lo, hi in b)
            for lo, hi in sides:
                if lo > hi:
                    raise QuadsurfError(f"empty box side [{lo}, {hi}]")
            bx.append(sides)
        if dim is None:
            if not bx:
                raise QuadsurfError("dimension of an empty region must be given")
            dim = len(bx[0])
        if any(len(b) != dim for b in bx):
            raise QuadsurfError("boxes of mixed dimension")
        for b, c in itertools.combinations(bx, 2):
            if all(max(p[0], q[0]) < min(p[1], q[1]) for p, q in zip(b, c)):
                raise QuadsurfError("region boxes overlap")
        object.__setattr__(self, "boxes", tuple(bx))
        object.__setattr__(self, "dim", dim)

    @classmethod
    def box(cls, *sides) -> "Region":
        return cls([sides])

    @classmethod
    def empty(cls, dim: int) -> "Region":
        return cls([], dim)

    @classmethod
    def parse(cls, text: str) -> "Region":
        """``lo:hi[,lo:hi...]`` per box, boxes separated by ``;``."""
        boxes = []
        for part in text.split(";"):
            part = part.strip()
            if part:
                boxes.append([tuple(side.split(":")) for side in part.split(",")])
        if not boxes:
            raise QuadsurfError(f"empty region spec {text!r}")
        return cls(boxes)

    def volume(self) -> Fraction:
        return sum((math.prod((hi - lo for lo, hi in b), start=Fraction(1)) for b in self.boxes),
                   Fraction(0))

    def scaled(self, c) -> "Region":
        c = as_fraction(c)
        return Region([[(lo * c, hi * c) if c >= 0 else (hi * c, lo * c) for lo, hi in b]
                       for b in self.boxes], self.dim)

    def contains(self, point: Sequence) -> bool:
        """Exact membership for QuadScalar or rational coordinates."""
        return any(all(lo <= x <= hi for x, (lo, hi) in zip(point, b)) for b in self.boxes)

    def __str__(self):
        return ";".join(",".join(f"{lo}:{hi}" for lo, hi in b) for b in self.boxes)


@dataclass(frozen=True)
class Annulus:
    t1: Fraction
    t2: Fraction
    open_inner: bool = False

    def __init__(self, t1, t2, open_inner: bool = False):
        t1, t2 = as_fraction(t1), as_fraction(t2)
        if t1 < 0 or t2 < t1:
            raise QuadsurfError(f"need 0 <= t1 <= t2, got ({t1}, {t2})")
        object.__setattr__(self, "t1", t1)
        object.__setattr__(self, "t2", t2)
        object.__setattr__(self, "open_inner", open_inner)

    @classmethod
    def ball(cls, T) -> "Annulus":
        return cls(0, T)

    @classmethod
    def dyadic(cls, T) -> "Annulus":
        """(T/2, T]: the shared sphere goes to the inner shell."""
        T = as_fraction(T)
        return cls(T / 2, T, open_inner=True)

    def norm2_range(self) -> tuple[int, int]:
        lo2, hi2 = self.t1 * self.t1, self.t2 * self.t2
        nlo = math.floor(lo2) + 1 if self.open_inner else math.ceil(lo2)
        return nlo, math.floor(hi2)

    def contains_norm2(self, n: int) -> bool:
        nlo, nhi = self.norm2_range()
        return nlo <= n <= nhi


@dataclass
class SurfacePointSet:
    points: np.ndarray
    count: int
    exhausted: bool = True

    def __iter__(self) -> Iterator[tuple[int, ...]]:
        return (tuple(int(x) for x in p) for p in self.points)

    def __len__(self):
        return self.count

    def as_set(self) -> set:
        return set(self)


# ---------------------------------------------------------------------------
# integer preparation
# ---------------------------------------------------------------------------

def integer_gram(Q: QuadraticForm) -> tuple[np.ndarray, int]:
    """(L * gram as int64 or object array, L) with L the lcm of denominators."""
    L = 1
    for row in Q.gram:
        for x in row:
            L = math.lcm(L, x.denominator)
    G = [[int(x * L) for x in row] for row in Q.gram]
    big = max(abs(x) for row in G for x in row) >= 2 ** 31
    return np.array(G, dtype=object if big else np.int64), L


def _integer_rows(M: LinearMap):
    """Per row i: c_i and integer parts of c_i * M_i = X + Y*sqrt(D)."""
    scales, X, Y = [], [], []
    for row in M.entries:
        c = 1
        for e in row:
            c = math.lcm(c, e.rat.denominator, e.irr.denominator)
        scales.append(c)
        X.append([int(e.rat * c) for e in row])
        Y.append([int(e.irr * c) for e in row])
    return scales, X, Y


@dataclass
class _Plan:
    d: int
    perm: list[int]
    G: np.ndarray
    a: int | None          # None: a*L not integral, no solutions
    Mx: np.ndarray
    My: np.ndarray
    D: int
    boxes: np.ndarray
    plo: np.ndarray
    phi: np.ndarray
    coef_bound: int        # for the overflow guard


def _plan(Q: QuadraticForm, a, M: LinearMap | None, R: Region | None) -> _Plan:
    d = Q.dim
    Gi, L = integer_gram(Q)
    aL = as_fraction(a) * L
    a_int = aL.numerator if aL.denominator == 1 else None
    if M is None:
        perm = list(range(d))
        s = 0
        Mx = np.zeros((0, d), dtype=np.int64)
        My = np.zeros((0, d), dtype=np.int64)
        D = 1
        boxes = np.zeros((0, 0, 4), dtype=np.int64)
        plo = phi = np.zeros(0)
        cb = 0
    else:
        if R is None:
            raise QuadsurfError("a linear map needs a region")
        if M.cols != d or R.dim != M.rows:
            raise QuadsurfError("dimensions of Q, M and R disagree")
        s = M.rows
        scales, X, Y = _integer_rows(M)
        support = [j for j in range(d) if any(X[i][j] or Y[i][j] for i in range(s))]
        rest = [j for j in range(d) if j not in support]
        # solve the last coordinate from the quadratic; keep it outside the support if possible
        perm = support + rest
        Mx = np.array([[X[i][j] for j in perm] for i in range(s)], dtype=object)
        My = np.array([[Y[i][j] for j in perm] for i in range(s)], dtype=object)
        D = M.disc
        bx = []
        for b in R.boxes:
            sides = []
            for i, (lo, hi) in enumerate(b):
                lo, hi = lo * scales[i], hi * scales[i]
                sides.append([lo.numerator, lo.denominator, hi.numerator, hi.denominator])
            bx.append(sides)
        boxes = np.array(bx, dtype=object).reshape(len(bx), s, 4)
        if bx:
            plo = np.array([float(min(b[i][0] for b in R.boxes) * scales[i]) for i in range(s)])
            phi = np.array([float(max(b[i][1] for b in R.boxes) * scales[i]) for i in range(s)])
        else:
            plo, phi = np.ones(s), -np.ones(s)
        cb = max([1] + [abs(int(x)) for x in boxes.ravel()]) * \
            (int(np.abs(Mx).sum()) + int(np.abs(My).sum()) + 1)
    Gp = np.array([[Gi[p][q] for q in perm] for p in perm], dtype=object)
    return _Plan(d, perm, Gp, a_int, Mx, My, D, boxes, plo, phi, cb)


def _fits_int64(plan: _Plan, nhi: int) -> bool:
    T = math.isqrt(max(nhi, 0)) + 1
    g = int(np.abs(plan.G).sum()) + 1
    worst = max(g * T * T + abs(plan.a or 0), (g * T) ** 2, plan.coef_bound * T * (plan.D + 1))
    return worst < _SAFE


def _as64(x):
    return np.asarray(x, dtype=np.int64) if np.asarray(x).size else np.zeros(np.shape(x), dtype=np.int64)


def _run(plan: _Plan, nlo: int, nhi: int, edges, collect: bool, max_points: int,
         backend: str | None, first=None):
    if plan.a is None or nhi < max(nlo, 0) or (plan.boxes.shape[0] == 0 and plan.Mx.shape[0] > 0):
        return 0, np.zeros(len(edges), dtype=np.int64), np.zeros((0, plan.d), dtype=np.int64)
    B = math.isqrt(nhi)
    lo, hi = first if first is not None else (-B, B)
    if backend is None and not _fits_int64(plan, nhi):
        backend = "python"
    if backend is None and not kernels.have_compiled():
        backend = "python"
    if (backend or kernels.BACKEND) == "cython":
        args = (_as64(plan.G), plan.a, nlo, nhi, _as64(plan.Mx), _as64(plan.My), plan.D,
                _as64(plan.boxes), plan.plo, plan.phi, np.asarray(edges, dtype=np.int64))
    else:
        args = (plan.G, plan.a, nlo, nhi, plan.Mx, plan.My, plan.D, plan.boxes,
                plan.plo, plan.phi, list(edges))
    return kernels.search(*args, lo, hi, collect, max_points, backend=backend)


def _stripes(B: int, parts: int) -> list[tuple[int, int]]:
    parts = max(1, min(parts, 2 * B + 1))
    bounds = np.linspace(-B, B + 1, parts + 1).round().astype(int)
    return [(int(bounds[i]), int(bounds[i + 1]) - 1) for i in range(parts) if bounds[i] < bounds[i + 1]]


def _job(payload):
    plan, nlo, nhi, edges, collect, max_points, backend, first = payload
    return _run(plan, nlo, nhi, edges, collect, max_points, backend, first)


def _search(plan, nlo, nhi, edges, collect, max_points, backend, threads):
    if threads <= 1 or plan.a is None or nhi < 0:
        return _run(plan, nlo, nhi, edges, collect, max_points, backend)
    B = math.isqrt(nhi)
    # interleave many small stripes so the dense middle is shared out
    jobs = [(plan, nlo, nhi, edges, collect, max_points, backend, st)
            for st in _stripes(B, 4 * threads)]
    with ProcessPoolExecutor(max_workers=threads) as ex:
        parts = list(ex.map(_job, jobs))
    count = sum(p[0] for p in parts)
    if collect and count > max_points:
        raise BudgetExceeded(f"more than {max_points} points")
    hist = np.sum([p[1] for p in parts], axis=0) if parts else np.zeros(len(edges), dtype=np.int64)
    pts = np.concatenate([p[2] for p in parts]) if collect else None
    return count, hist, pts


def _unpermute_sorted(plan: _Plan, pts: np.ndarray) -> np.ndarray:
    if pts is None or len(pts) == 0:
        return np.zeros((0, plan.d), dtype=np.int64)
    out = np.empty_like(pts)
    out[:, plan.perm] = pts
    order = np.lexsort(out.T[::-1])
    return out[order]


# ---------------------------------------------------------------------------
# public operations
# ---------------------------------------------------------------------------

def enumerate_surface(Q: QuadraticForm, a, ann: Annulus, M: LinearMap | None = None,
                      R: Region | None = None, *, max_points: int = 20_000_000,
                      threads: int = 1, backend: str | None = None) -> SurfacePointSet:
    """All integer v with Q(v) = a in ``ann`` (and M(v) in R when given).

    Points come back in lexicographic order.  Passing M and R prunes inside
    the search; the result equals ``filter_points`` applied afterwards.
    """
    plan = _plan(Q, a, M, R)
    nlo, nhi = ann.norm2_range()
    count, _, pts = _search(plan, nlo, nhi, [], True, max_points, backend, threads)
    return SurfacePointSet(_unpermute_sorted(plan, pts), int(count))


def count_points(Q: QuadraticForm, a, ann: Annulus, M: LinearMap | None = None,
                 R: Region | None = None, *, threads: int = 1,
                 backend: str | None = None) -> int:
    plan = _plan(Q, a, M, R)
    nlo, nhi = ann.norm2_range()
    return int(_search(plan, nlo, nhi, [], False, 0, backend, threads)[0])


def norm_histogram(Q: QuadraticForm, a, edges: Sequence[int], M: LinearMap | None = None,
                   R: Region | None = None, *, threads: int = 1,
                   backend: str | None = None) -> np.ndarray:
    """Counts of points with |v|^2 in (edges[b-1], edges[b]]; one pass up to edges[-1]."""
    edges = sorted(set(int(e) for e in edges))
    plan = _plan(Q, a, M, R)
    return _search(plan, 0, edges[-1], edges, False, 0, backend, threads)[1]


def region_mask(M: LinearMap, R: Region, pts) -> np.ndarray:
    """Exact test M(v) in R for each row of ``pts`` (integer array)."""
    pts = np.asarray(pts)
    n = len(pts)
    if n == 0 or not R.boxes:
        return np.zeros(n, dtype=bool)
    scales, X, Y = _integer_rows(M)
    P = pts.astype(object)
    D = M.disc
    Xv = [P @ np.array(X[i], dtype=object) for i in range(M.rows)]
    Yv = [P @ np.array(Y[i], dtype=object) for i in range(M.rows)]
    keep = np.zeros(n, dtype=bool)
    for b in R.boxes:
        ok = np.ones(n, dtype=bool)
        for i, (lo, hi) in enumerate(b):
            lo, hi = lo * scales[i], hi * scales[i]
            ok &= _nonneg_vec(lo.denominator * Xv[i] - lo.numerator, lo.denominator * Yv[i], D)
            ok &= _nonneg_vec(hi.numerator - hi.denominator * Xv[i], -hi.denominator * Yv[i], D)
        keep |= ok
    return keep


def _nonneg_vec(A: np.ndarray, B: np.ndarray, D: int) -> np.ndarray:
    """Elementwise A + B*sqrt(D) >= 0 on object (Python int) arrays."""
    A = np.asarray(A, dtype=object)
    B = np.asarray(B, dtype=object)
    out = np.empty(A.shape, dtype=bool)
    for k, (x, y) in enumerate(zip(A.ravel(), B.ravel())):
        if y == 0:
            out.flat[k] = x >= 0
        elif x >= 0 and y >= 0:
            out.flat[k] = True
        elif x <= 0 and y <= 0:
            out.flat[k] = False
        elif x > 0:
            out.flat[k] = x * x >= y * y * D
        else:
            out.flat[k] = y * y * D >= x * x
    return out


def filter_points(S: SurfacePointSet, M: LinearMap, R: Region) -> SurfacePointSet:
    mask = region_mask(M, R, S.points)
    pts = S.points[mask]
    return SurfacePointSet(pts, int(mask.sum()), S.exhausted)


def exact_violations(Q: QuadraticForm, a, pts, M: LinearMap | None = None,
                     R: Region | None = None) -> int:
    """Number of rows of ``pts`` with Q(v) != a or (M given) M(v) not in R, in exact arithmetic."""
    pts = np.asarray(pts)
    if len(pts) == 0:
        return 0
    Gi, L = integer_gram(Q)
    P = pts.astype(object)
    q = np.einsum("ni,ij,nj->n", P, Gi.astype(object), P)
    bad = q != as_fraction(a) * L
    if M is not None:
        bad |= ~region_mask(M, R, pts)
    return int(bad.sum())


def brute_force_oracle(Q: QuadraticForm, a, ann: Annulus, M: LinearMap | None = None,
                       R: Region | None = None, *, budget: int = 10 ** 9) -> int:
    """Exhaustive scan of [-ceil(t2), ceil(t2)]^d; independent of the kernels."""
    d = Q.dim
    T = math.ceil(ann.t2)
    side = 2 * T + 1
    if side ** d > budget:
        raise BudgetExceeded(f"(2T+1)^d = {side ** d} exceeds the oracle budget {budget}")
    a = as_fraction(a)
    lo2, hi2 = ann.t1 ** 2, ann.t2 ** 2
    gram = np.array([[float(x) for x in row] for row in Q.gram])
    rng = np.arange(-T, T + 1)
    grid = np.stack(np.meshgrid(*([rng] * (d - 1)), indexing="ij"), -1).reshape(-1, d - 1) \
        if d > 1 else np.zeros((1, 0), dtype=np.int64)
    count = 0
    for x0 in rng:
        V = np.column_stack([np.full(len(grid), x0), grid]).astype(np.int64)
        n2 = (V * V).sum(1)
        # float prefilter, then exact confirmation
        qf = np.einsum("ni,ij,nj->n", V, gram, V)
        cand = np.nonzero(np.abs(qf - float(a)) < 1e-6 * (1 + np.abs(qf)))[0]
        for k in cand:
            v = [int(x) for x in V[k]]
            n = Fraction(int(n2[k]))
            if n > hi2 or n < lo2 or (ann.open_inner and n == lo2):
                continue
            if Q(v) != a:
                continue
            if M is not None and not R.contains(M(v)):
                continue
            count += 1
    return count


def count_series(Q: QuadraticForm, a, M: LinearMap | None, R: Region | None,
                 grid: Sequence, *, threads: int = 1, timing: bool = False,
                 backend: str | None = None) -> ExperimentSeries:
    """Per T: count in the ball A(0,T) and in the dyadic shell (T/2, T], from one pass."""
    cols = ("T", "count_ball", "count_annulus", "seconds")
    grid = [as_fraction(T) for T in grid]
    if any(b <= a_ for a_, b in zip(grid, grid[1:])):
        raise QuadsurfError("grid must be strictly increasing")
    series = ExperimentSeries(cols, meta={"a": str(a)})
    if not grid:
        return series
    t0 = time.perf_counter()
    edges = sorted({math.floor(T * T) for T in grid} | {math.floor(T * T / 4) for T in grid})
    hist = norm_histogram(Q, a, edges, M, R, threads=threads, backend=backend)
    cum = dict(zip(edges, np.cumsum(hist).tolist()))
    elapsed = time.perf_counter() - t0 if timing else 0.0
    for T in grid:
        ball = int(cum[math.floor(T * T)])
        inner = int(cum[math.floor(T * T / 4)])
        Tv = T.numerator if T.denominator == 1 else float(T)
        series.rows.append((Tv, ball, ball - inner, elapsed))
    return series

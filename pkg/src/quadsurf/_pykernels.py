"""Pure-Python enumeration kernel (fallback for :mod:`quadsurf._ckernels`).

``search`` enumerates integer v with Q(v) = a and nlo <= |v|^2 <= nhi, in
the coordinate order given.  Coordinates 0..d-2 are looped over, with
windows from the norm budget and, when a filter is present, from the
linear rows; the last coordinate is solved from the quadratic exactly.

Arguments (all integer arrays already permuted and denominator-cleared):

``G`` (d, d)        integer Gram matrix, Q(v) = v^T G v
``Mx``, ``My`` (s, d) rows of c_i * M_i split as Mx + My*sqrt(D)
``boxes`` (nb, s, 4) per box and row: lo_num, lo_den, hi_num, hi_den of c_i * R
``plo``, ``phi``    float bounding window per row, used only for pruning
``edges``           ascending norm^2 thresholds for the histogram
``first_lo/hi``     stripe on coordinate 0

Returns ``(count, hist, points or None)``.
"""
from __future__ import annotations

import math

import numpy as np

from .errors import BudgetExceeded


def _nonneg(A: int, B: int, D: int) -> bool:
    """A + B*sqrt(D) >= 0 for integers, D squarefree (or B == 0)."""
    if B == 0:
        return A >= 0
    if A >= 0 and B >= 0:
        return True
    if A <= 0 and B <= 0:
        return False
    if A > 0:
        return A * A >= B * B * D
    return B * B * D >= A * A


def search(G, a, nlo, nhi, Mx, My, D, boxes, plo, phi, edges,
           first_lo, first_hi, collect, max_points):
    G = [[int(x) for x in row] for row in np.asarray(G)]
    d = len(G)
    Mx = [[int(x) for x in row] for row in np.asarray(Mx)]
    My = [[int(x) for x in row] for row in np.asarray(My)]
    s = len(Mx)
    D = int(D)
    sD = math.sqrt(D)
    boxes = [[[int(x) for x in r] for r in b] for b in np.asarray(boxes)]
    plo = [float(x) for x in plo]
    phi = [float(x) for x in phi]
    edges = [int(x) for x in edges]
    a, nlo, nhi = int(a), int(nlo), int(nhi)
    Mf = [[Mx[i][k] + My[i][k] * sD for k in range(d)] for i in range(s)]
    rest_incl = [[math.sqrt(sum(m * m for m in Mf[i][k:])) for k in range(d)] for i in range(s)]
    rest_excl = [[math.sqrt(sum(m * m for m in Mf[i][k + 1:])) for k in range(d)] for i in range(s)]
    hist = [0] * len(edges)
    pts: list[tuple[int, ...]] = []
    v = [0] * d
    count = 0

    def in_region(X, Y):
        for box in boxes:
            if all(_nonneg(box[i][1] * X[i] - box[i][0], box[i][1] * Y[i], D)
                   and _nonneg(box[i][2] - box[i][3] * X[i], -box[i][3] * Y[i], D)
                   for i in range(s)):
                return True
        return False

    def emit(x, used, B, PX, PY):
        nonlocal count
        if abs(x) > B:
            return
        n = used + x * x
        if n < nlo or n > nhi:
            return
        if d == 1 and not first_lo <= x <= first_hi:
            return
        l = d - 1
        if s and not in_region([PX[i] + Mx[i][l] * x for i in range(s)],
                               [PY[i] + My[i][l] * x for i in range(s)]):
            return
        b = 0
        while b < len(edges) and n > edges[b]:
            b += 1
        if b < len(edges):
            hist[b] += 1
        if collect:
            if count >= max_points:
                raise BudgetExceeded(f"more than {max_points} points")
            pts.append(tuple(v[:l]) + (x,))
        count += 1

    def solve_last(used, q, lin, PX, PY):
        l = d - 1
        g, b, c = G[l][l], lin[l], q - a
        rem = nhi - used
        if rem < 0:
            return
        B = math.isqrt(rem)
        if g:
            disc = b * b - g * c
            if disc < 0:
                return
            r = math.isqrt(disc)
            if r * r != disc:
                return
            for num in ((-b + r, -b - r) if r else (-b,)):
                if num % g == 0:
                    emit(num // g, used, B, PX, PY)
        elif b:
            if c % (2 * b) == 0:
                emit(-c // (2 * b), used, B, PX, PY)
        elif c == 0:
            for x in range(-B, B + 1):
                emit(x, used, B, PX, PY)

    def rec(k, used, q, lin, PX, PY, PF):
        if k == d - 1:
            solve_last(used, q, lin, PX, PY)
            return
        rem = nhi - used
        if rem < 0:
            return
        B = math.isqrt(rem)
        lo, hi = -B, B
        if k == 0:
            lo, hi = max(lo, first_lo), min(hi, first_hi)
        if s:
            sr = math.sqrt(rem)
            for i in range(s):
                P = PF[i]
                rb = rest_incl[i][k] * sr
                tol = 1e-9 * (1.0 + abs(P) + rb)
                if P - rb > phi[i] + tol or P + rb < plo[i] - tol:
                    return
                m = Mf[i][k]
                if m != 0.0:
                    rb = rest_excl[i][k] * sr
                    tol = 1e-9 * (1.0 + abs(P) + rb + abs(m) * B)
                    wlo = plo[i] - P - rb - tol
                    whi = phi[i] - P + rb + tol
                    if m > 0:
                        fl, fh = math.ceil(wlo / m), math.floor(whi / m)
                    else:
                        fl, fh = math.ceil(whi / m), math.floor(wlo / m)
                    lo, hi = max(lo, fl), min(hi, fh)
                    if lo > hi:
                        return
        Gk = G[k]
        for x in range(lo, hi + 1):
            v[k] = x
            nlin = lin[:k + 1] + [lin[j] + Gk[j] * x for j in range(k + 1, d)]
            rec(k + 1, used + x * x, q + Gk[k] * x * x + 2 * x * lin[k], nlin,
                [PX[i] + Mx[i][k] * x for i in range(s)],
                [PY[i] + My[i][k] * x for i in range(s)],
                [PF[i] + Mf[i][k] * x for i in range(s)])

    rec(0, 0, 0, [0] * d, [0] * s, [0] * s, [0.0] * s)
    out = np.array(pts, dtype=object if nhi > 2 ** 60 else np.int64).reshape(-1, d) if collect else None
    return count, np.array(hist, dtype=np.int64), out


def short_vectors(R, bound2, half, max_count):
    """Integer x != 0 with |R x|^2 <= bound2 for upper-triangular R.

    With ``half`` the highest nonzero coordinate is positive, so one of
    each +-x pair is produced.  Returns an int64 array of shape (k, n).
    """
    R = np.asarray(R, dtype=float)
    n = R.shape[0]
    q = [R[i, i] ** 2 for i in range(n)]
    mu = [[R[i, j] / R[i, i] for j in range(n)] for i in range(n)]
    x = [0] * n
    out: list[list[int]] = []

    def rec(i, rem, top_zero):
        c = -sum(mu[i][j] * x[j] for j in range(i + 1, n))
        r = math.sqrt(max(rem, 0.0) / q[i])
        lo = math.ceil(c - r - 1e-9)
        hi = math.floor(c + r + 1e-9)
        if half and top_zero:
            lo = max(lo, 0)
        for xi in range(lo, hi + 1):
            t = (xi - c) ** 2 * q[i]
            if t > rem * (1 + 1e-12) + 1e-300:
                continue
            x[i] = xi
            if i == 0:
                if not (top_zero and xi == 0):
                    if len(out) >= max_count:
                        raise BudgetExceeded(f"more than {max_count} short vectors")
                    out.append(list(x))
            else:
                rec(i - 1, rem - t, top_zero and xi == 0)
        x[i] = 0

    rec(n - 1, float(bound2), True)
    return np.array(out, dtype=np.int64).reshape(-1, n)

"""Lattice utilities: LLL, short vectors, integer kernels, exterior powers.

Bases are stored as columns.  Integer routines work on Python ints so they
never overflow; the floating LLL tracks its unimodular transform exactly.
"""
from __future__ import annotations

import itertools
import math
from functools import lru_cache

import numpy as np

from . import kernels
from .errors import BudgetExceeded


# ---------------------------------------------------------------------------
# LLL
# ---------------------------------------------------------------------------

def lll(B: np.ndarray, delta: float = 0.99) -> tuple[np.ndarray, np.ndarray]:
    """LLL-reduce the columns of B.  Returns (B @ U, U) with U unimodular (int object array)."""
    B = np.array(B, dtype=float)
    n = B.shape[1]
    U = np.array([[int(i == j) for j in range(n)] for i in range(n)], dtype=object)
    cur = B.copy()

    def gso(M):
        Q, R = np.linalg.qr(M)
        diag = np.diag(R).copy()
        mu = R / np.where(diag == 0, 1.0, diag)[:, None]
        return diag * diag, mu.T        # mu[k, j] = <b_k, b*_j>/|b*_j|^2

    bstar2, mu = gso(cur)
    k = 1
    guard = 0
    while k < n:
        guard += 1
        if guard > 100000:
            break
        for j in range(k - 1, -1, -1):
            r = round(mu[k, j])
            if r:
                cur[:, k] -= r * cur[:, j]
                U[:, k] = U[:, k] - r * U[:, j]
                mu[k, :j + 1] -= r * mu[j, :j + 1]
        if bstar2[k] >= (delta - mu[k, k - 1] ** 2) * bstar2[k - 1]:
            k += 1
        else:
            cur[:, [k - 1, k]] = cur[:, [k, k - 1]]
            U[:, [k - 1, k]] = U[:, [k, k - 1]]
            cur = B @ U.astype(float)
            bstar2, mu = gso(cur)
            k = max(k - 1, 1)
    return B @ U.astype(float), U


# ---------------------------------------------------------------------------
# short vectors (Fincke-Pohst)
# ---------------------------------------------------------------------------

def short_vectors(B: np.ndarray, bound: float, *, half: bool = True,
                  max_count: int = 1_000_000, backend: str | None = None):
    """Integer x != 0 with |B x| <= bound, as (coefficients (k, n) int64, norms (k,)).

    With ``half`` only one of each pair +-x is returned.  Sorted by norm.
    """
    B = np.asarray(B, dtype=float)
    n = B.shape[1]
    R = np.linalg.qr(B, mode="r")
    R = R * np.sign(np.diag(R))[:, None]
    bound2 = float(bound) ** 2 * (1 + 1e-12) + 1e-300
    X = kernels.short_vectors(R, bound2, half, max_count, backend=backend)
    if X.shape[0] == 0:
        return np.zeros((0, n), dtype=np.int64), np.zeros(0)
    norms = np.linalg.norm(X @ B.T, axis=1)
    keep = norms <= float(bound) * (1 + 1e-12)
    X, norms = X[keep], norms[keep]
    order = np.lexsort((*X.T[::-1], norms))
    return X[order], norms[order]


# ---------------------------------------------------------------------------
# integer linear algebra
# ---------------------------------------------------------------------------

def integer_kernel(A) -> list[list[int]]:
    """Z-basis of {x in Z^n : A x = 0}, as a list of integer vectors (saturated)."""
    A = [[int(x) for x in row] for row in A]
    if not A:
        raise ValueError("need at least one row")
    m, n = len(A), len(A[0])
    # column operations on [A; I]; the identity part records the transform
    cols = [[A[i][j] for i in range(m)] + [int(i == j) for i in range(n)] for j in range(n)]
    r = 0
    for i in range(m):
        # gcd-reduce entries i of columns r..n-1 into column r
        while True:
            nz = [j for j in range(r, n) if cols[j][i] != 0]
            if not nz:
                break
            p = min(nz, key=lambda j: abs(cols[j][i]))
            cols[r], cols[p] = cols[p], cols[r]
            done = True
            for j in range(r + 1, n):
                if cols[j][i]:
                    q = cols[j][i] // cols[r][i]
                    cols[j] = [x - q * y for x, y in zip(cols[j], cols[r])]
                    if cols[j][i]:
                        done = False
            if done:
                r += 1
                break
        if r == n:
            break
    return [c[m:] for c in cols[r:]]


def hnf_rows(V) -> tuple[tuple[int, ...], ...]:
    """Row Hermite normal form of an integer matrix (zero rows dropped)."""
    M = [[int(x) for x in row] for row in V]
    if not M:
        return ()
    n = len(M[0])
    r = 0
    for c in range(n):
        while True:
            nz = [i for i in range(r, len(M)) if M[i][c] != 0]
            if not nz:
                break
            p = min(nz, key=lambda i: abs(M[i][c]))
            M[r], M[p] = M[p], M[r]
            if all(M[i][c] == 0 for i in range(r + 1, len(M))):
                break
            for i in range(r + 1, len(M)):
                q = M[i][c] // M[r][c]
                M[i] = [x - q * y for x, y in zip(M[i], M[r])]
        if r < len(M) and M[r][c] != 0:
            if M[r][c] < 0:
                M[r] = [-x for x in M[r]]
            for i in range(r):
                q = M[i][c] // M[r][c]
                M[i] = [x - q * y for x, y in zip(M[i], M[r])]
            r += 1
        if r == len(M):
            break
    return tuple(tuple(row) for row in M[:r])


def saturate(V) -> list[list[int]]:
    """Basis of (Q-span of the rows of V) intersected with Z^n."""
    V = [[int(x) for x in row] for row in V]
    n = len(V[0])
    K = integer_kernel(V)
    if not K:
        return [[int(i == j) for j in range(n)] for i in range(n)]
    return integer_kernel(K)


def int_rank(V) -> int:
    return len(hnf_rows(V))


# ---------------------------------------------------------------------------
# exterior powers
# ---------------------------------------------------------------------------

@lru_cache(maxsize=None)
def subsets(n: int, i: int) -> tuple[tuple[int, ...], ...]:
    return tuple(itertools.combinations(range(n), i))


@lru_cache(maxsize=None)
def _subset_index(n: int, i: int) -> dict:
    return {J: k for k, J in enumerate(subsets(n, i))}


def compound(B: np.ndarray, i: int) -> np.ndarray:
    """The i-th compound matrix: entry (I, J) is det B[I, J] over sorted i-subsets."""
    n = B.shape[0]
    S = subsets(n, i)
    C = np.empty((len(S), len(S)))
    for a, I in enumerate(S):
        rows = B[list(I)]
        for b, J in enumerate(S):
            C[a, b] = np.linalg.det(rows[:, list(J)])
    return C


def wedge_map(c, n: int, i: int) -> list[list[int]]:
    """Integer matrix of x -> x ^ w for w = sum_J c_J e_J in Lambda^i Z^n."""
    S = subsets(n, i)
    idx = _subset_index(n, i + 1)
    W = [[0] * n for _ in range(len(subsets(n, i + 1)))]
    for cJ, J in zip(c, S):
        cJ = int(cJ)
        if not cJ:
            continue
        for k in range(n):
            if k in J:
                continue
            sign = -1 if sum(1 for j in J if j < k) % 2 else 1
            K = tuple(sorted(J + (k,)))
            W[idx[K]][k] += sign * cJ
    return W


def decompose(c, n: int, i: int) -> list[list[int]] | None:
    """If w = sum c_J e_J is decomposable, a Z-basis of the saturated span U; else None."""
    if i == 0:
        return []
    if i == n:
        return [[int(a == b) for b in range(n)] for a in range(n)]
    K = integer_kernel(wedge_map(c, n, i))
    return K if len(K) == i else None


def covolume(B: np.ndarray, vectors) -> float:
    """sqrt(det(G^T G)) for G = B @ vectors (vectors as rows of coefficients)."""
    V = np.asarray(vectors, dtype=float)
    if V.ndim == 1:
        V = V[None, :]
    G = np.asarray(B, dtype=float) @ V.T
    if G.shape[1] == 0:
        return 1.0
    R = np.linalg.qr(G, mode="r")
    vol = float(np.prod(np.abs(np.diag(R))))
    scale = float(np.prod(np.linalg.norm(G, axis=0)))
    if vol <= 1e-13 * max(scale, 1e-300):
        raise ValueError("vectors are linearly dependent")
    return vol


__all__ = ["lll", "short_vectors", "integer_kernel", "hnf_rows", "saturate", "int_rank",
           "compound", "wedge_map", "decompose", "covolume", "subsets", "BudgetExceeded"]

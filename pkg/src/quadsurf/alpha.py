"""The alpha function of a unimodular lattice.

alpha_i(Delta) = max over Delta-rational i-dimensional subspaces U of
1/covol(U / U cap Delta), and alpha = max_i alpha_i.

Two searches are provided.

``wedge`` (default): covol(U) is the norm of the primitive vector
u_1 ^ ... ^ u_i in the lattice Lambda^i(Delta).  The minimal covolume is the
shortest *decomposable* vector of that lattice, found by enumerating
Lambda^i(Delta) in increasing norm up to the best subspace spanned by the
LLL basis.  Exhaustive, so the result is certified unless a budget trips.

``subsets``: spans of subsets of short vectors of Delta, made primitive by
saturation and deduplicated by Hermite normal form.  A Minkowski bound says
how long the vectors spanning an improving subspace could be; the result is
certified when the radius covers it and no subset cap was hit.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import BudgetExceeded, QuadsurfError
from .lattice import (compound, covolume, decompose, hnf_rows, lll, saturate,
                      short_vectors, subsets)


@dataclass(frozen=True)
class UnimodularLattice:
    basis: np.ndarray
    logdet_tol: float = 1e-8

    def __post_init__(self):
        B = np.array(self.basis, dtype=float)
        if B.ndim != 2 or B.shape[0] != B.shape[1]:
            raise QuadsurfError("basis must be square")
        det = abs(np.linalg.det(B))
        if not (1 - self.logdet_tol <= det <= 1 + self.logdet_tol):
            raise QuadsurfError(f"|det B| = {det} is not 1")
        object.__setattr__(self, "basis", B)

    @property
    def dim(self) -> int:
        return self.basis.shape[0]


@dataclass
class RationalSubspaceWitness:
    dim: int
    vectors: tuple[tuple[int, ...], ...]
    covolume: float


@dataclass
class AlphaResult:
    alpha: float
    per_degree: list[float]
    witnesses: list[RationalSubspaceWitness | None]
    certified: bool
    search_radius: float
    method: str = "wedge"
    bounds: list[float] = field(default_factory=list)


def _wedge_norms(B: np.ndarray, cols: list[int], i: int) -> list[tuple[float, tuple[int, ...]]]:
    return [(covolume(B, np.eye(B.shape[1])[list(J)]), J) for J in itertools.combinations(cols, i)]


def _degree_wedge(B: np.ndarray, Bl: np.ndarray, U: np.ndarray, i: int, max_vectors: int):
    """Minimal covolume of an i-dimensional Delta-rational subspace, exhaustively."""
    n = B.shape[0]
    # upper bound: the best subspace spanned by LLL basis vectors
    best_cov, best_J = min(_wedge_norms(Bl, list(range(n)), i))
    witness = [list(map(int, U[:, j])) for j in best_J]
    if i in (1, n - 1):
        C = compound(B, i)
        Cl, V = lll(C)
        X, norms = short_vectors(Cl, best_cov * (1 + 1e-9), max_count=max_vectors)
        if len(X):
            c = [int(x) for x in (V @ X[0].astype(object))]
            vecs = decompose(c, n, i)
            cov = covolume(B, vecs)
            if cov < best_cov:
                best_cov, witness = cov, vecs
        return best_cov, witness, best_cov
    C = compound(B, i)
    Cl, V = lll(C)
    X, norms = short_vectors(Cl, best_cov * (1 + 1e-9), max_count=max_vectors)
    for x, nr in zip(X, norms):
        if nr >= best_cov * (1 - 1e-12):
            break
        c = [int(t) for t in (V @ x.astype(object))]
        vecs = decompose(c, n, i)
        if vecs is None:
            continue
        cov = covolume(B, vecs)
        if cov < best_cov:
            best_cov, witness = cov, vecs
            break                       # increasing norm: first decomposable is minimal
    return best_cov, witness, best_cov


def _alpha_wedge(B: np.ndarray, max_vectors: int) -> AlphaResult:
    n = B.shape[0]
    Bl, U = lll(B)
    per = [1.0] * (n + 1)
    wit: list = [None] * (n + 1)
    certified = True
    radius = 0.0
    for i in range(1, n):
        try:
            cov, vecs, bound = _degree_wedge(B, Bl, U, i, max_vectors)
        except BudgetExceeded:
            certified = False
            cov, J = min(_wedge_norms(Bl, list(range(n)), i))
            vecs = [list(map(int, U[:, j])) for j in J]
            bound = cov
        radius = max(radius, bound)
        per[i] = 1.0 / cov
        wit[i] = RationalSubspaceWitness(i, tuple(tuple(v) for v in vecs), cov)
    per[n] = float(1.0 / abs(np.linalg.det(B)))
    return AlphaResult(max(per), per, wit, certified, radius, "wedge")


def _minkowski_radius(i: int, best: float, lambdas: list[float]) -> float:
    """Length bound for vectors spanning an i-dim subspace of covolume below ``best``."""
    Vi = math.pi ** (i / 2) / math.gamma(i / 2 + 1)
    prod = math.prod(lambdas[:i - 1]) if i > 1 else 1.0
    return (2 ** i / Vi) * best / prod


def _alpha_subsets(B: np.ndarray, radius: float, max_vectors: int, cap: int) -> AlphaResult:
    n = B.shape[0]
    X, norms = short_vectors(B, radius, max_count=max_vectors)
    per = [1.0] * (n + 1)
    wit: list = [None] * (n + 1)
    if len(X) == 0:
        raise QuadsurfError(f"no lattice vectors within radius {radius}")
    # successive minima of Delta (greedy independent prefix of the sorted list)
    lambdas, chosen = [], []
    for x, nr in zip(X, norms):
        if np.linalg.matrix_rank(np.array(chosen + [list(x)], dtype=float)) > len(chosen):
            chosen.append(list(x))
            lambdas.append(float(nr))
    certified = True
    vecs = [list(map(int, x)) for x in X]
    bounds = []
    for i in range(1, n):
        best, best_basis = math.inf, None
        seen = set()
        tried = 0
        for combo in itertools.combinations(range(len(vecs)), i):
            if tried >= cap:
                certified = False
                break
            S = [vecs[k] for k in combo]
            if np.linalg.matrix_rank(np.array(S, dtype=float)) < i:
                continue
            tried += 1
            sat = saturate(S)
            key = hnf_rows(sat)
            if key in seen:
                continue
            seen.add(key)
            cov = covolume(B, sat)
            if cov < best:
                best, best_basis = cov, sat
        if best_basis is None:
            # too few independent short vectors: fall back to the LLL basis
            Bl, U = lll(B)
            best, J = min(_wedge_norms(Bl, list(range(n)), i))
            best_basis = [list(map(int, U[:, j])) for j in J]
            certified = False
        per[i] = 1.0 / best
        wit[i] = RationalSubspaceWitness(i, tuple(tuple(v) for v in best_basis), best)
        if len(lambdas) >= i - 1:
            rho = _minkowski_radius(i, best, lambdas)
            bounds.append(rho)
            if rho > radius:
                certified = False
        else:
            certified = False
    per[n] = float(1.0 / abs(np.linalg.det(B)))
    return AlphaResult(max(per), per, wit, certified, radius, "subsets", bounds)


def alpha_of(L, radius: float | None = None, *, method: str = "wedge",
             max_vectors: int = 200_000, subset_cap: int = 5000) -> AlphaResult:
    """alpha of the lattice spanned by the columns of ``L`` (array or UnimodularLattice)."""
    B = L.basis if isinstance(L, UnimodularLattice) else np.asarray(L, dtype=float)
    if radius is not None and radius <= 0:
        raise QuadsurfError("radius must be positive")
    if method == "wedge":
        return _alpha_wedge(B, max_vectors)
    if method == "subsets":
        if radius is None:
            raise QuadsurfError("the subsets method needs a radius")
        return _alpha_subsets(B, radius, max_vectors, subset_cap)
    raise QuadsurfError(f"unknown method {method!r}")


def alpha(B, **kw) -> float:
    return alpha_of(B, **kw).alpha


# ---------------------------------------------------------------------------
# F_{f,g}(x) = sum over surface points of f(x v)
# ---------------------------------------------------------------------------

@dataclass
class PointCache:
    """Surface points with |v| <= radius, as produced by the enumerator."""

    points: np.ndarray
    radius: float


def F_of_lattice(f, x: np.ndarray, cache: PointCache) -> float:
    """sum_v f(x v) over cached surface points v.

    ``f`` must expose ``support_radius`` (f vanishes outside that ball) and be
    vectorized over rows.  Points v with |x v| <= support radius satisfy
    |v| <= |x^{-1}| * support radius, which the cache must cover.
    """
    x = np.asarray(x, dtype=float)
    need = np.linalg.norm(np.linalg.inv(x), 2) * f.support_radius
    if need > cache.radius * (1 + 1e-12):
        raise QuadsurfError(f"point cache radius {cache.radius} below the required {need:.6g}")
    if len(cache.points) == 0:
        return 0.0
    xv = cache.points.astype(float) @ x.T
    near = np.linalg.norm(xv, axis=1) <= f.support_radius
    if not near.any():
        return 0.0
    return float(np.sum(f(xv[near])))


def lattice_point_bound(support_radius: float, B: np.ndarray) -> float:
    """Upper bound on #(Delta cap ball(r)) of the form c * alpha(Delta).

    With rho = r the count is at most prod_i (1 + 2 r / lambda_i) (Henk),
    and each factor is at most (1 + 2r) / min(1, lambda_i); the product of
    1/lambda_i over the small minima is bounded by a constant times alpha.
    Returns the constant max(1, 1+2r)^d used for c(f).
    """
    d = np.asarray(B).shape[0]
    return (1 + 2 * support_radius) ** d

"""The diagonal flow a_t, Haar sampling on K, and spherical averages.

Coordinates are the canonical ones (b-basis): Q0 = head(v_1..v_s) +
2 v_{s+1} v_d + sum of squares over the r1 - 1 positive and r2 - 1 negative
middle coordinates.  K preserves Q0, the norm and the first s coordinates.
In the orthonormal f-basis with f_{s+1} = (b_{s+1}+b_d)/sqrt2 and
f_d = (b_{s+1}-b_d)/sqrt2 it is block diagonal, acting on

    L2 = span(f_{s+1}, positives)    (dimension r1)
    L3 = span(negatives, f_d)        (dimension r2).

Indices below are 0-based, so b_{s+1} is index s and b_d is index d-1.
"""
from __future__ import annotations

import math
import time
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate, stats

from .alpha import alpha_of
from .errors import BudgetExceeded, QuadsurfError
from .forms import QuadraticForm
from .lattice import lll, short_vectors
from .measure import PolarData, c1_constant


# ---------------------------------------------------------------------------
# flow
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DiagonalFlow:
    d: int
    s: int

    def __post_init__(self):
        if not 0 <= self.s <= self.d - 2:
            raise QuadsurfError(f"need 0 <= s <= d - 2, got s={self.s}, d={self.d}")

    def matrix(self, t: float) -> np.ndarray:
        diag = np.ones(self.d)
        diag[self.s] = math.exp(-t)
        diag[self.d - 1] = math.exp(t)
        return np.diag(diag)


def flow_matrix(d: int, s: int, t: float) -> np.ndarray:
    return DiagonalFlow(d, s).matrix(t)


def conjugated_flow(g: np.ndarray, s: int, t: float) -> np.ndarray:
    """g^-1 a_t g, the flow acting on the original coordinates."""
    g = np.asarray(g, dtype=float)
    return np.linalg.solve(g, flow_matrix(g.shape[0], s, t) @ g)


# ---------------------------------------------------------------------------
# Haar sampling on K
# ---------------------------------------------------------------------------

def f_basis(d: int, s: int) -> np.ndarray:
    """Orthogonal P whose columns are the f-basis written in the b-basis."""
    P = np.eye(d)
    h = 1 / math.sqrt(2)
    P[:, s] = 0
    P[:, d - 1] = 0
    P[s, s] = P[d - 1, s] = h
    P[s, d - 1], P[d - 1, d - 1] = h, -h
    return P


def _l2_l3(s: int, r1: int, r2: int) -> tuple[list[int], list[int]]:
    d = s + r1 + r2
    return list(range(s, s + r1)), list(range(s + r1, d))


def haar_block(rng: np.random.Generator, r: int, special: bool = True) -> np.ndarray:
    """Haar-random element of SO(r) (or O(r) when ``special`` is false)."""
    Z = rng.standard_normal((r, r))
    Qm, R = np.linalg.qr(Z)
    Qm = Qm * np.sign(np.diag(R))
    if special and np.linalg.det(Qm) < 0:
        Qm[:, 0] = -Qm[:, 0]
    return Qm


@dataclass
class CompactSampler:
    """Sampler for K = SO(r1) x SO(r2) (``orbit="O"`` gives O(r1) x O(r2))."""

    s: int
    r1: int
    r2: int
    seed: int = 0
    orbit: str = "SO"
    rng: np.random.Generator = field(init=False, repr=False)

    def __post_init__(self):
        if self.r1 < 1 or self.r2 < 1 or self.s < 0:
            raise QuadsurfError("need r1, r2 >= 1 and s >= 0")
        if self.orbit not in ("SO", "O"):
            raise QuadsurfError(f"orbit must be 'SO' or 'O', got {self.orbit!r}")
        self.rng = np.random.default_rng(self.seed)

    @property
    def d(self) -> int:
        return self.s + self.r1 + self.r2

    @property
    def basis_change(self) -> np.ndarray:
        return f_basis(self.d, self.s)

    def sample(self, n: int) -> np.ndarray:
        if n < 1:
            raise QuadsurfError("n must be >= 1")
        P = self.basis_change
        L2, L3 = _l2_l3(self.s, self.r1, self.r2)
        special = self.orbit == "SO"
        out = np.empty((n, self.d, self.d))
        for j in range(n):
            k = np.eye(self.d)
            k[np.ix_(L2, L2)] = haar_block(self.rng, self.r1, special)
            k[np.ix_(L3, L3)] = haar_block(self.rng, self.r2, special)
            out[j] = P @ k @ P.T
        return out


def haar_sample(sampler: CompactSampler, n: int) -> np.ndarray:
    return sampler.sample(n)


# ---------------------------------------------------------------------------
# spherical averages of alpha
# ---------------------------------------------------------------------------

@dataclass
class SphericalAverageSeries:
    t_grid: list[float]
    values: list[float]
    stderr: list[float]
    delta: float
    n: int
    excluded: list[float] = field(default_factory=list)
    seconds: float = 0.0

    def rows(self):
        return [(t, v, e, x) for t, v, e, x in zip(self.t_grid, self.values, self.stderr, self.excluded)]


def _mean_sem(x: np.ndarray) -> tuple[float, float]:
    if len(x) == 0:
        return math.nan, math.nan
    sem = float(np.std(x, ddof=1) / math.sqrt(len(x))) if len(x) > 1 else 0.0
    return float(np.mean(x)), sem


def spherical_alpha_average(B: np.ndarray, flow: DiagonalFlow, sampler: CompactSampler,
                            t_grid, delta: float = 1.0, n: int = 200, *,
                            max_vectors: int = 200_000) -> SphericalAverageSeries:
    """S(t) = mean over Haar k of alpha(a_t k B)^delta.

    The same k_1..k_n are used at every t.  Samples whose alpha could not be
    certified within ``max_vectors`` are excluded and counted.
    """
    if not 0 < delta <= 2:
        raise QuadsurfError("delta must lie in (0, 2]")
    B = np.asarray(B, dtype=float)
    if B.shape != (flow.d, flow.d) or sampler.d != flow.d:
        raise QuadsurfError("dimension mismatch between lattice, flow and sampler")
    start = time.perf_counter()
    ks = sampler.sample(n)
    vals, errs, excl = [], [], []
    for t in t_grid:
        a = flow.matrix(t)
        xs, bad = [], 0
        for k in ks:
            try:
                res = alpha_of(a @ k @ B, max_vectors=max_vectors)
            except BudgetExceeded:
                bad += 1
                continue
            if not res.certified:
                bad += 1
                continue
            xs.append(res.alpha ** delta)
        m, e = _mean_sem(np.array(xs))
        vals.append(m)
        errs.append(e)
        excl.append(bad / n)
    return SphericalAverageSeries(list(t_grid), vals, errs, delta, n, excl,
                                  time.perf_counter() - start)


# ---------------------------------------------------------------------------
# F_{f,g} along the flow
# ---------------------------------------------------------------------------

def F_value(f, Q: QuadraticForm, a, x: np.ndarray, *, max_vectors: int = 2_000_000) -> float:
    """sum of f(x v) over integer v with Q(v) = a.

    Only v with |x v| <= support radius contribute; they are found as short
    vectors of the lattice x Z^d, then tested against Q exactly.
    """
    x = np.asarray(x, dtype=float)
    total = 0.0
    if f.support_radius <= 0:
        return 0.0
    from fractions import Fraction
    a = Fraction(a)
    if a == 0:
        total += float(f(np.zeros((1, x.shape[0])))[0])
    Bl, U = lll(x)
    X, _ = short_vectors(Bl, f.support_radius, half=False, max_count=max_vectors)
    if len(X) == 0:
        return total
    V = (X.astype(object) @ U.T)
    pts = [v for v in V if Q(list(v)) == a]
    if pts:
        total += float(np.sum(f(np.array(pts, dtype=float) @ x.T)))
    return total


def spherical_F_average(f, Q: QuadraticForm, a, g: np.ndarray, flow: DiagonalFlow,
                        sampler: CompactSampler, t_grid, n: int = 200) -> SphericalAverageSeries:
    """Mean over Haar k of F_{f,g}(a_t k g), with common k across t."""
    g = np.asarray(g, dtype=float)
    start = time.perf_counter()
    ks = sampler.sample(n)
    vals, errs = [], []
    for t in t_grid:
        a_t = flow.matrix(t)
        xs = np.array([F_value(f, Q, a, a_t @ k @ g) for k in ks])
        m, e = _mean_sem(xs)
        vals.append(m)
        errs.append(e)
    return SphericalAverageSeries(list(t_grid), vals, errs, 1.0, n, [0.0] * len(vals),
                                  time.perf_counter() - start)


# ---------------------------------------------------------------------------
# the J approximation
# ---------------------------------------------------------------------------

def _gauss_grid(lo: float, hi: float, panels: int, order: int = 8):
    x, w = np.polynomial.legendre.leggauss(order)
    edges = np.linspace(lo, hi, panels + 1)
    h = np.diff(edges) / 2
    mid = (edges[:-1] + edges[1:]) / 2
    return (mid[:, None] + h[:, None] * x).ravel(), (h[:, None] * w).ravel()


def _middle_box(f, m: int, s: int) -> list[tuple[float, float]]:
    """Bounds for the middle coordinates outside of which f vanishes."""
    c = getattr(f, "center", None)
    outer = getattr(f, "outer", None)
    if c is not None and outer is not None:
        idx = range(s + 1, s + 1 + m)
        if np.isscalar(outer):
            return [(c[i] - outer, c[i] + outer) for i in idx]
        if all(np.isfinite(outer[i]) for i in idx):
            return [(c[i] - outer[i], c[i] + outer[i]) for i in idx]
    R = f.support_radius
    if not np.isfinite(R):
        raise QuadsurfError("f needs a finite support radius")
    return [(-R, R)] * m


def j_integral(f, data: PolarData, ell, r: float, *, nodes: int = 2_000_000) -> float:
    """J(ell, r) = r^-(d-s-2) * integral of f(ell, r, u, v_d(u)) du over the
    middle coordinates u, with v_d fixed by Q0 = a."""
    if r <= 0:
        raise QuadsurfError("r must be positive")
    s, r1, r2 = data.s, data.r1, data.r2
    d = s + r1 + r2
    m = d - s - 2
    ell = np.atleast_1d(np.asarray(ell, dtype=float))
    if len(ell) != s:
        raise QuadsurfError(f"ell must have {s} entries")
    head = data.head_matrix() if s else np.zeros((0, 0))
    q_ell = float(ell @ head @ ell) if s else 0.0
    signs = np.array([1.0] * (r1 - 1) + [-1.0] * (r2 - 1))

    def pts(U):
        U = np.atleast_2d(U)
        vd = (data.a - q_ell - U ** 2 @ signs) / (2 * r)
        X = np.empty((U.shape[0], d))
        X[:, :s] = ell
        X[:, s] = r
        X[:, s + 1:d - 1] = U
        X[:, d - 1] = vd
        return X

    if m == 0:
        return float(f(pts(np.zeros((1, 0))))[0])
    per_dim = max(8, int(nodes ** (1 / m)) // 8)
    grids = [_gauss_grid(lo, hi, per_dim) for lo, hi in _middle_box(f, m, s)]
    mesh = np.meshgrid(*[g[0] for g in grids], indexing="ij")
    wts = np.ones_like(mesh[0])
    for k, g in enumerate(grids):
        shape = [1] * m
        shape[k] = -1
        wts = wts * g[1].reshape(shape)
    U = np.stack([x.ravel() for x in mesh], axis=1)
    total = float(np.sum(f(pts(U)) * wts.ravel()))
    return total / r ** m


def _cap_dims(r: int) -> int:
    return 0 if r == 1 else 1 if r == 2 else r


def _cap_sampler(r: int, theta: float, U: np.ndarray):
    """Points on the cap {u in S^(r-1) : angle(u, e_0) <= theta} from uniforms U
    (n, _cap_dims(r)), uniform for the sphere measure, and the cap's share of it."""
    n = U.shape[0]
    if r == 1:
        return np.ones((n, 1)), 1.0
    theta = min(theta, math.pi)
    if r == 2:
        phi = theta * (2 * U[:, 0] - 1)
        return np.stack([np.cos(phi), np.sin(phi)], axis=1), theta / math.pi
    # polar angle has density sin^(r-2); invert its CDF on a fine grid
    grid = np.linspace(0, theta, 4097)
    dens = np.sin(grid) ** (r - 2)
    cdf = np.concatenate([[0], np.cumsum((dens[1:] + dens[:-1]) / 2 * np.diff(grid))])
    full = integrate.quad(lambda p: math.sin(p) ** (r - 2), 0, math.pi)[0]
    phi = np.interp(U[:, 0] * cdf[-1], cdf, grid)
    if r == 3:
        psi = 2 * math.pi * U[:, 1]
        dirs = np.stack([np.cos(psi), np.sin(psi)], axis=1)
    else:
        dirs = stats.norm.ppf(np.clip(U[:, 1:], 1e-12, 1 - 1e-12))
        dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    return np.concatenate([np.cos(phi)[:, None], np.sin(phi)[:, None] * dirs], axis=1), cdf[-1] / full


@dataclass
class JApproximation:
    error: float
    estimate: float
    j: float
    stderr: float
    t: float


def j_approximation(f, data: PolarData, v, t: float, *, n: int = 500, seed: int = 0,
                    orbit: str = "O") -> JApproximation:
    """Compare C1 e^{(d-s-2)t} * mean over K of f(a_t k v) with J(M0(v), |v| e^-t).

    The K-orbit of v is {ell} x rho2 S^(r1-1) x rho3 S^(r2-1).  f(a_t w) can
    only be nonzero near the poles f_{s+1} and f_d, so each sphere is sampled
    on the cap that the support allows, weighted by its measure.  The cap
    parameters come from a scrambled Sobol sequence; ``stderr`` is the naive
    i.i.d. figure and overstates the actual error.
    ``orbit="O"`` averages over O(r1) x O(r2); it differs from SO only when a
    block has size 1, where O(1) = {+-1} carries the factor 2 built into C1.
    """
    s, r1, r2 = data.s, data.r1, data.r2
    d = s + r1 + r2
    m = d - s - 2
    v = np.asarray(v, dtype=float)
    if v.shape != (d,):
        raise QuadsurfError(f"v must have {d} entries")
    P = f_basis(d, s)
    w = P.T @ v
    L2, L3 = _l2_l3(s, r1, r2)
    rho2, rho3 = float(np.linalg.norm(w[L2])), float(np.linalg.norm(w[L3]))
    if w[s] <= 0:
        raise QuadsurfError("v must lie in the positive half-space")
    ell = w[:s]
    j = j_integral(f, data, ell, float(np.linalg.norm(v)) * math.exp(-t))
    if getattr(f, "max_value", None) == 0:
        return JApproximation(abs(j), 0.0, j, 0.0, t)

    rng = np.random.default_rng(seed)
    # |middle part| of a point on each sphere bounds the cap angle
    ext = [max(abs(lo), abs(hi)) for lo, hi in _middle_box(f, m, s)]
    b2 = math.hypot(*ext[:r1 - 1]) if r1 > 1 else 0.0
    b3 = math.hypot(*ext[r1 - 1:]) if r2 > 1 else 0.0
    th2 = math.asin(b2 / rho2) if rho2 > b2 else math.pi
    th3 = math.asin(b3 / rho3) if rho3 > b3 else math.pi
    k2, k3 = _cap_dims(r1), _cap_dims(r2)
    if k2 + k3:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", UserWarning)     # n need not be a power of 2
            U = stats.qmc.Sobol(k2 + k3, scramble=True, seed=rng).random(n)
    else:
        U = np.zeros((n, 0))
    u2, frac2 = _cap_sampler(r1, th2, U[:, :k2])
    u3, frac3 = _cap_sampler(r2, th3, U[:, k2:])
    # L3 pole is f_d, the last of its coordinates
    u3 = u3[:, ::-1]
    if r2 == 1:
        if orbit == "O":
            frac3 = 0.5
        elif w[d - 1] < 0:
            frac3 = 0.0
    if r1 == 1 and orbit == "O":
        frac2 = 0.5
    W = np.empty((n, d))
    W[:, :s] = ell
    W[:, L2] = rho2 * u2
    W[:, L3] = rho3 * u3
    X = (W @ P.T) @ flow_matrix(d, s, t).T
    vals = f(X) * frac2 * frac3
    C = c1_constant(r1, r2, s, d) * math.exp(m * t)
    est = C * float(np.mean(vals))
    err = C * float(np.std(vals, ddof=1) / math.sqrt(n))
    return JApproximation(abs(est - j), est, j, err, t)


def j_approximation_error(f, data: PolarData, v, t: float, **kw) -> float:
    return j_approximation(f, data, v, t, **kw).error


def surface_vector(data: PolarData, ell, norm: float, rng: np.random.Generator) -> np.ndarray:
    """A random v with Q0(v) = a, M0(v) = ell and |v| = norm, in the positive half-space."""
    s, r1, r2 = data.s, data.r1, data.r2
    d = s + r1 + r2
    ell = np.atleast_1d(np.asarray(ell, dtype=float))
    head = data.head_matrix() if s else np.zeros((0, 0))
    q = data.a - (float(ell @ head @ ell) if s else 0.0)
    rest2 = norm ** 2 - float(ell @ ell)
    rho2sq, rho3sq = (rest2 + q) / 2, (rest2 - q) / 2
    if rho2sq <= 0 or rho3sq <= 0:
        raise QuadsurfError("norm too small for this ell")
    L2, L3 = _l2_l3(s, r1, r2)
    w = np.zeros(d)
    w[:s] = ell
    for idx, rho in ((L2, math.sqrt(rho2sq)), (L3, math.sqrt(rho3sq))):
        u = rng.standard_normal(len(idx))
        u[0 if idx is L2 else -1] = abs(u[0 if idx is L2 else -1]) + 1.0
        w[idx] = rho * u / np.linalg.norm(u)
    return f_basis(d, s) @ w


__all__ = ["DiagonalFlow", "flow_matrix", "conjugated_flow", "f_basis", "haar_block",
           "CompactSampler", "haar_sample", "SphericalAverageSeries", "spherical_alpha_average",
           "F_value", "spherical_F_average", "j_integral", "JApproximation", "j_approximation",
           "j_approximation_error", "surface_vector"]

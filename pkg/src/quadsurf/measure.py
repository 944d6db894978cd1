"""Surface volumes of {Q = a} cap {M(v) in R} cap annulus.

The surface measure m is the disintegration of Lebesgue measure along Q:
Leb(dv) = m_a(dv) da.  Two realisations are provided.

* :func:`shell_volume_mc` estimates (1/2h) Leb{|Q - a| <= h, ...} for any
  pair.  Each sample fixes M(v) and all but one free coordinate, then the
  exact length of the admissible segment along the remaining direction is
  integrated in closed form (a Rao-Blackwellised estimator).
* :func:`polar_volume` integrates the hyperbolic polar parametrisation of a
  canonical form head(z) + 2 v_{s+1} v_d + sum(+-v_j^2) by quadrature.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .enumerate import Annulus, Region
from .errors import QuadsurfError
from .forms import CanonicalForm, LinearMap, QuadraticForm


@dataclass
class VolumeEstimate:
    value: float
    stderr: float
    method: str
    samples: int = 0
    leading: float | None = None
    zero_acceptance: bool = False


# ---------------------------------------------------------------------------
# constants
# ---------------------------------------------------------------------------

def sphere_area(n: int) -> float:
    """Surface area of the unit sphere S^n in R^{n+1}."""
    if n < 0:
        raise QuadsurfError("sphere dimension must be >= 0")
    return 2 * math.pi ** ((n + 1) / 2) / math.gamma((n + 1) / 2)


def c1_constant(r1: int, r2: int, s: int, d: int) -> float:
    if r1 + r2 != d - s or r1 < 1 or r2 < 1:
        raise QuadsurfError(f"need r1 + r2 = d - s with r1, r2 >= 1; got ({r1}, {r2}, {s}, {d})")
    return sphere_area(r1 - 1) * sphere_area(r2 - 1) * 2 ** ((2 - d + s) / 2)


def c3_constant(r1: int, r2: int, s: int, d: int) -> float:
    """Vol(A(0,T)) ~ C3 * Vol(R) * T^(d-s-2)."""
    m = d - s - 2
    if m <= 0:
        raise QuadsurfError("no power-law leading term when d - s <= 2")
    return c1_constant(r1, r2, s, d) / (2 * m)


def predicted_count(volume, c_of_g: float | None = None) -> float:
    v = volume.value if isinstance(volume, VolumeEstimate) else float(volume)
    if c_of_g is None:
        return v
    if c_of_g <= 0:
        raise QuadsurfError("c(g) must be positive")
    return v / c_of_g


# ---------------------------------------------------------------------------
# shell Monte Carlo
# ---------------------------------------------------------------------------

def _pick_coordinates(Mf: np.ndarray, G: np.ndarray):
    """Columns J with M_J invertible, and a free coordinate j for the line integral."""
    s, d = Mf.shape
    J: list[int] = []
    for k in np.argsort(-np.abs(Mf).max(axis=0), kind="stable"):
        trial = J + [int(k)]
        if np.linalg.matrix_rank(Mf[:, trial]) == len(trial):
            J = trial
        if len(J) == s:
            break
    if len(J) != s:
        raise QuadsurfError("linear map is rank deficient")
    free = [k for k in range(d) if k not in J]
    # prefer a coordinate in which Q is linear along the line
    j = min(free, key=lambda k: (abs(G[k, k]) > 0, -k))
    return sorted(J), free, j


def _segment_length(coef_q, coef_n, a, h, n_lo, n_hi, xmax):
    """Length of {x in [-xmax, xmax] : |q(x) - a| <= h, n_lo <= n(x) <= n_hi}, rowwise.

    q(x) = q2 x^2 + q1 x + q0 and n(x) = n2 x^2 + n1 x + n0.
    """
    q2, q1, q0 = coef_q
    n2, n1, n0 = coef_n
    N = q0.shape[0]

    def roots(A, B, C):
        # real roots of A x^2 + B x + C, NaN where absent
        out = np.full((N, 2), np.nan)
        lin = np.abs(A) <= 1e-14 * (np.abs(B) + np.abs(C) + 1e-300)
        disc = B * B - 4 * A * C
        ok = ~lin & (disc >= 0)
        sq = np.sqrt(np.where(ok, disc, 0.0))
        # stable quadratic formula
        qq = -0.5 * (B + np.copysign(sq, B))
        with np.errstate(divide="ignore", invalid="ignore"):
            r1 = np.where(ok, qq / np.where(A == 0, 1, A), np.nan)
            r2 = np.where(ok & (qq != 0), C / np.where(qq == 0, 1, qq), np.nan)
            r2 = np.where(ok & (qq == 0), r1, r2)
            rl = np.where(lin & (B != 0), -C / np.where(B == 0, 1, B), np.nan)
        out[:, 0] = np.where(lin, rl, r1)
        out[:, 1] = np.where(lin, np.nan, r2)
        return out

    pts = np.concatenate([
        roots(q2, q1, q0 - (a - h)), roots(q2, q1, q0 - (a + h)),
        roots(n2, n1, n0 - n_lo), roots(n2, n1, n0 - n_hi),
        np.full((N, 1), -xmax), np.full((N, 1), xmax)], axis=1)
    pts = np.clip(np.where(np.isnan(pts), xmax, pts), -xmax, xmax)
    pts.sort(axis=1)
    mid = 0.5 * (pts[:, 1:] + pts[:, :-1])
    seg = pts[:, 1:] - pts[:, :-1]
    qm = (q2[:, None] * mid + q1[:, None]) * mid + q0[:, None]
    nm = (n2[:, None] * mid + n1[:, None]) * mid + n0[:, None]
    ok = (np.abs(qm - a) <= h) & (nm >= n_lo) & (nm <= n_hi)
    return np.sum(np.where(ok, seg, 0.0), axis=1)


def shell_volume_mc(Q: QuadraticForm, a, M: LinearMap | None, R: Region | None, ann: Annulus,
                    h: float = 0.02, n: int = 1_000_000, seed: int = 0,
                    chunk: int = 200_000) -> VolumeEstimate:
    """(1/2h) Leb{|Q(v) - a| <= h, M(v) in R, v in ann}, estimated with n samples."""
    if n < 1:
        raise QuadsurfError("need at least one sample")
    if h <= 0:
        raise QuadsurfError("shell half-width must be positive")
    G = Q.to_float()
    d = Q.dim
    a = float(a)
    T1, T2 = float(ann.t1), float(ann.t2)
    if M is None:
        Mf = np.zeros((0, d))
        boxes, weights, volR = [()], np.array([1.0]), 1.0
    else:
        Mf = M.to_float()
        if R is None:
            raise QuadsurfError("a linear map needs a region")
        boxes = [tuple((float(lo), float(hi)) for lo, hi in b) for b in R.boxes]
        vols = np.array([math.prod(hi - lo for lo, hi in b) for b in boxes])
        volR = float(vols.sum())
        if volR == 0:
            return VolumeEstimate(0.0, 0.0, "shell_mc", n, zero_acceptance=True)
        weights = vols / volR
    s = Mf.shape[0]
    J, free, j = _pick_coordinates(Mf, G) if s else ([], list(range(d)), d - 1)
    others = [k for k in free if k != j]
    MJinv = np.linalg.inv(Mf[:, J]) if s else np.zeros((0, 0))
    detJ = abs(np.linalg.det(Mf[:, J])) if s else 1.0
    # direction along coordinate j keeping M fixed
    w = np.zeros(d)
    w[j] = 1.0
    if s:
        w[J] = -MJinv @ Mf[:, j]
    scale = volR * (2 * T2) ** len(others) / detJ
    Gw = G @ w
    q2 = float(w @ Gw)
    n2 = float(w @ w)
    # the coordinate range in x: |v_j| <= T2
    xmax = T2

    ss = np.random.SeedSequence(seed)
    nchunks = -(-n // chunk)
    children = ss.spawn(nchunks)
    total = 0.0
    total2 = 0.0
    for c, child in enumerate(children):
        m = min(chunk, n - c * chunk)
        rng = np.random.default_rng(child)
        V = np.zeros((m, d))
        if s:
            which = rng.choice(len(boxes), size=m, p=weights) if len(boxes) > 1 else np.zeros(m, int)
            lo = np.array([[b[i][0] for i in range(s)] for b in boxes])
            hi = np.array([[b[i][1] for i in range(s)] for b in boxes])
            z = lo[which] + rng.random((m, s)) * (hi[which] - lo[which])
        if others:
            V[:, others] = rng.uniform(-T2, T2, size=(m, len(others)))
        if s:
            V[:, J] = (z - V[:, others] @ Mf[:, others].T) @ MJinv.T
        # Q(V + x w) = q2 x^2 + 2 (V G w) x + Q(V)
        q1 = 2 * V @ Gw
        q0 = np.einsum("ni,ij,nj->n", V, G, V)
        n1 = 2 * V @ w
        n0 = np.einsum("ni,ni->n", V, V)
        length = _segment_length((np.full(m, q2), q1, q0), (np.full(m, n2), n1, n0),
                                 a, h, T1 * T1, T2 * T2, xmax)
        est = length * (scale / (2 * h))
        total += float(est.sum())
        total2 += float((est * est).sum())
    mean = total / n
    var = max(total2 / n - mean * mean, 0.0)
    stderr = math.sqrt(var / max(n - 1, 1)) if n > 1 else math.inf
    return VolumeEstimate(mean, stderr, "shell_mc", n, zero_acceptance=(total == 0.0))


# ---------------------------------------------------------------------------
# polar quadrature for canonical forms
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PolarData:
    """Canonical data: Q0 = head(z) + 2 v_{s+1} v_d + sum_{+} v^2 - sum_{-} v^2, M0(v) = z."""

    s: int
    r1: int
    r2: int
    a: float
    head: tuple[tuple[float, ...], ...] | None = None

    @property
    def d(self) -> int:
        return self.s + self.r1 + self.r2

    def head_matrix(self) -> np.ndarray:
        if self.head is None:
            return np.eye(self.s)
        return np.asarray(self.head, dtype=float)

    @classmethod
    def from_canonical(cls, cf: CanonicalForm, a, tol: float = 1e-9) -> "PolarData":
        """Only for an orthogonal g (otherwise the norm in canonical coordinates differs)."""
        g = cf.g
        if np.max(np.abs(g.T @ g - np.eye(g.shape[0]))) > tol:
            raise QuadsurfError("non-canonical input: g is not orthogonal, norms would change")
        return cls(cf.s, cf.r1, cf.r2, float(a), tuple(map(tuple, cf.head)))


def _t_integral(b: float, u_lo: float, u_hi: float, r1: int, r2: int) -> float:
    """int over {t >= 0 : u_lo <= |b| cosh 2t <= u_hi} of |b|^((m-2)/2) K(t) dt."""
    ab = abs(b)
    if ab == 0 or u_hi <= 0:
        return 0.0
    c_hi = u_hi / ab
    if c_hi < 1:
        return 0.0
    c_lo = max(1.0, u_lo / ab)
    if c_lo >= c_hi:
        return 0.0
    t_lo, t_hi = 0.5 * math.acosh(c_lo), 0.5 * math.acosh(c_hi)
    p, q = (r1 - 1, r2 - 1) if b > 0 else (r2 - 1, r1 - 1)
    m = r1 + r2
    val = _cosh_sinh_integral(p, q, t_lo, t_hi)
    return ab ** ((m - 2) / 2) * val


def _cosh_sinh_integral(p: int, q: int, t0: float, t1: float) -> float:
    """int_{t0}^{t1} cosh^p t sinh^q t dt, exactly via exponential expansion."""
    # cosh^p sinh^q = 2^-(p+q) sum_{j,k} C(p,j) C(q,k) (-1)^(q-k) e^{(2j-p + 2k-q) t}
    total = 0.0
    for jj in range(p + 1):
        for kk in range(q + 1):
            c = math.comb(p, jj) * math.comb(q, kk) * (-1) ** (q - kk)
            lam = 2 * jj - p + 2 * kk - q
            if lam == 0:
                total += c * (t1 - t0)
            else:
                total += c * (math.exp(lam * t1) - math.exp(lam * t0)) / lam
    return total / 2 ** (p + q)


def _fiber_volume(z: np.ndarray, data: PolarData, H: np.ndarray, T1: float, T2: float) -> float:
    b = data.a - float(z @ H @ z)
    zz = float(z @ z)
    return _t_integral(b, T1 * T1 - zz, T2 * T2 - zz, data.r1, data.r2)


def polar_volume(data: PolarData, R: Region, ann: Annulus, *, epsrel: float = 1e-11) -> VolumeEstimate:
    """Volume by quadrature over z in R and the hyperbolic angle t.

    Also returns the leading-order value C3 * Vol(R) * (T2^m - T1^m), with
    m = d - s - 2, as ``leading``.
    """
    if data.s != R.dim:
        raise QuadsurfError("region dimension differs from s")
    if data.r1 < 1 or data.r2 < 1:
        raise QuadsurfError("non-canonical input: need r1, r2 >= 1")
    H = data.head_matrix()
    T1, T2 = float(ann.t1), float(ann.t2)
    pref = sphere_area(data.r1 - 1) * sphere_area(data.r2 - 1) / 2
    total = 0.0
    for box in R.boxes:
        lims = [(float(lo), float(hi)) for lo, hi in box]
        if any(hi <= lo for lo, hi in lims):
            continue
        if data.s == 1:
            lo, hi = lims[0]
            c = H[0, 0]
            brk = []
            if c != 0 and data.a / c > 0:
                brk += [math.sqrt(data.a / c), -math.sqrt(data.a / c)]
            for T in (T1, T2):
                brk += [T, -T]
            brk = sorted(x for x in set(brk) if lo < x < hi)
            val, _ = integrate.quad(lambda x: _fiber_volume(np.array([x]), data, H, T1, T2),
                                    lo, hi, points=brk or None, epsrel=epsrel, epsabs=0, limit=500)
        else:
            val, _ = integrate.nquad(lambda *z: _fiber_volume(np.array(z), data, H, T1, T2),
                                     lims, opts={"epsrel": epsrel * 100, "limit": 200})
        total += val
    value = pref * total
    m = data.d - data.s - 2
    leading = None
    if m > 0:
        leading = c3_constant(data.r1, data.r2, data.s, data.d) * float(R.volume()) * (T2 ** m - T1 ** m)
    return VolumeEstimate(value, 0.0, "polar_closed_form", 0, leading)


def dyadic_leading(data: PolarData, vol_R: float, T: float) -> float:
    """C3 * Vol(R) * T^m * (1 - 2^-m): leading term for the shell (T/2, T]."""
    m = data.d - data.s - 2
    return c3_constant(data.r1, data.r2, data.s, data.d) * vol_R * T ** m * (1 - 2.0 ** -m)

"""Exceptional families with a T log T excess.

    Q1 = -x1 x2 + x3^2 + x4^2          (d = 4)
    Q2 =  x1 x2 + x3^2 - x4^2          (d = 4)
    Q3 = -x1 x2 + x3^2 + x4^2 - alpha x5^2   (d = 5)
    L_alpha = x1 - alpha x2

On the slice L_alpha = 0 with alpha = p/q in lowest terms, x1 = p k and
x2 = q k, so the counts reduce to sums of two squares (Q1, Q3) or a
hyperbola x4^2 - x3^2 = m (Q2) for each k.
"""
from __future__ import annotations

import enum
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from decimal import Decimal, localcontext
from fractions import Fraction

import numpy as np

from .enumerate import Annulus, Region, count_points
from .errors import QuadsurfError
from .field import QuadScalar, as_fraction, squarefree_decompose
from .forms import LinearMap, QuadraticForm
from .series import ExperimentSeries


class Family(str, enum.Enum):
    Q1 = "Q1"
    Q2 = "Q2"
    Q3 = "Q3"


@dataclass(frozen=True)
class ExceptionalFamily:
    which: Family
    alpha: Fraction = Fraction(1)
    a: Fraction = Fraction(1)

    def __init__(self, which, alpha=1, a=1):
        alpha = as_fraction(alpha)
        if alpha < 0:
            raise QuadsurfError("alpha must be >= 0")
        object.__setattr__(self, "which", Family(which))
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "a", as_fraction(a))

    @property
    def dim(self) -> int:
        return 5 if self.which is Family.Q3 else 4

    @property
    def sqrt_alpha_rational(self) -> bool:
        return squarefree_decompose(self.alpha)[1] == 1 if self.alpha else True

    def form(self) -> QuadraticForm:
        if self.which is Family.Q1:
            return QuadraticForm.from_polynomial(4, {(0, 1): -1, (2, 2): 1, (3, 3): 1})
        if self.which is Family.Q2:
            return QuadraticForm.from_polynomial(4, {(0, 1): 1, (2, 2): 1, (3, 3): -1})
        return QuadraticForm.from_polynomial(5, {(0, 1): -1, (2, 2): 1, (3, 3): 1,
                                                 (4, 4): -self.alpha})

    def linear(self, beta=None) -> LinearMap:
        """L_beta = x1 - beta x2 (beta defaults to alpha)."""
        beta = self.alpha if beta is None else beta
        if not isinstance(beta, QuadScalar):
            beta = QuadScalar(as_fraction(beta))
        row = [QuadScalar(1, 0, beta.disc), -beta] + [QuadScalar(0, 0, beta.disc)] * (self.dim - 2)
        return LinearMap((tuple(row),), beta.disc)


# ---------------------------------------------------------------------------
# sums of two squares and hyperbola counts
# ---------------------------------------------------------------------------

def factorize(n: int) -> dict[int, int]:
    if n < 1:
        raise ValueError("need n >= 1")
    out: dict[int, int] = {}
    for p in (2, 3):
        while n % p == 0:
            out[p] = out.get(p, 0) + 1
            n //= p
    p = 5
    while p * p <= n:
        for q in (p, p + 2):
            while n % q == 0:
                out[q] = out.get(q, 0) + 1
                n //= q
        p += 6
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return out


def r2_trial(n: int) -> int:
    """#{(x, y) in Z^2 : x^2 + y^2 = n} by direct search."""
    if n < 0:
        return 0
    c = 0
    for x in range(-math.isqrt(n), math.isqrt(n) + 1):
        r = n - x * x
        y = math.isqrt(r)
        if y * y == r:
            c += 2 if y else 1
    return c


def r2_factor(n: int) -> int:
    """Same count from the factorization: 4 * prod over p = 1 mod 4 of (e + 1)."""
    if n < 0:
        return 0
    if n == 0:
        return 1
    out = 4
    for p, e in factorize(n).items():
        if p % 4 == 3 and e % 2:
            return 0
        if p % 4 == 1:
            out *= e + 1
    return out


def two_square_reps(n: int) -> list[tuple[int, int]]:
    if n < 0:
        return []
    out = []
    for x in range(-math.isqrt(n), math.isqrt(n) + 1):
        r = n - x * x
        y = math.isqrt(r)
        if y * y == r:
            out.extend([(x, y), (x, -y)] if y else [(x, 0)])
    return out


def _divisors(n: int) -> list[int]:
    ds = [1]
    for p, e in factorize(n).items():
        ds = [d * p ** i for d in ds for i in range(e + 1)]
    return sorted(ds)


def hyperbola_reps(m: int, norm2_max) -> list[tuple[int, int]]:
    """(x3, x4) with x4^2 - x3^2 = m and x3^2 + x4^2 <= norm2_max."""
    out = []
    if norm2_max < 0:
        return out
    if m == 0:
        for x in range(-math.isqrt(int(norm2_max // 2)), math.isqrt(int(norm2_max // 2)) + 1):
            out.extend([(x, x), (x, -x)] if x else [(0, 0)])
        return out
    for e in _divisors(abs(m)):
        for e_ in (e, -e):
            f = m // e_
            if (e_ + f) % 2:
                continue
            x4, x3 = (e_ + f) // 2, (f - e_) // 2
            if x3 * x3 + x4 * x4 <= norm2_max:
                out.append((x3, x4))
    return out


# ---------------------------------------------------------------------------
# S_i(alpha, T, a)
# ---------------------------------------------------------------------------

def _k_terms(fam: ExceptionalFamily, T2: Fraction):
    """(k, slice norm^2, p q k^2) for the admissible k."""
    p, q = fam.alpha.numerator, fam.alpha.denominator
    w = p * p + q * q
    kmax = math.isqrt(math.floor(T2 / w))
    return p, q, w, kmax


def _count_range(args) -> int:
    fam, T2, k_lo, k_hi, method = args
    p, q, w, _ = _k_terms(fam, T2)
    r2 = r2_factor if method == "factor" else r2_trial
    a = fam.a
    total = 0
    for k in range(k_lo, k_hi + 1):
        base = w * k * k
        if fam.which is Family.Q1:
            n = a + p * q * k * k
            if n.denominator == 1 and base + n <= T2:
                total += r2(int(n))
        elif fam.which is Family.Q2:
            m = p * q * k * k - a
            if m.denominator == 1:
                total += len(hyperbola_reps(int(m), T2 - base))
        else:
            x5max = math.isqrt(max(0, math.floor(T2 - base)))
            for x5 in range(-x5max, x5max + 1):
                n = a + p * q * k * k + fam.alpha * x5 * x5
                if n.denominator == 1 and n >= 0 and base + n + x5 * x5 <= T2:
                    total += r2(int(n))
    return total


def s_count(fam: ExceptionalFamily, T, *, method: str = "factor", threads: int = 1) -> int:
    """|S_i(alpha, T, a)|: integer x with L_alpha(x) = 0, Q_i(x) = a, |x| <= T."""
    if method not in ("factor", "trial"):
        raise QuadsurfError(f"unknown method {method!r}")
    T = as_fraction(T)
    if T < 0:
        raise QuadsurfError("T must be >= 0")
    T2 = T * T
    kmax = _k_terms(fam, T2)[3]
    if threads <= 1 or kmax < 64:
        return _count_range((fam, T2, -kmax, kmax, method))
    edges = np.linspace(-kmax, kmax + 1, threads + 1).astype(int)
    jobs = [(fam, T2, int(lo), int(hi) - 1, method) for lo, hi in zip(edges[:-1], edges[1:]) if hi > lo]
    with ProcessPoolExecutor(threads) as ex:
        return sum(ex.map(_count_range, jobs))


def s_points(fam: ExceptionalFamily, T) -> list[tuple[int, ...]]:
    """The points of S_i(alpha, T, a), sorted."""
    T2 = as_fraction(T) ** 2
    p, q, w, kmax = _k_terms(fam, T2)
    a = fam.a
    out = []
    for k in range(-kmax, kmax + 1):
        base = w * k * k
        if fam.which is Family.Q1:
            n = a + p * q * k * k
            if n.denominator == 1 and base + n <= T2:
                out += [(p * k, q * k, x3, x4) for x3, x4 in two_square_reps(int(n))]
        elif fam.which is Family.Q2:
            m = p * q * k * k - a
            if m.denominator == 1:
                out += [(p * k, q * k, x3, x4) for x3, x4 in hyperbola_reps(int(m), T2 - base)]
        else:
            x5max = math.isqrt(max(0, math.floor(T2 - base)))
            for x5 in range(-x5max, x5max + 1):
                n = a + p * q * k * k + fam.alpha * x5 * x5
                if n.denominator == 1 and n >= 0 and base + n + x5 * x5 <= T2:
                    out += [(p * k, q * k, x3, x4, x5) for x3, x4 in two_square_reps(int(n))]
    return sorted(out)


def s_series(fam: ExceptionalFamily, grid, **kw) -> ExperimentSeries:
    rows = []
    for T in grid:
        c = s_count(fam, T, **kw)
        T = float(T)
        rows.append((T, c, c / (T * math.log(T)) if T > 1 else math.nan))
    return ExperimentSeries(["T", "count", "count_over_TlogT"], rows)


# ---------------------------------------------------------------------------
# beta perturbation and the band check
# ---------------------------------------------------------------------------

def beta_perturbation(alpha, T, sign: int = 1) -> float:
    """alpha +- sqrt((alpha^2 + alpha + 1) / T^2)."""
    if T <= 0:
        raise QuadsurfError("T must be positive")
    if sign not in (1, -1):
        raise QuadsurfError("sign must be +1 or -1")
    alpha = float(alpha)
    return alpha + sign * math.sqrt(alpha * alpha + alpha + 1) / float(T)


def beta_exact(alpha, T, sign: int = 1) -> QuadScalar:
    """The same value as an element of Q(sqrt D); T must be rational."""
    alpha, T = as_fraction(alpha), as_fraction(T)
    if T <= 0:
        raise QuadsurfError("T must be positive")
    root = QuadScalar.sqrt_of(alpha * alpha + alpha + 1)
    return QuadScalar(alpha, 0, root.disc) + root * Fraction(sign) / T


@dataclass
class BandReport:
    points: int
    violations_plus: int
    violations_minus: int
    sharp_violations: int
    eps: Fraction
    T: Fraction
    examples: list = field(default_factory=list)

    @property
    def violations(self) -> int:
        return self.violations_plus + self.violations_minus


def _normalize(x):
    # S is symmetric under x -> -x; use the representative with x2 <= 0
    return tuple(-c for c in x) if x[1] > 0 else tuple(x)


def band_containment_check(fam: ExceptionalFamily, T, eps=Fraction(1, 20)) -> BandReport:
    """Check L_{beta+} in [1/2 - eps, 1] and L_{beta-} in [-1, -1/2 + eps] on the
    outer dyadic shell of S_i, exactly, for the representative with x2 <= 0.

    ``sharp_violations`` counts failures of the sharper band
    sqrt(1/4 - a/T^2) <= L_{beta+} <= sqrt(1 - a/T^2) (and its mirror).
    """
    T, eps = as_fraction(T), as_fraction(eps)
    bp, bm = beta_exact(fam.alpha, T, 1), beta_exact(fam.alpha, T, -1)
    lo2, hi2 = Fraction(1, 4) - fam.a / T ** 2, 1 - fam.a / T ** 2
    half = Fraction(1, 2)
    vp = vm = sharp = 0
    shell = [x for x in s_points(fam, T) if 4 * sum(c * c for c in x) > T * T]
    bad = []
    for x in shell:
        x = _normalize(x)
        Lp = x[0] - bp * x[1]
        Lm = x[0] - bm * x[1]
        if not (half - eps <= Lp <= 1):
            vp += 1
            bad.append(x)
        if not (-1 <= Lm <= -half + eps):
            vm += 1
            bad.append(x)
        # sharper band: compare squares once the sign is right
        ok = Lp >= 0 and Lm <= 0
        if ok:
            Lp2, Lm2 = Lp * Lp, Lm * Lm
            ok = (lo2 <= 0 or Lp2 >= lo2) and Lp2 <= hi2 and (lo2 <= 0 or Lm2 >= lo2) and Lm2 <= hi2
        sharp += not ok
    return BandReport(len(shell), vp, vm, sharp, eps, T, bad[:10])


def banded_count(fam: ExceptionalFamily, beta: QuadScalar, T, lo, hi, *, threads: int = 1) -> int:
    """|X_Q^a(Z) cap {lo <= L_beta <= hi} cap A(0, T)| by direct enumeration."""
    return count_points(fam.form(), fam.a, Annulus.ball(T), fam.linear(beta),
                        Region.box((lo, hi)), threads=threads)


# ---------------------------------------------------------------------------
# growth fit
# ---------------------------------------------------------------------------

@dataclass
class GrowthFit:
    exponent: float
    log_coef: float
    const: float
    rms: float
    power_rms: float
    power_exponent: float


def growth_fit(series) -> GrowthFit:
    """Least squares of log count on [1, log T, log log T], plus the pure power fit."""
    T = np.array([float(t) for t, _ in series])
    c = np.array([float(x) for _, x in series])
    if len(T) < 4:
        raise QuadsurfError("need at least 4 points")
    if np.any(c <= 0) or np.any(T <= math.e):
        raise QuadsurfError("degenerate series: need counts > 0 and T > e")
    y = np.log(c)
    A = np.stack([np.ones_like(T), np.log(T), np.log(np.log(T))], axis=1)
    if np.linalg.matrix_rank(A) < 3:
        raise QuadsurfError("degenerate series: T values not distinct enough")
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    rms = float(np.sqrt(np.mean((A @ coef - y) ** 2)))
    P = A[:, :2]
    pc, *_ = np.linalg.lstsq(P, y, rcond=None)
    prms = float(np.sqrt(np.mean((P @ pc - y) ** 2)))
    return GrowthFit(float(coef[1]), float(coef[2]), float(coef[0]), rms, prms, float(pc[1]))


# ---------------------------------------------------------------------------
# the explicit (beta_k, T_k) sequence
# ---------------------------------------------------------------------------

@dataclass
class BaireStep:
    k: int
    alpha: Fraction
    T: Fraction
    beta: QuadScalar
    count: int
    ratio: float            # count / (T log T)
    gap: float              # |beta_k - gamma|
    gap_bound: float        # T_k^-2


def _dec(x: QuadScalar, prec: int = 60) -> Decimal:
    with localcontext() as ctx:
        ctx.prec = prec
        r = Decimal(x.rat.numerator) / Decimal(x.rat.denominator)
        if x.irr:
            r += Decimal(x.irr.numerator) / Decimal(x.irr.denominator) * Decimal(x.disc).sqrt()
        return r


def baire_sequence(K: int = 5, *, T1: int = 32, C: float = 0.1, a=1,
                   threads: int = 1) -> tuple[list[BaireStep], Decimal]:
    """beta_k = alpha_k + sqrt(alpha_k^2+alpha_k+1)/T_k with sqrt(alpha_k) rational,
    T_k >= 2 T_{k-1}, and |beta_k - beta_{k-1}| < T_{k-1}^-2 / 4.  Then with
    gamma = beta_K every step has |beta_k - gamma| < T_k^-2.  Each step counts
    points of Q1 = a with L_{beta_k} in [1/2, 1] and |x| <= T_k.
    """
    if K < 1:
        raise QuadsurfError("K must be >= 1")
    a = as_fraction(a)
    alphas, Ts, betas = [Fraction(1)], [Fraction(T1)], [beta_exact(1, T1)]
    for k in range(2, K + 1):
        target = float(_dec(betas[-1]))
        tol = float(Ts[-1]) ** -2 / 4
        Tk = 2 * Ts[-1]
        # pick sqrt(alpha) = m/n below the target so that T solves near 2 T_{k-1}
        n = 4 * int(Tk)
        s = math.sqrt(max(target - math.sqrt(3) / float(Tk), 0.0))
        m = math.floor(s * n)
        while True:
            al = Fraction(m * m, n * n)
            gap = target - float(al)
            Tsolve = math.sqrt(float(al) ** 2 + float(al) + 1) / gap
            if Tsolve >= float(Tk):
                break
            m -= 1
        T = Fraction(Tsolve).limit_denominator(16)
        beta = beta_exact(al, T)
        if not abs(_dec(beta) - _dec(betas[-1])) < Decimal(tol):
            raise QuadsurfError(f"step {k}: could not place beta within {tol}")
        alphas.append(al)
        Ts.append(T)
        betas.append(beta)
    gamma = _dec(betas[-1])
    fam = ExceptionalFamily(Family.Q1, 1, a)
    steps = []
    for k, (al, T, b) in enumerate(zip(alphas, Ts, betas), start=1):
        c = banded_count(fam, b, T, Fraction(1, 2), 1, threads=threads)
        Tf = float(T)
        steps.append(BaireStep(k, al, T, b, c, c / (Tf * math.log(Tf)),
                               float(abs(_dec(b) - gamma)), Tf ** -2))
    return steps, gamma


__all__ = ["Family", "ExceptionalFamily", "factorize", "r2_trial", "r2_factor", "two_square_reps",
           "hyperbola_reps", "s_count", "s_points", "s_series", "beta_perturbation", "beta_exact",
           "BandReport", "band_containment_check", "banded_count", "GrowthFit", "growth_fit",
           "BaireStep", "baire_sequence"]

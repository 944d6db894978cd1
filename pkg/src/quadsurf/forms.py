"""Quadratic forms, linear maps with entries in Q(sqrt D), and pair checks.

Everything on the classification path is exact: signatures come from a
Lagrange congruence reduction, kernels from exact row reduction.  Only
:func:`canonicalize_pair` is floating point, and it reports its residuals.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np
import scipy.linalg

from .field import QuadScalar, as_fraction, is_squarefree


class FormError(ValueError):
    pass


# ---------------------------------------------------------------------------
# data types
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class QuadraticForm:
    """Q(v) = v^T gram v with an exact rational symmetric Gram matrix."""

    gram: tuple[tuple[Fraction, ...], ...]

    def __post_init__(self):
        rows = tuple(tuple(as_fraction(x) for x in row) for row in self.gram)
        d = len(rows)
        if d == 0 or any(len(r) != d for r in rows):
            raise FormError("Gram matrix must be square and nonempty")
        for i in range(d):
            for j in range(i + 1, d):
                if rows[i][j] != rows[j][i]:
                    raise FormError(f"Gram matrix not symmetric at ({i},{j})")
        object.__setattr__(self, "gram", rows)

    @classmethod
    def from_polynomial(cls, d: int, terms: dict) -> "QuadraticForm":
        """Build from monomial coefficients, e.g. ``{(0, 1): -1, (2, 2): 1}``.

        Key ``(i, j)`` with i != j is the coefficient of x_i x_j (split
        symmetrically); ``(i, i)`` is the coefficient of x_i^2.
        """
        g = [[Fraction(0)] * d for _ in range(d)]
        for (i, j), c in terms.items():
            c = as_fraction(c)
            if i == j:
                g[i][i] += c
            else:
                g[i][j] += c / 2
                g[j][i] += c / 2
        return cls(tuple(map(tuple, g)))

    @classmethod
    def diagonal(cls, entries: Sequence) -> "QuadraticForm":
        d = len(entries)
        return cls(tuple(tuple(as_fraction(entries[i]) if i == j else Fraction(0)
                               for j in range(d)) for i in range(d)))

    @property
    def dim(self) -> int:
        return len(self.gram)

    def __call__(self, v) -> Fraction:
        return evaluate_form(self, v)

    def to_float(self) -> np.ndarray:
        return np.array([[float(x) for x in row] for row in self.gram])

    def det(self) -> Fraction:
        return _det([list(r) for r in self.gram])

    def is_nondegenerate(self) -> bool:
        return self.det() != 0

    def transform(self, g) -> "QuadraticForm":
        """The form v -> Q(g v) for an integer or rational matrix g."""
        G = [[as_fraction(x) for x in row] for row in g]
        d = self.dim
        A = self.gram
        # g^T A g
        Ag = [[sum(A[i][k] * G[k][j] for k in range(d)) for j in range(d)] for i in range(d)]
        out = [[sum(G[k][i] * Ag[k][j] for k in range(d)) for j in range(d)] for i in range(d)]
        return QuadraticForm(tuple(map(tuple, out)))


@dataclass(frozen=True)
class LinearMap:
    """An s x d matrix over Q(sqrt disc); row i is the linear form L_i."""

    entries: tuple[tuple[QuadScalar, ...], ...]
    disc: int = 1

    def __post_init__(self):
        if not is_squarefree(self.disc):
            raise FormError(f"D={self.disc} is not squarefree")
        rows = []
        for row in self.entries:
            rr = []
            for x in row:
                if not isinstance(x, QuadScalar):
                    x = QuadScalar(as_fraction(x), 0, self.disc)
                elif x.irr != 0 and x.disc != self.disc:
                    raise FormError(f"entry {x} not in Q(sqrt {self.disc})")
                else:
                    x = QuadScalar(x.rat, x.irr, self.disc)
                rr.append(x)
            rows.append(tuple(rr))
        if not rows or any(len(r) != len(rows[0]) for r in rows):
            raise FormError("linear map must be a nonempty rectangular matrix")
        object.__setattr__(self, "entries", tuple(rows))
        if _rank([list(r) for r in rows]) != len(rows):
            raise FormError("linear map rows are linearly dependent")

    @property
    def rows(self) -> int:
        return len(self.entries)

    @property
    def cols(self) -> int:
        return len(self.entries[0])

    def __call__(self, v) -> tuple[QuadScalar, ...]:
        if len(v) != self.cols:
            raise FormError(f"vector of length {len(v)} for a map on R^{self.cols}")
        zero = QuadScalar(0, 0, self.disc)
        return tuple(sum((e * int(x) if isinstance(x, (int, np.integer)) else e * as_fraction(x)
                          for e, x in zip(row, v)), zero) for row in self.entries)

    def to_float(self) -> np.ndarray:
        return np.array([[float(x) for x in row] for row in self.entries])

    def split(self) -> tuple[list[list[Fraction]], list[list[Fraction]]]:
        """Rational and sqrt(D) coefficient matrices."""
        return ([[x.rat for x in row] for row in self.entries],
                [[x.irr for x in row] for row in self.entries])

    def compose(self, g) -> "LinearMap":
        """v -> M(g v) for a rational matrix g."""
        G = [[as_fraction(x) for x in row] for row in g]
        d = self.cols
        out = [[sum((row[k] * G[k][j] for k in range(d)), QuadScalar(0, 0, self.disc))
                for j in range(d)] for row in self.entries]
        return LinearMap(tuple(map(tuple, out)), self.disc)

    def scaled(self, c) -> "LinearMap":
        return LinearMap(tuple(tuple(x * c for x in row) for row in self.entries), self.disc)

    def is_rational(self) -> bool:
        return all(x.irr == 0 for row in self.entries for x in row)


@dataclass(frozen=True)
class Signature:
    plus: int
    minus: int
    zero: int = 0

    def __iter__(self):
        return iter((self.plus, self.minus, self.zero))

    @property
    def rank(self) -> int:
        return self.plus + self.minus


class Regime(str, enum.Enum):
    MAIN = "MainTheorem"
    EXCEPTIONAL_21 = "Exceptional21"
    EXCEPTIONAL_22 = "Exceptional22"
    INVALID = "Invalid"


class WitnessStatus(str, enum.Enum):
    UNKNOWN = "UNKNOWN"
    WITNESSED = "WITNESSED"
    REJECTED = "REJECTED"


@dataclass(frozen=True)
class PairClass:
    conds: tuple[bool, bool, bool]
    kernel_signature: Signature | None
    regime: Regime
    witness: WitnessStatus = WitnessStatus.UNKNOWN
    reasons: tuple[str, ...] = ()


# ---------------------------------------------------------------------------
# exact linear algebra over Fraction / QuadScalar
# ---------------------------------------------------------------------------

def _is_zero(x) -> bool:
    return x == 0


def _rref(rows: list[list]) -> tuple[list[list], list[int]]:
    """Reduced row echelon form; returns (matrix, pivot columns)."""
    A = [list(r) for r in rows]
    if not A:
        return A, []
    m, n = len(A), len(A[0])
    pivots = []
    r = 0
    for c in range(n):
        p = next((i for i in range(r, m) if not _is_zero(A[i][c])), None)
        if p is None:
            continue
        A[r], A[p] = A[p], A[r]
        inv = 1 / A[r][c] if not isinstance(A[r][c], QuadScalar) else QuadScalar(1, 0, A[r][c].disc) / A[r][c]
        A[r] = [x * inv for x in A[r]]
        for i in range(m):
            if i != r and not _is_zero(A[i][c]):
                f = A[i][c]
                A[i] = [a - f * b for a, b in zip(A[i], A[r])]
        pivots.append(c)
        r += 1
        if r == m:
            break
    return A, pivots


def _rank(rows: list[list]) -> int:
    return len(_rref(rows)[1])


def _det(A: list[list]):
    n = len(A)
    A = [list(r) for r in A]
    det = Fraction(1)
    for c in range(n):
        p = next((i for i in range(c, n) if not _is_zero(A[i][c])), None)
        if p is None:
            return Fraction(0)
        if p != c:
            A[c], A[p] = A[p], A[c]
            det = -det
        det = det * A[c][c]
        for i in range(c + 1, n):
            if not _is_zero(A[i][c]):
                f = A[i][c] / A[c][c]
                A[i] = [a - f * b for a, b in zip(A[i], A[c])]
    return det


def lagrange_signature(A: list[list]) -> Signature:
    """Signature of a symmetric matrix over an ordered field by congruence.

    Works for Fraction and QuadScalar entries (anything with exact ``sign``
    or ordering).  No eigenvalues are computed.
    """
    A = [list(r) for r in A]
    n = len(A)
    plus = minus = zero = 0

    def sgn(x):
        return x.sign() if isinstance(x, QuadScalar) else (x > 0) - (x < 0)

    while A:
        n = len(A)
        i = next((k for k in range(n) if not _is_zero(A[k][k])), None)
        if i is None:
            pair = next(((k, l) for k in range(n) for l in range(k + 1, n)
                         if not _is_zero(A[k][l])), None)
            if pair is None:
                zero += n
                break
            k, l = pair
            # e_k -> e_k + e_l makes the (k,k) entry 2*A[k][l] != 0
            for j in range(n):
                A[k][j] = A[k][j] + A[l][j]
            for j in range(n):
                A[j][k] = A[j][k] + A[j][l]
            i = k
        piv = A[i][i]
        s = sgn(piv)
        if s > 0:
            plus += 1
        else:
            minus += 1
        col = [A[r][i] for r in range(n)]
        B = []
        for r in range(n):
            if r == i:
                continue
            row = []
            for c in range(n):
                if c == i:
                    continue
                row.append(A[r][c] - col[r] * col[c] / piv)
            B.append(row)
        A = B
    return Signature(plus, minus, zero)


# ---------------------------------------------------------------------------
# operations
# ---------------------------------------------------------------------------

def evaluate_form(Q: QuadraticForm, v) -> Fraction:
    """v^T gram v, exactly."""
    d = Q.dim
    if len(v) != d:
        raise FormError(f"vector of length {len(v)} for a form in {d} variables")
    vv = [int(x) if isinstance(x, (int, np.integer)) else as_fraction(x) for x in v]
    g = Q.gram
    total = Fraction(0)
    for i in range(d):
        if vv[i] == 0:
            continue
        row = g[i]
        acc = Fraction(0)
        for j in range(d):
            if vv[j] != 0 and row[j] != 0:
                acc += row[j] * vv[j]
        total += acc * vv[i]
    return total


def signature(Q: QuadraticForm) -> Signature:
    return lagrange_signature([list(r) for r in Q.gram])


def kernel_basis(M: LinearMap) -> list[tuple[QuadScalar, ...]]:
    """Exact basis of ker(M) from the reduced row echelon form."""
    R, pivots = _rref([list(r) for r in M.entries])
    if len(pivots) != M.rows:
        raise FormError("linear map is rank deficient")
    d = M.cols
    zero = QuadScalar(0, 0, M.disc)
    one = QuadScalar(1, 0, M.disc)
    free = [c for c in range(d) if c not in pivots]
    basis = []
    for f in free:
        v = [zero] * d
        v[f] = one
        for r, p in enumerate(pivots):
            v[p] = -R[r][f]
        basis.append(tuple(v))
    return basis


def restrict_form(Q: QuadraticForm, M: LinearMap):
    """Gram matrix of Q on ker(M) (in the kernel_basis coordinates) and its signature."""
    if Q.dim != M.cols:
        raise FormError("form and map act on different dimensions")
    K = kernel_basis(M)
    disc = M.disc
    zero = QuadScalar(0, 0, disc)
    g = Q.gram
    d = Q.dim
    GK = []
    for u in K:
        gu = [sum((u[k] * g[k][j] for k in range(d) if g[k][j] != 0), zero) for j in range(d)]
        GK.append(gu)
    gram = [[sum((GK[a][j] * K[b][j] for j in range(d)), zero) for b in range(len(K))]
            for a in range(len(K))]
    return gram, lagrange_signature(gram)


def irrationality_holds(M: LinearMap) -> bool:
    """Condition 3: no nonzero real combination of the rows is proportional to a rational form.

    The real row space W is defined over Q(sqrt D); W contains a rational
    direction iff W and its Galois conjugate intersect, i.e. iff the stacked
    rows of M and of conj(M) have rank below 2s.
    """
    if M.is_rational():
        return False
    rows = [list(r) for r in M.entries] + [[x.conjugate() for x in r] for r in M.entries]
    return _rank(rows) == 2 * M.rows


def classify_pair(Q: QuadraticForm, M: LinearMap, a=1, witness=None) -> PairClass:
    d, s = Q.dim, M.rows
    reasons = []
    if M.cols != d:
        return PairClass((False, False, False), None, Regime.INVALID, reasons=("dimension mismatch",))
    sigQ = signature(Q)
    if sigQ.zero:
        reasons.append("Q is degenerate")
    if sigQ.plus == 0 or sigQ.minus == 0:
        reasons.append("Q is definite")
    ker_sig = None
    c1 = d > 2 * s
    if not c1:
        reasons.append(f"d={d} is not greater than 2s={2 * s}")
    _, ker_sig = restrict_form(Q, M)
    if ker_sig.rank != d - s:
        c1 = False
        reasons.append(f"rank(Q|ker M)={ker_sig.rank} != d-s={d - s}")
    c2 = c1 and ker_sig.plus >= 3 and ker_sig.minus >= 1
    if not c2:
        reasons.append(f"kernel signature ({ker_sig.plus},{ker_sig.minus}) is not r1>=3, r2>=1")
    c3 = irrationality_holds(M)
    if not c3:
        reasons.append("some combination of the rows of M is rational")

    status = WitnessStatus.UNKNOWN
    if witness is not None:
        if evaluate_form(Q, witness) == as_fraction(a):
            status = WitnessStatus.WITNESSED
        else:
            status = WitnessStatus.REJECTED
            reasons.append("supplied witness is not on Q(v)=a")

    form_ok = not sigQ.zero and sigQ.plus > 0 and sigQ.minus > 0
    if form_ok and c1 and c2 and c3:
        regime = Regime.MAIN
    elif form_ok and c1 and c3 and (ker_sig.plus, ker_sig.minus) == (2, 1):
        regime = Regime.EXCEPTIONAL_21
    elif form_ok and c1 and c3 and (ker_sig.plus, ker_sig.minus) == (2, 2):
        regime = Regime.EXCEPTIONAL_22
    else:
        regime = Regime.INVALID
    if regime is not Regime.MAIN:
        reasons = [r for r in reasons if not r.startswith("kernel signature")] \
            if regime in (Regime.EXCEPTIONAL_21, Regime.EXCEPTIONAL_22) else reasons
    return PairClass((c1, c2, c3), ker_sig, regime, status, tuple(reasons))


# ---------------------------------------------------------------------------
# canonical form
# ---------------------------------------------------------------------------

def canonical_gram(s: int, r1: int, r2: int, head=None) -> np.ndarray:
    """Gram matrix of Q0 = head(v_1..v_s) + 2 v_{s+1} v_d + sum v_i^2 - sum v_i^2."""
    d = s + r1 + r2
    G = np.zeros((d, d))
    if s:
        G[:s, :s] = np.eye(s) if head is None else np.asarray(head, dtype=float)
    G[s, d - 1] = G[d - 1, s] = 1.0
    for i in range(s + 1, s + r1):
        G[i, i] = 1.0
    for i in range(s + r1, d - 1):
        G[i, i] = -1.0
    return G


@dataclass
class CanonicalForm:
    """g with Q0(g v) = Q(v) and M0(g v) = scale * M(v), det g = 1."""

    g: np.ndarray
    q0_gram: np.ndarray
    s: int
    r1: int
    r2: int
    row_scale: np.ndarray
    residual: float
    map_residual: float
    head: np.ndarray = field(repr=False, default=None)

    @property
    def d(self) -> int:
        return self.s + self.r1 + self.r2


def _hyperbolic_basis(A: np.ndarray, tol: float):
    """Basis of R^m (as columns) putting the symmetric A into canonical shape.

    Returns columns (e, p_1.., n_1.., f) with A(e,f)=1, A(e,e)=A(f,f)=0 and
    the middle vectors A-orthonormal (+1 then -1), all A-orthogonal to e, f.
    Deterministic, and the identity when A already has that shape.
    """
    m = A.shape[0]
    B = lambda x, y: float(x @ A @ y)
    I = np.eye(m)
    iso = [i for i in range(m) if abs(A[i, i]) <= tol]
    e = None
    for i in iso:
        j = int(np.argmax(np.abs(A[i])))
        if abs(A[i, j]) > tol:
            e = I[i]
            x = I[j]
            break
    if e is None:
        # no isotropic basis vector: diagonalize and combine a +/- pair
        w, V = np.linalg.eigh(A)
        ip = int(np.argmax(w))
        ineg = int(np.argmin(w))
        if w[ip] <= tol or w[ineg] >= -tol:
            raise FormError("form on the kernel is definite or degenerate")
        p = V[:, ip] / np.sqrt(w[ip])
        n = V[:, ineg] / np.sqrt(-w[ineg])
        e = (p + n) / np.sqrt(2)
        x = (p - n) / np.sqrt(2)
    c = B(e, x)
    if abs(c) <= tol:
        raise FormError("numerical degeneracy while building a hyperbolic pair")
    x = x / c
    f = x - 0.5 * B(x, x) * e
    # complement of <e, f>, Gram-Schmidt with respect to A
    rest = []
    for i in range(m):
        y = I[i] - B(I[i], f) * e - B(I[i], e) * f
        rest.append(y)
    pos, neg = [], []
    chosen: list[np.ndarray] = []
    for y in rest:
        for z in chosen:
            y = y - B(y, z) / B(z, z) * z
        q = B(y, y)
        if np.linalg.norm(y) <= tol or abs(q) <= tol * max(1.0, np.linalg.norm(y) ** 2):
            continue
        chosen.append(y)
        (pos if q > 0 else neg).append(y / np.sqrt(abs(q)))
        if len(chosen) == m - 2:
            break
    if len(chosen) != m - 2:
        raise FormError("numerical degeneracy: pivot below tolerance")
    return np.column_stack([e] + pos + neg + [f]), len(pos) + 1, len(neg) + 1


def canonicalize_pair(Q: QuadraticForm, M: LinearMap, tol: float = 1e-10) -> CanonicalForm:
    """Numeric g in SL_d(R) with Q0(g v) = Q(v) and M0(g v) = c * M(v) row-wise.

    The kernel of M is split off exactly, its Q-orthogonal complement carries
    the head form, and a hyperbolic pair plus Q-orthonormal vectors give the
    rest.  ``residual`` is the sup-norm of g^T Q0 g - Q.
    """
    d, s = Q.dim, M.rows
    if M.cols != d:
        raise FormError("form and map act on different dimensions")
    _, ksig = restrict_form(Q, M)
    if ksig.rank != d - s or d <= 2 * s:
        raise FormError("conditions 1-2 fail: restriction to ker M is degenerate")
    if ksig.plus == 0 or ksig.minus == 0:
        raise FormError("restriction to ker M is definite")
    G = Q.to_float()
    Mf = M.to_float()
    Kb = np.array([[float(x) for x in u] for u in kernel_basis(M)]).T      # d x m
    AK = Kb.T @ G @ Kb
    W, r1, r2 = _hyperbolic_basis(AK, tol)
    Knew = Kb @ W
    # Q-orthogonal complement of ker M
    U = scipy.linalg.null_space(Kb.T @ G)
    if U.shape[1] != s:
        raise FormError("numerical degeneracy in the complement of ker M")
    Uc = U @ np.linalg.inv(Mf @ U)                                        # M(Uc) = I
    P = np.column_stack([Uc, Knew])
    detP = np.linalg.det(P)
    if detP < 0:
        # flip a middle vector (keeps the orientation of M); else the first row of M
        if d - s > 2:
            P[:, s + 1] = -P[:, s + 1]
        else:
            P[:, 0] = -P[:, 0]
        detP = -detP
    scale = np.full(s, detP ** (1.0 / s))
    if np.linalg.det(P) < 0:
        scale[0] = -scale[0]
    P[:, :s] = P[:, :s] / np.abs(scale)
    g = np.linalg.inv(P)
    head = P[:, :s].T @ G @ P[:, :s]
    q0 = canonical_gram(s, r1, r2, head)
    residual = float(np.max(np.abs(g.T @ q0 @ g - G)))
    map_res = float(np.max(np.abs(g[:s] - scale[:, None] * Mf)))
    return CanonicalForm(g=g, q0_gram=q0, s=s, r1=r1, r2=r2, row_scale=scale,
                         residual=residual, map_residual=map_res, head=head)

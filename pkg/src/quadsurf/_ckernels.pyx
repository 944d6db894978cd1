# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled enumeration kernel.

Same contract as :mod:`quadsurf._pykernels`; see ``search`` there.  Values
are int64; the caller guarantees no intermediate exceeds 2**62.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, floor, ceil, fabs

ctypedef long long i64


from quadsurf.errors import BudgetExceeded


cdef inline i64 _isqrt(i64 n):
    cdef i64 r
    if n < 0:
        return -1
    r = <i64>sqrt(<double>n)
    while r * r > n:
        r -= 1
    while (r + 1) * (r + 1) <= n:
        r += 1
    return r


cdef int _nonneg_slow(i64 A, i64 B, i64 D):
    pa = <object>A
    pb = <object>B
    if pa > 0:
        return pa * pa >= pb * pb * D
    return pb * pb * D >= pa * pa


cdef inline int _nonneg(i64 A, i64 B, i64 D, double sD):
    """A + B*sqrt(D) >= 0, exactly."""
    cdef double da, db
    if B == 0:
        return A >= 0
    if A >= 0 and B >= 0:
        return 1
    if A <= 0 and B <= 0:
        return 0
    da = fabs(<double>A)
    db = fabs(<double>B) * sD
    if da > db * (1.0 + 1e-12) + 1.0:
        return A > 0
    if db > da * (1.0 + 1e-12) + 1.0:
        return B > 0
    return _nonneg_slow(A, B, D)


cdef class _Search:
    cdef int d, s, nb, nedge
    cdef i64 a, nlo, nhi, D, first_lo, first_hi, npts, max_points
    cdef double sD
    cdef bint collect, has_filter
    cdef i64[:, :] G
    cdef i64[:, :] Mx
    cdef i64[:, :] My
    cdef double[:, :] Mf
    cdef double[:, :] rest_incl
    cdef double[:, :] rest_excl
    cdef double[:] plo
    cdef double[:] phi
    cdef i64[:, :, :] box
    cdef i64[:] edges
    cdef i64[:] hist
    cdef i64[:] v
    cdef i64[:, :] lin
    cdef i64[:, :] PX
    cdef i64[:, :] PY
    cdef double[:, :] PF
    cdef i64[:, :] out
    cdef object outbuf

    def __init__(self, G, a, nlo, nhi, Mx, My, D, boxes, plo, phi, edges,
                 first_lo, first_hi, collect, max_points):
        cdef int i, k, j
        self.G = G
        self.d = G.shape[0]
        self.a = a
        self.nlo = nlo
        self.nhi = nhi
        self.Mx = Mx
        self.My = My
        self.s = Mx.shape[0]
        self.D = D
        self.sD = sqrt(<double>D)
        self.box = boxes
        self.nb = boxes.shape[0]
        self.has_filter = self.s > 0
        self.plo = plo
        self.phi = phi
        self.edges = edges
        self.nedge = edges.shape[0]
        self.hist = np.zeros(self.nedge, dtype=np.int64)
        self.first_lo = first_lo
        self.first_hi = first_hi
        self.collect = collect
        self.max_points = max_points
        self.npts = 0
        mf = np.asarray(Mx, dtype=np.float64) + np.asarray(My, dtype=np.float64) * np.sqrt(float(D))
        self.Mf = mf
        ri = np.zeros((max(self.s, 1), self.d + 1))
        re = np.zeros((max(self.s, 1), self.d + 1))
        for i in range(self.s):
            for k in range(self.d):
                ri[i, k] = np.sqrt(np.sum(mf[i, k:] ** 2))
                re[i, k] = np.sqrt(np.sum(mf[i, k + 1:] ** 2))
        self.rest_incl = ri
        self.rest_excl = re
        self.v = np.zeros(self.d, dtype=np.int64)
        self.lin = np.zeros((self.d + 1, self.d), dtype=np.int64)
        self.PX = np.zeros((self.d + 1, max(self.s, 1)), dtype=np.int64)
        self.PY = np.zeros((self.d + 1, max(self.s, 1)), dtype=np.int64)
        self.PF = np.zeros((self.d + 1, max(self.s, 1)))
        self.outbuf = np.zeros((1024 if collect else 1, self.d), dtype=np.int64)
        self.out = self.outbuf

    cdef int _in_region(self, int l, i64 x) except -1:
        cdef int bi, i, ok
        cdef i64 X, Y
        for bi in range(self.nb):
            ok = 1
            for i in range(self.s):
                X = self.PX[l, i] + self.Mx[i, l] * x
                Y = self.PY[l, i] + self.My[i, l] * x
                # lo_den*X - lo_num + lo_den*Y*sqrtD >= 0
                if not _nonneg(self.box[bi, i, 1] * X - self.box[bi, i, 0],
                               self.box[bi, i, 1] * Y, self.D, self.sD):
                    ok = 0
                    break
                if not _nonneg(self.box[bi, i, 2] - self.box[bi, i, 3] * X,
                               -self.box[bi, i, 3] * Y, self.D, self.sD):
                    ok = 0
                    break
            if ok:
                return 1
        return 0

    cdef int _emit(self, i64 x, i64 used, i64 B) except -1:
        cdef int l = self.d - 1
        cdef i64 n
        cdef int b
        if x > B or x < -B:
            return 0
        n = used + x * x
        if n < self.nlo or n > self.nhi:
            return 0
        if self.d == 1 and (x < self.first_lo or x > self.first_hi):
            return 0
        if self.has_filter and not self._in_region(l, x):
            return 0
        b = 0
        while b < self.nedge and n > self.edges[b]:
            b += 1
        if b < self.nedge:
            self.hist[b] += 1
        if self.collect:
            if self.npts >= self.max_points:
                raise BudgetExceeded(f"more than {self.max_points} points")
            if self.npts >= self.out.shape[0]:
                self.outbuf = np.concatenate([np.asarray(self.outbuf), np.zeros_like(self.outbuf)])
                self.out = self.outbuf
            for b in range(l):
                self.out[self.npts, b] = self.v[b]
            self.out[self.npts, l] = x
        self.npts += 1
        return 0

    cdef int _solve_last(self, i64 used, i64 q) except -1:
        cdef int l = self.d - 1
        cdef i64 g = self.G[l, l]
        cdef i64 b = self.lin[l, l]
        cdef i64 c = q - self.a
        cdef i64 rem = self.nhi - used
        cdef i64 B, disc, r, num, x
        if rem < 0:
            return 0
        B = _isqrt(rem)
        if g != 0:
            disc = b * b - g * c
            if disc < 0:
                return 0
            r = _isqrt(disc)
            if r * r != disc:
                return 0
            num = -b + r
            if num % g == 0:
                self._emit(num // g, used, B)
            if r != 0:
                num = -b - r
                if num % g == 0:
                    self._emit(num // g, used, B)
        elif b != 0:
            if c % (2 * b) == 0:
                self._emit(-c // (2 * b), used, B)
        elif c == 0:
            for x in range(-B, B + 1):
                self._emit(x, used, B)
        return 0

    cdef int _rec(self, int k, i64 used, i64 q) except -1:
        cdef i64 rem, B, lo, hi, x, l, h
        cdef int i, j
        cdef double m, P, rb, tol, wlo, whi, fl, fh, sr
        if k == self.d - 1:
            return self._solve_last(used, q)
        rem = self.nhi - used
        if rem < 0:
            return 0
        B = _isqrt(rem)
        lo = -B
        hi = B
        if k == 0:
            if self.first_lo > lo:
                lo = self.first_lo
            if self.first_hi < hi:
                hi = self.first_hi
        if self.has_filter:
            sr = sqrt(<double>rem)
            for i in range(self.s):
                P = self.PF[k, i]
                rb = self.rest_incl[i, k] * sr
                tol = 1e-9 * (1.0 + fabs(P) + rb)
                if P - rb > self.phi[i] + tol or P + rb < self.plo[i] - tol:
                    return 0
                m = self.Mf[i, k]
                if m != 0.0:
                    rb = self.rest_excl[i, k] * sr
                    tol = 1e-9 * (1.0 + fabs(P) + rb + fabs(m) * B)
                    wlo = self.plo[i] - P - rb - tol
                    whi = self.phi[i] - P + rb + tol
                    if m > 0:
                        fl = ceil(wlo / m)
                        fh = floor(whi / m)
                    else:
                        fl = ceil(whi / m)
                        fh = floor(wlo / m)
                    if fl > lo:
                        if fl > hi:
                            return 0
                        lo = <i64>fl
                    if fh < hi:
                        if fh < lo:
                            return 0
                        hi = <i64>fh
        for x in range(lo, hi + 1):
            self.v[k] = x
            for j in range(k + 1, self.d):
                self.lin[k + 1, j] = self.lin[k, j] + self.G[k, j] * x
            for i in range(self.s):
                self.PX[k + 1, i] = self.PX[k, i] + self.Mx[i, k] * x
                self.PY[k + 1, i] = self.PY[k, i] + self.My[i, k] * x
                self.PF[k + 1, i] = self.PF[k, i] + self.Mf[i, k] * x
            self._rec(k + 1, used + x * x, q + self.G[k, k] * x * x + 2 * x * self.lin[k, k])
        return 0

    def run(self):
        self._rec(0, 0, 0)
        pts = np.asarray(self.outbuf)[:self.npts].copy() if self.collect else None
        return self.npts, np.asarray(self.hist).copy(), pts


def search(G, a, nlo, nhi, Mx, My, D, boxes, plo, phi, edges,
           first_lo, first_hi, collect, max_points):
    s = _Search(np.ascontiguousarray(G, dtype=np.int64), int(a), int(nlo), int(nhi),
                np.ascontiguousarray(Mx, dtype=np.int64), np.ascontiguousarray(My, dtype=np.int64),
                int(D), np.ascontiguousarray(boxes, dtype=np.int64),
                np.ascontiguousarray(plo, dtype=np.float64), np.ascontiguousarray(phi, dtype=np.float64),
                np.ascontiguousarray(edges, dtype=np.int64), int(first_lo), int(first_hi),
                bool(collect), int(max_points))
    return s.run()


cdef class _FP:
    cdef int n, half
    cdef i64 max_count, cnt
    cdef double[:] q
    cdef double[:, :] mu
    cdef i64[:] x
    cdef object buf
    cdef i64[:, :] out

    def __init__(self, R, double bound2, bint half, i64 max_count):
        cdef int i, j
        self.n = R.shape[0]
        self.half = half
        self.max_count = max_count
        self.cnt = 0
        q = np.empty(self.n)
        mu = np.zeros((self.n, self.n))
        for i in range(self.n):
            q[i] = R[i, i] ** 2
            for j in range(self.n):
                mu[i, j] = R[i, j] / R[i, i]
        self.q = q
        self.mu = mu
        self.x = np.zeros(self.n, dtype=np.int64)
        self.buf = np.zeros((256, self.n), dtype=np.int64)
        self.out = self.buf

    cdef int _rec(self, int i, double rem, bint top_zero) except -1:
        cdef double c = 0.0, r, t
        cdef i64 lo, hi, xi
        cdef int j
        for j in range(i + 1, self.n):
            c -= self.mu[i, j] * self.x[j]
        if rem < 0:
            rem = 0
        r = sqrt(rem / self.q[i])
        lo = <i64>ceil(c - r - 1e-9)
        hi = <i64>floor(c + r + 1e-9)
        if self.half and top_zero and lo < 0:
            lo = 0
        for xi in range(lo, hi + 1):
            t = (xi - c) * (xi - c) * self.q[i]
            if t > rem * (1 + 1e-12) + 1e-300:
                continue
            self.x[i] = xi
            if i == 0:
                if not (top_zero and xi == 0):
                    if self.cnt >= self.max_count:
                        raise BudgetExceeded(f"more than {self.max_count} short vectors")
                    if self.cnt >= self.out.shape[0]:
                        self.buf = np.concatenate([np.asarray(self.buf), np.zeros_like(self.buf)])
                        self.out = self.buf
                    for j in range(self.n):
                        self.out[self.cnt, j] = self.x[j]
                    self.cnt += 1
            else:
                self._rec(i - 1, rem - t, top_zero and xi == 0)
        self.x[i] = 0
        return 0

    def run(self, double bound2):
        self._rec(self.n - 1, bound2, True)
        return np.asarray(self.buf)[:self.cnt].copy()


def short_vectors(R, bound2, half, max_count):
    R = np.ascontiguousarray(R, dtype=np.float64)
    return _FP(R, float(bound2), bool(half), int(max_count)).run(float(bound2))

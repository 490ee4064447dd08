# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels: twins of the pure-Python versions in ``_pure``.

Covers the three scalar kernels that dominate the Monte Carlo and
property-suite runtimes: 1-D slab intersections, 2-D polygon clipping and
the signed Irwin-Hall subset sum.  The 3-D clipper stays in Python (it is
never the dominant cost; see benchmarks/bench_kernels.py).
"""

from libc.math cimport INFINITY, fabs, isfinite

import numpy as np

cimport numpy as cnp

cnp.import_array()

cdef double _TINY = 1e-300
cdef int _MAXV = 256


def interval_length(w, lo, hi):
    """Length of the intersection of the 1-D slabs lo_i <= w_i*y <= hi_i."""
    cdef cnp.ndarray[cnp.float64_t, ndim=1] wa = np.ascontiguousarray(w, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] la = np.ascontiguousarray(lo, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] ha = np.ascontiguousarray(hi, dtype=np.float64)
    cdef Py_ssize_t m = wa.shape[0]
    cdef double left = -INFINITY
    cdef double right = INFINITY
    cdef double wi, a, b
    cdef Py_ssize_t i
    for i in range(m):
        wi = wa[i]
        if wi > _TINY:
            a = la[i] / wi
            b = ha[i] / wi
        elif wi < -_TINY:
            a = ha[i] / wi
            b = la[i] / wi
        else:
            if la[i] > 0.0 or ha[i] < 0.0:
                return 0.0
            continue
        if a > left:
            left = a
        if b < right:
            right = b
        if right <= left:
            return 0.0
    if not (isfinite(left) and isfinite(right)):
        raise ValueError("unbounded slab intersection (no spanning constraints)")
    return right - left


cdef int _clip2(double* xs, double* ys, int m, double nx, double ny, double b,
                double eps, double* ox, double* oy):
    cdef int out = 0
    cdef int i, j
    cdef double px, py, qx, qy, dp, dq, t
    for i in range(m):
        j = i + 1
        if j == m:
            j = 0
        px = xs[i]; py = ys[i]
        qx = xs[j]; qy = ys[j]
        dp = nx * px + ny * py - b
        dq = nx * qx + ny * qy - b
        if dp <= eps:
            ox[out] = px; oy[out] = py; out += 1
        if (dp < -eps and dq > eps) or (dp > eps and dq < -eps):
            t = dp / (dp - dq)
            ox[out] = px + t * (qx - px)
            oy[out] = py + t * (qy - py)
            out += 1
        if out >= _MAXV - 2:
            raise ValueError("polygon vertex cap exceeded")
    return out


def polygon_area(W, lo, hi):
    """Area of the intersection of 2-D slabs lo_i <= <w_i, y> <= hi_i."""
    cdef cnp.ndarray[cnp.float64_t, ndim=2] Wa = np.ascontiguousarray(W, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] la = np.ascontiguousarray(lo, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] ha = np.ascontiguousarray(hi, dtype=np.float64)
    cdef Py_ssize_t m = Wa.shape[0]
    cdef Py_ssize_t i
    cdef int i0 = 0, i1 = -1
    cdef double best = -1.0, r, det, d, wmax = 0.0
    for i in range(m):
        r = Wa[i, 0] * Wa[i, 0] + Wa[i, 1] * Wa[i, 1]
        if r > best:
            best = r
            i0 = <int>i
        if fabs(Wa[i, 0]) > wmax:
            wmax = fabs(Wa[i, 0])
        if fabs(Wa[i, 1]) > wmax:
            wmax = fabs(Wa[i, 1])
    best = -1.0
    det = 0.0
    for i in range(m):
        d = Wa[i0, 0] * Wa[i, 1] - Wa[i0, 1] * Wa[i, 0]
        if fabs(d) > best:
            best = fabs(d)
            det = d
            i1 = <int>i
    if fabs(det) < 1e-14 * (1.0 + wmax) * (1.0 + wmax):
        return 0.0

    cdef double a00 = Wa[i0, 0], a01 = Wa[i0, 1]
    cdef double a10 = Wa[i1, 0], a11 = Wa[i1, 1]
    cdef double xs[256]
    cdef double ys[256]
    cdef double tx[256]
    cdef double ty[256]
    cdef double s, t
    cdef double corners_s[4]
    cdef double corners_t[4]
    corners_s[0] = la[i0]; corners_t[0] = la[i1]
    corners_s[1] = ha[i0]; corners_t[1] = la[i1]
    corners_s[2] = ha[i0]; corners_t[2] = ha[i1]
    corners_s[3] = la[i0]; corners_t[3] = ha[i1]
    cdef int nv = 4, k
    cdef double scale = 0.0
    for k in range(4):
        s = corners_s[k]; t = corners_t[k]
        xs[k] = (a11 * s - a01 * t) / det
        ys[k] = (a00 * t - a10 * s) / det
        if fabs(xs[k]) + fabs(ys[k]) > scale:
            scale = fabs(xs[k]) + fabs(ys[k])
    cdef double eps = 1e-14 * (1.0 + scale)
    for i in range(m):
        if i == i0 or i == i1:
            continue
        nv = _clip2(xs, ys, nv, Wa[i, 0], Wa[i, 1], ha[i], eps, tx, ty)
        if nv < 3:
            return 0.0
        nv = _clip2(tx, ty, nv, -Wa[i, 0], -Wa[i, 1], -la[i], eps, xs, ys)
        if nv < 3:
            return 0.0
    cdef double area = 0.0
    cdef int j
    for k in range(nv):
        j = k + 1
        if j == nv:
            j = 0
        area += xs[k] * ys[j] - ys[k] * xs[j]
    return 0.5 * fabs(area)


def irwin_hall_at(c, double t):
    """Density at t of sum(c_j * V_j), V_j iid uniform on [0, 1].

    Gray-code enumeration of the 2^n subset sums with a long-double
    accumulator against the cancellation.
    """
    cdef cnp.ndarray[cnp.float64_t, ndim=1] ca = np.ascontiguousarray(c, dtype=np.float64)
    cdef int n = <int>ca.shape[0]
    if n == 0:
        raise ValueError("need at least one coefficient")
    if n > 24:
        raise ValueError("combinatorial blowup guard: n > 24")
    cdef Py_ssize_t i
    cdef double prod = 1.0
    for i in range(n):
        if ca[i] <= 0.0:
            raise ValueError("coefficients must be positive")
        prod *= ca[i]
    cdef long double acc = 0.0
    cdef double ssum = 0.0
    cdef double sign = 1.0
    cdef double diff, term
    cdef unsigned long total = (<unsigned long>1) << n
    cdef unsigned long g, x
    cdef int bit, p, state = 0
    cdef int pw = n - 1
    # subset = empty
    diff = t
    if diff > 0.0:
        term = 1.0
        for p in range(pw):
            term *= diff
        acc += term
    for g in range(1, total):
        x = g
        bit = 0
        while (x & 1) == 0:
            x >>= 1
            bit += 1
        if (state >> bit) & 1:
            ssum -= ca[bit]
            state ^= 1 << bit
        else:
            ssum += ca[bit]
            state ^= 1 << bit
        sign = -sign
        diff = t - ssum
        if diff > 0.0:
            term = 1.0
            for p in range(pw):
                term *= diff
            acc += sign * term
    cdef double fact = 1.0
    for p in range(2, n):
        fact *= p
    return <double>(acc / (fact * prod))

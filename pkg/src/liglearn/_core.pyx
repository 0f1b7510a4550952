# cython: boundscheck=False, wraparound=False, initializedcheck=False, cdivision=True
"""Compiled scan kernels over the joint-action hypercube {-1,+1}^n.

Joint actions are visited in Gray-code order so each step flips a single
player's action and the n influence sums are updated in O(n) instead of
recomputed in O(n^2).  Integer-valued weights stay exact in float64 (every
partial sum is a small integer), so tol=0 scans give exact counts; for
general float weights the sums are refreshed from scratch every 2^20 steps
to keep incremental rounding below any sensible tolerance.
"""
import numpy as np

cimport numpy as cnp

cnp.import_array()

DEF REFRESH_MASK = 0xFFFFF  # refresh accumulators every 2^20 steps


def equilibria_ids(object W_in, object b_in, double tol):
    """Sorted int64 indices of all pure-strategy Nash equilibria.

    Bit i of an index is set iff player i plays +1.  x is an equilibrium iff
    x_i * (w_i . x_{-i} - b_i) >= -tol for every player i.
    """
    W_arr = np.ascontiguousarray(W_in, dtype=np.float64)
    b_arr = np.ascontiguousarray(b_in, dtype=np.float64)
    WT_arr = np.ascontiguousarray(W_arr.T)
    cdef const double[:, ::1] W = W_arr
    cdef const double[:, ::1] WT = WT_arr
    cdef const double[::1] b = b_arr
    cdef Py_ssize_t n = W_arr.shape[0]

    xs_arr = np.full(n, -1, dtype=np.float64)
    cdef double[::1] xs = xs_arr
    s_arr = np.empty(n, dtype=np.float64)
    cdef double[::1] s = s_arr

    cdef Py_ssize_t i, j, cnt = 0, cap = 1024
    out = np.empty(cap, dtype=np.int64)
    cdef cnp.int64_t[::1] ov = out

    for i in range(n):
        s[i] = -b[i]
        for j in range(n):
            s[i] -= W[i, j]

    cdef unsigned long long t, tt, total = 1ULL << n
    cdef cnp.int64_t g = 0
    cdef double d2
    cdef bint ok

    ok = True
    for i in range(n):
        if xs[i] * s[i] < -tol:
            ok = False
            break
    if ok:
        ov[0] = 0
        cnt = 1

    for t in range(1, total):
        tt = t
        j = 0
        while not (tt & 1ULL):
            tt >>= 1
            j += 1
        xs[j] = -xs[j]
        d2 = 2.0 * xs[j]
        for i in range(n):
            s[i] += WT[j, i] * d2
        g = <cnp.int64_t> (t ^ (t >> 1))
        if (t & REFRESH_MASK) == 0:
            for i in range(n):
                s[i] = -b[i]
                for j in range(n):
                    s[i] += W[i, j] * xs[j]
        ok = True
        for i in range(n):
            if xs[i] * s[i] < -tol:
                ok = False
                break
        if ok:
            if cnt == cap:
                cap *= 2
                grown = np.empty(cap, dtype=np.int64)
                grown[:cnt] = out[:cnt]
                out = grown
                ov = out
            ov[cnt] = g
            cnt += 1

    res = out[:cnt].copy()
    res.sort()
    return res


def hyperplane_hits(object w_in, double b, double tol):
    """Number of vertices x in {-1,+1}^d with |w . x - b| <= tol."""
    w_arr = np.ascontiguousarray(w_in, dtype=np.float64)
    cdef const double[::1] w = w_arr
    cdef Py_ssize_t d = w_arr.shape[0]

    xs_arr = np.full(d, -1.0, dtype=np.float64)
    cdef double[::1] xs = xs_arr

    cdef double s = -b
    cdef Py_ssize_t i, j
    for i in range(d):
        s -= w[i]

    cdef unsigned long long t, tt, total = 1ULL << d
    cdef long long cnt = 0

    if -tol <= s <= tol:
        cnt = 1
    for t in range(1, total):
        tt = t
        j = 0
        while not (tt & 1ULL):
            tt >>= 1
            j += 1
        xs[j] = -xs[j]
        s += 2.0 * xs[j] * w[j]
        if (t & REFRESH_MASK) == 0:
            s = -b
            for i in range(d):
                s += w[i] * xs[i]
        if -tol <= s <= tol:
            cnt += 1
    return int(cnt)

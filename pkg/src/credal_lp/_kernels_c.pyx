# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled versions of the hot kernels in ``_kernels_py``.

Same signatures and the same left-to-right accumulation order.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport INFINITY

cnp.import_array()

cdef enum:
    B11 = 1
    B10 = 2
    B01 = 4
    B00 = 8
    MAXN = 64

cdef int COMBINE[16][16]


cdef int _combine(int a, int b):
    cdef int out = 0, pa, pb, ia, ja, ib, jb, i, j
    for pa in range(4):
        if not (a & (1 << pa)):
            continue
        ia = 1 if pa in (0, 1) else 0
        ja = 1 if pa in (0, 2) else 0
        for pb in range(4):
            if not (b & (1 << pb)):
                continue
            ib = 1 if pb in (0, 1) else 0
            jb = 1 if pb in (0, 2) else 0
            i = ia & ib
            j = ja & jb
            if i and j:
                out |= B11
            elif i:
                out |= B10
            elif j:
                out |= B01
            else:
                out |= B00
    return out


cdef void _init_combine():
    cdef int a, b
    for a in range(16):
        for b in range(16):
            COMBINE[a][b] = _combine(a, b)


_init_combine()


cdef inline double _dot(const double[:, ::1] M, Py_ssize_t r, const double* x, Py_ssize_t n) noexcept nogil:
    cdef double s = 0.0
    cdef Py_ssize_t j
    for j in range(n):
        s = s + M[r, j] * x[j]
    return s


def feasible_mass(X, Y, z, mass):
    cdef const double[:, ::1] Xv = np.ascontiguousarray(X, dtype=np.float64)
    cdef const double[:, ::1] Yv = np.ascontiguousarray(Y, dtype=np.float64)
    cdef const double[::1] zv = np.ascontiguousarray(z, dtype=np.float64)
    cdef const double[::1] mv = np.ascontiguousarray(mass, dtype=np.float64)
    cdef Py_ssize_t C = Xv.shape[0], n = Xv.shape[1], R = Yv.shape[0], c, r
    out = np.zeros(C)
    cdef double[::1] ov = out
    cdef double s
    with nogil:
        for c in range(C):
            s = 0.0
            for r in range(R):
                if _dot(Yv, r, &Xv[c, 0], n) <= zv[r]:
                    s += mv[r]
            ov[c] = s
    return out


cdef void _argsort(const double* key, Py_ssize_t n, Py_ssize_t* order) noexcept nogil:
    # insertion sort, stable; n is tiny
    cdef Py_ssize_t i, j, t
    for i in range(n):
        order[i] = i
    for i in range(1, n):
        t = order[i]
        j = i - 1
        while j >= 0 and key[order[j]] > key[t]:
            order[j + 1] = order[j]
            j -= 1
        order[j + 1] = t


cdef double _knapsack(const double* w, const double* x, const double[:, ::1] a, const double[:, ::1] b,
                      Py_ssize_t r, Py_ssize_t n, double lo, double hi,
                      const Py_ssize_t* dec_order, const double* dec_ratio,
                      const Py_ssize_t* inc_order, const double* inc_ratio) noexcept nogil:
    cdef double s_min = 0.0, s_max = 0.0, s0 = 0.0, val = 0.0, y0, need, cap, take
    cdef Py_ssize_t j, k
    for j in range(n):
        s_min = s_min + a[r, j] * x[j]
    for j in range(n):
        s_max = s_max + b[r, j] * x[j]
    if lo > hi or s_min > hi or s_max < lo:
        return -INFINITY
    for j in range(n):
        y0 = b[r, j] if w[j] > 0 else a[r, j]
        s0 = s0 + y0 * x[j]
    for j in range(n):
        y0 = b[r, j] if w[j] > 0 else a[r, j]
        val = val + y0 * w[j]
    need = s0 - hi
    for k in range(n):
        j = dec_order[k]
        if dec_ratio[j] == INFINITY:
            continue
        cap = (b[r, j] - a[r, j]) * x[j]
        take = need
        if take < 0.0:
            take = 0.0
        if take > cap:
            take = cap
        val = val - dec_ratio[j] * take
        need = need - take
    need = lo - s0
    for k in range(n):
        j = inc_order[k]
        if inc_ratio[j] == INFINITY:
            continue
        cap = (b[r, j] - a[r, j]) * x[j]
        take = need
        if take < 0.0:
            take = 0.0
        if take > cap:
            take = cap
        val = val - inc_ratio[j] * take
        need = need - take
    return val


cdef void _ratios(const double* w, const double* x, Py_ssize_t n,
                  double* dec_ratio, Py_ssize_t* dec_order,
                  double* inc_ratio, Py_ssize_t* inc_order) noexcept nogil:
    cdef Py_ssize_t j
    for j in range(n):
        if x[j] > 0 and w[j] > 0:
            dec_ratio[j] = w[j] / x[j]
        else:
            dec_ratio[j] = INFINITY
        if x[j] > 0 and not (w[j] > 0):
            inc_ratio[j] = -w[j] / x[j]
        else:
            inc_ratio[j] = INFINITY
    _argsort(dec_ratio, n, dec_order)
    _argsort(inc_ratio, n, inc_order)


cdef int _row_mask(const double* x, const double* xp, const double* d_pos, const double* d_neg,
                   const double[:, ::1] ylo, const double[:, ::1] yhi, double zl, double zh,
                   Py_ssize_t r, Py_ssize_t n,
                   const Py_ssize_t* a_dec_o, const double* a_dec_r, const Py_ssize_t* a_inc_o, const double* a_inc_r,
                   const Py_ssize_t* b_dec_o, const double* b_dec_r, const Py_ssize_t* b_inc_o, const double* b_inc_r,
                   const Py_ssize_t* c_dec_o, const double* c_dec_r, const Py_ssize_t* c_inc_o, const double* c_inc_r,
                   const Py_ssize_t* e_dec_o, const double* e_dec_r, const Py_ssize_t* e_inc_o, const double* e_inc_r) noexcept nogil:
    cdef double lo_x = _dot(ylo, r, x, n), lo_p = _dot(ylo, r, xp, n)
    cdef double hi_x = _dot(yhi, r, x, n), hi_p = _dot(yhi, r, xp, n)
    cdef int mask = 0
    cdef double ta, tb
    cdef double zmin = zh if zh < zl else zl
    if lo_x <= zh and lo_p <= zh:
        mask |= B11
    if hi_x > zl and hi_p > zl:
        mask |= B00
    if lo_x <= zh and not (lo_p <= zh):
        mask |= B10
    if not (lo_x <= zh) and lo_p <= zh:
        mask |= B01
    if hi_x <= zl and not (hi_p <= zl):
        mask |= B10
    if not (hi_x <= zl) and hi_p <= zl:
        mask |= B01
    if not (mask & B10):
        ta = _knapsack(xp, x, ylo, yhi, r, n, -INFINITY, zmin, a_dec_o, a_dec_r, a_inc_o, a_inc_r) - zl
        tb = _knapsack(d_pos, x, ylo, yhi, r, n, zl, zh, b_dec_o, b_dec_r, b_inc_o, b_inc_r)
        if ta > 0.0 or tb > 0.0:
            mask |= B10
    if not (mask & B01):
        ta = _knapsack(x, xp, ylo, yhi, r, n, -INFINITY, zmin, c_dec_o, c_dec_r, c_inc_o, c_inc_r) - zl
        tb = _knapsack(d_neg, xp, ylo, yhi, r, n, zl, zh, e_dec_o, e_dec_r, e_inc_o, e_inc_r)
        if ta > 0.0 or tb > 0.0:
            mask |= B01
    return mask


def upper_diff_pairs(X, pairs, ylo, yhi, zlo, zhi, rmass, row_start, ulo, uhi, umass, double L):
    cdef const double[:, ::1] Xv = np.ascontiguousarray(X, dtype=np.float64)
    cdef const Py_ssize_t[:, ::1] Pv = np.ascontiguousarray(np.asarray(pairs, dtype=np.intp).reshape(-1, 2))
    cdef const double[:, ::1] ylv = np.ascontiguousarray(ylo, dtype=np.float64)
    cdef const double[:, ::1] yhv = np.ascontiguousarray(yhi, dtype=np.float64)
    cdef const double[::1] zlv = np.ascontiguousarray(zlo, dtype=np.float64)
    cdef const double[::1] zhv = np.ascontiguousarray(zhi, dtype=np.float64)
    cdef const double[::1] rmv = np.ascontiguousarray(rmass, dtype=np.float64)
    cdef const Py_ssize_t[::1] rsv = np.ascontiguousarray(row_start, dtype=np.intp)
    cdef const double[:, ::1] ulv = np.ascontiguousarray(ulo, dtype=np.float64)
    cdef const double[:, ::1] uhv = np.ascontiguousarray(uhi, dtype=np.float64)
    cdef const double[::1] umv = np.ascontiguousarray(umass, dtype=np.float64)
    cdef Py_ssize_t K = Pv.shape[0], n = Xv.shape[1], m = rsv.shape[0] - 1, Q = umv.shape[0]
    if n > MAXN:
        raise ValueError("too many decision variables for the compiled kernel")
    out = np.empty(K)
    cdef double[::1] ov = out

    cdef double d_pos[MAXN]
    cdef double d_neg[MAXN]
    cdef double a_dec_r[MAXN], a_inc_r[MAXN], b_dec_r[MAXN], b_inc_r[MAXN]
    cdef double c_dec_r[MAXN], c_inc_r[MAXN], e_dec_r[MAXN], e_inc_r[MAXN]
    cdef Py_ssize_t a_dec_o[MAXN], a_inc_o[MAXN], b_dec_o[MAXN], b_inc_o[MAXN]
    cdef Py_ssize_t c_dec_o[MAXN], c_inc_o[MAXN], e_dec_o[MAXN], e_inc_o[MAXN]
    cdef double dist[16]
    cdef double new[16]
    cdef double hist[16]
    cdef double v[4]
    cdef double total, best, acc, s11, s10, s01
    cdef const double* x
    cdef const double* xp
    cdef Py_ssize_t k, i, r, j, q, S, p, a, b
    cdef int mask

    with nogil:
        for k in range(K):
            x = &Xv[Pv[k, 0], 0]
            xp = &Xv[Pv[k, 1], 0]
            for j in range(n):
                d_pos[j] = xp[j] - x[j]
                d_neg[j] = x[j] - xp[j]
            _ratios(xp, x, n, a_dec_r, a_dec_o, a_inc_r, a_inc_o)
            _ratios(d_pos, x, n, b_dec_r, b_dec_o, b_inc_r, b_inc_o)
            _ratios(x, xp, n, c_dec_r, c_dec_o, c_inc_r, c_inc_o)
            _ratios(d_neg, xp, n, e_dec_r, e_dec_o, e_inc_r, e_inc_o)

            for S in range(16):
                dist[S] = 0.0
            dist[B11] = 1.0
            for i in range(m):
                for S in range(16):
                    hist[S] = 0.0
                for r in range(rsv[i], rsv[i + 1]):
                    mask = _row_mask(x, xp, d_pos, d_neg, ylv, yhv, zlv[r], zhv[r], r, n,
                                     a_dec_o, a_dec_r, a_inc_o, a_inc_r,
                                     b_dec_o, b_dec_r, b_inc_o, b_inc_r,
                                     c_dec_o, c_dec_r, c_inc_o, c_inc_r,
                                     e_dec_o, e_dec_r, e_inc_o, e_inc_r)
                    hist[mask] += rmv[r]
                for S in range(16):
                    new[S] = 0.0
                for a in range(1, 16):
                    if dist[a] == 0.0:
                        continue
                    for b in range(1, 16):
                        if hist[b] != 0.0:
                            new[COMBINE[a][b]] += dist[a] * hist[b]
                for S in range(16):
                    dist[S] = new[S]

            total = 0.0
            for S in range(1, 16):
                if dist[S] == 0.0:
                    continue
                acc = 0.0
                for q in range(Q):
                    s11 = 0.0
                    for j in range(n):
                        if d_neg[j] > 0:
                            s11 = s11 + uhv[q, j] * d_neg[j]
                        else:
                            s11 = s11 + ulv[q, j] * d_neg[j]
                    s10 = 0.0
                    for j in range(n):
                        s10 = s10 + uhv[q, j] * x[j]
                    s01 = 0.0
                    for j in range(n):
                        s01 = s01 + ulv[q, j] * xp[j]
                    v[0] = s11
                    v[1] = s10 - L
                    v[2] = L - s01
                    v[3] = 0.0
                    best = -INFINITY
                    for p in range(4):
                        if S & (1 << p):
                            if v[p] > best:
                                best = v[p]
                    acc += umv[q] * best
                total += dist[S] * acc
            ov[k] = total
    return out

# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled versions of the Monte Carlo kernels in ``_kernels_py``."""

import numpy as np
cimport numpy as cnp
from libc.math cimport exp, exp2, expm1, log, log1p, sqrt, INFINITY, fmin, fmax

cnp.import_array()

cdef double LN2 = log(2.0)
cdef double INV_GOLDEN = (sqrt(5.0) - 1.0) / 2.0
cdef int GOLDEN_ITERS = 60
cdef int ROOT_ITERS = 56
cdef int GL_NODES = 12
cdef int GL_PANELS = 6
cdef double GL_RATIO = 0.3
cdef double F_MIN = 1e-6

_x, _w = np.polynomial.legendre.leggauss(12)
cdef double[::1] GL_X = np.ascontiguousarray(_x)
cdef double[::1] GL_W = np.ascontiguousarray(_w)


cdef inline double _l2p(double x) nogil:
    return log1p(x) / LN2


# ---------------------------------------------------------------- full duplex

cdef inline double _fd_q(double h2, double two_r, double lam1, double lam2, double delta) nogil:
    cdef double a1 = fmax(two_r - h2 / (1.0 + delta) - 1.0, 0.0)
    cdef double a2 = two_r * (1.0 + 1.0 / delta) - 1.0
    cdef double d = lam2 - lam1
    cdef double q = (lam2 / d) * exp(-(lam1 * a2 + d * a1)) - (lam1 / d) * exp(-lam2 * a2)
    return fmin(fmax(q, 0.0), 1.0)


def fd_csir_delta_asym(h2_in, double R, double lam1, double lam2, double lo, double hi, int n):
    cdef double[::1] h2 = np.ascontiguousarray(h2_in, dtype=np.float64)
    cdef Py_ssize_t t, i, nt = h2.shape[0]
    out_arr = np.empty(nt)
    cdef double[::1] out = out_arr
    cdef double two_r = 2.0 ** R
    cdef double dl = lam2 - lam1
    lgrid_arr = np.linspace(np.log(lo), np.log(hi), n)
    grid_arr = np.exp(lgrid_arr)
    a2 = two_r * (1.0 + 1.0 / grid_arr) - 1.0
    cdef double[::1] lgrid = lgrid_arr
    cdef double[::1] grid = grid_arr
    cdef double[::1] e1 = (lam2 / dl) * np.exp(-lam1 * a2)
    cdef double[::1] e2 = (lam1 / dl) * np.exp(-lam2 * a2)
    cdef double[::1] inv = 1.0 / (1.0 + grid_arr)
    cdef double step = lgrid[1] - lgrid[0]
    cdef double h, q, a1, bq, a, b, c, d, xm, qm, dt, qt
    cdef Py_ssize_t bk
    cdef int it
    with nogil:
        for t in range(nt):
            h = h2[t]
            if h <= 0.0:
                out[t] = INFINITY
                continue
            bq = -1.0
            bk = 0
            for i in range(n):
                a1 = two_r - 1.0 - h * inv[i]
                if a1 > 0.0:
                    q = e1[i] * exp(-dl * a1) - e2[i]
                else:
                    q = e1[i] - e2[i]
                q = fmin(fmax(q, 0.0), 1.0)
                if q > bq:
                    bq = q
                    bk = i
            a = lgrid[bk] - step
            b = lgrid[bk] + step
            for it in range(GOLDEN_ITERS):
                c = b - INV_GOLDEN * (b - a)
                d = a + INV_GOLDEN * (b - a)
                if _fd_q(h, two_r, lam1, lam2, exp(c)) >= _fd_q(h, two_r, lam1, lam2, exp(d)):
                    b = d
                else:
                    a = c
            xm = exp(0.5 * (a + b))
            qm = _fd_q(h, two_r, lam1, lam2, xm)
            out[t] = grid[bk]
            if qm > bq:
                bq = qm
                out[t] = xm
            dt = h / (two_r - 1.0) - 1.0
            if dt > 0.0:
                qt = _fd_q(h, two_r, lam1, lam2, dt)
                if qt > bq:
                    out[t] = dt
    return out_arr


# ------------------------------------------------------- half duplex, global

cdef inline double _hd_profile(double h2, double g2, double lr, double f, double* delta) nogil:
    cdef double em = expm1((1.0 - f) / f * lr)
    if em == 0.0:
        delta[0] = INFINITY
    else:
        delta[0] = (1.0 + h2 / (1.0 + g2)) / em
    return (f * log(1.0 + g2 + h2 / (1.0 + delta[0])) + (1.0 - f) * log1p(g2)) / LN2


def hd_global_search(h2_in, g1_in, g2_in, int n_coarse):
    cdef double[::1] h2 = np.ascontiguousarray(h2_in, dtype=np.float64)
    cdef double[::1] g1 = np.ascontiguousarray(g1_in, dtype=np.float64)
    cdef double[::1] g2 = np.ascontiguousarray(g2_in, dtype=np.float64)
    cdef Py_ssize_t t, i, nt = h2.shape[0]
    f_arr = np.empty(nt)
    d_arr = np.empty(nt)
    r_arr = np.empty(nt)
    cdef double[::1] fo = f_arr
    cdef double[::1] do = d_arr
    cdef double[::1] ro = r_arr
    grid_arr = np.linspace(F_MIN, 1.0 - F_MIN, n_coarse)
    cdef double[::1] grid = grid_arr
    cdef double[::1] kf = (1.0 - grid_arr) / grid_arr
    cdef double step = grid[1] - grid[0]
    cdef double r, br, bf, a, b, c, d, dd, fm, lr, lv, hh, gg, cst, em, x, fc, fd
    cdef int it
    with nogil:
        for t in range(nt):
            hh = h2[t]
            gg = g2[t]
            lr = log1p(g1[t] + gg) - log1p(gg)
            lv = log1p(gg)
            cst = 1.0 + hh / (1.0 + gg)
            br = -INFINITY
            bf = grid[0]
            for i in range(n_coarse):
                # plain exp/log are accurate enough in absolute terms for the coarse scan
                x = kf[i] * lr
                em = expm1(x) if x < 0.5 else exp(x) - 1.0
                if em == 0.0:
                    r = lv / LN2
                else:
                    r = (grid[i] * log(1.0 + gg + hh / (1.0 + cst / em)) + (1.0 - grid[i]) * lv) / LN2
                if r > br:
                    br = r
                    bf = grid[i]
            a = fmax(bf - step, F_MIN)
            b = fmin(bf + step, 1.0 - F_MIN)
            # classic golden section: one new evaluation per step
            c = b - INV_GOLDEN * (b - a)
            d = a + INV_GOLDEN * (b - a)
            fc = _hd_profile(hh, gg, lr, c, &dd)
            fd = _hd_profile(hh, gg, lr, d, &dd)
            for it in range(GOLDEN_ITERS):
                if fc >= fd:
                    b = d
                    d = c
                    fd = fc
                    c = b - INV_GOLDEN * (b - a)
                    fc = _hd_profile(hh, gg, lr, c, &dd)
                else:
                    a = c
                    c = d
                    fc = fd
                    d = a + INV_GOLDEN * (b - a)
                    fd = _hd_profile(hh, gg, lr, d, &dd)
            fm = 0.5 * (a + b)
            if _hd_profile(hh, gg, lr, fm, &dd) > br:
                bf = fm
            ro[t] = _hd_profile(hh, gg, lr, bf, &dd)
            fo[t] = bf
            do[t] = dd
    return f_arr, d_arr, r_arr


# -------------------------------------------------------- half duplex, CSIR

cdef double _hd_success(double hs, double c, double f, double R, double lam1, double lam2) nogil:
    cdef double w_a, w_b, w_cap, upper, tail, g, p, step
    cdef double length, p_lo, p_hi, half, pmid, w, pw, bu, acc, e_hi, e_lo
    cdef int it, j, k
    if f * _l2p(hs) - R >= 0.0:
        w_a = 0.0
    else:
        # the constraint is convex and increasing in w, so Newton from the
        # right end of [0, R] decreases monotonically onto the root
        w_a = R
        for it in range(ROOT_ITERS):
            p = exp2(w_a)
            g = f * log(p + hs) / LN2 + (1.0 - f) * w_a - R
            step = g / (f * p / (p + hs) + (1.0 - f))
            w_a -= step
            if step <= 1e-15 * (1.0 + w_a):
                break
        if w_a < 0.0:
            w_a = 0.0
    w_b = R + f * c
    w_cap = _l2p(40.0 / lam2)
    tail = exp(-lam2 * expm1(fmin(fmax(w_a, w_b), 1100.0) * LN2))
    upper = fmin(w_b, w_cap)
    if not (upper > w_a and f < 1.0):
        return fmin(fmax(tail, 0.0), 1.0)
    length = upper - w_a
    acc = 0.0
    e_hi = 1.0
    for j in range(GL_PANELS):
        e_lo = 0.0 if j == GL_PANELS - 1 else e_hi * GL_RATIO
        p_lo = upper - length * e_hi
        p_hi = upper - length * e_lo
        half = 0.5 * (p_hi - p_lo)
        pmid = 0.5 * (p_hi + p_lo)
        for k in range(GL_NODES):
            w = pmid + half * GL_X[k]
            pw = exp2(w)
            bu = exp2((w_b - f * w) / (1.0 - f)) - pw
            acc += GL_W[k] * half * LN2 * pw * lam2 * exp(-lam2 * (pw - 1.0) - lam1 * fmax(bu, 0.0))
        e_hi = e_lo
    return fmin(fmax(tail + acc, 0.0), 1.0)


def hd_csir_success(hs_in, c_in, f_in, double R, double lam1, double lam2):
    hs_b, c_b, f_b = np.broadcast_arrays(np.asarray(hs_in, float), np.asarray(c_in, float),
                                         np.asarray(f_in, float))
    cdef const double[::1] hs = np.ascontiguousarray(hs_b.ravel())
    cdef const double[::1] c = np.ascontiguousarray(c_b.ravel())
    cdef const double[::1] f = np.ascontiguousarray(f_b.ravel())
    cdef Py_ssize_t i, n = hs.shape[0]
    out_arr = np.empty(n)
    cdef double[::1] out = out_arr
    with nogil:
        for i in range(n):
            out[i] = _hd_success(hs[i], c[i], f[i], R, lam1, lam2)
    return out_arr


# ------------------------------------------------------------------ diamond

def diamond_cut_min(g2_in, hs_in, pen_in, fixed_in):
    cdef double[:, ::1] g2 = np.ascontiguousarray(g2_in, dtype=np.float64)
    cdef double[:, ::1] hs = np.ascontiguousarray(hs_in, dtype=np.float64)
    cdef double[:, ::1] pen = np.ascontiguousarray(pen_in, dtype=np.float64)
    cdef long long[::1] fixed = np.ascontiguousarray(fixed_in, dtype=np.int64)
    cdef Py_ssize_t t, i, nt = g2.shape[0], n = g2.shape[1]
    cdef long long m, nm = 1LL << n, fx
    cdef double sg, sh, sp, v, best
    out_arr = np.empty(nt)
    cdef double[::1] out = out_arr
    with nogil:
        for t in range(nt):
            fx = fixed[t]
            best = INFINITY
            for m in range(nm):
                if (m & fx) != fx:
                    continue
                sg = 0.0
                sh = 0.0
                sp = 0.0
                for i in range(n):
                    if (m >> i) & 1:
                        sg = sg + g2[t, i]
                        if not ((fx >> i) & 1):
                            sp = sp + pen[t, i]
                    else:
                        sh = sh + hs[t, i]
                v = _l2p(sg) + _l2p(sh) - sp
                if v < best:
                    best = v
            out[t] = best
    return out_arr

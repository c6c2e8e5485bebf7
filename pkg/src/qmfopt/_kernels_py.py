"""Pure-numpy implementations of the hot Monte Carlo kernels.

These mirror ``_kernels.pyx`` operation for operation so the two backends
agree to rounding. Every function works on 1-D arrays over trials.
"""

from __future__ import annotations

import numpy as np

LN2 = np.log(2.0)
INV_GOLDEN = (np.sqrt(5.0) - 1.0) / 2.0
GOLDEN_ITERS = 60
ROOT_ITERS = 56
# graded Gauss-Legendre panels for the curved part of the half-duplex region
GL_NODES = 12
GL_PANELS = 6
GL_RATIO = 0.3
F_MIN = 1e-6

_gl_x, _gl_w = np.polynomial.legendre.leggauss(GL_NODES)


def _l2p(x):
    return np.log1p(x) / LN2


# --------------------------------------------------------------------------
# full duplex, CSIR with unequal fade statistics
# --------------------------------------------------------------------------

def _fd_csir_q(h2, two_r, lam1, lam2, delta):
    a1 = np.maximum(two_r - h2 / (1.0 + delta) - 1.0, 0.0)
    a2 = two_r * (1.0 + 1.0 / delta) - 1.0
    d = lam2 - lam1
    q = (lam2 / d) * np.exp(-(lam1 * a2 + d * a1)) - (lam1 / d) * np.exp(-lam2 * a2)
    return np.clip(q, 0.0, 1.0)


def fd_csir_delta_asym(h2, R, lam1, lam2, lo, hi, n):
    """Per-trial maximizer of the CSIR success probability on a log grid, refined."""
    h2 = np.asarray(h2, dtype=float)
    two_r = 2.0 ** R
    d = lam2 - lam1
    lgrid = np.linspace(np.log(lo), np.log(hi), int(n))
    grid = np.exp(lgrid)
    # factors that do not depend on the trial
    a2 = two_r * (1.0 + 1.0 / grid) - 1.0
    e1 = (lam2 / d) * np.exp(-lam1 * a2)
    e2 = (lam1 / d) * np.exp(-lam2 * a2)
    inv = 1.0 / (1.0 + grid)
    a1 = np.maximum(two_r - 1.0 - h2[:, None] * inv[None, :], 0.0)
    q = np.clip(e1[None, :] * np.exp(-d * a1) - e2[None, :], 0.0, 1.0)
    k = np.argmax(q, axis=1)
    best_x = grid[k]
    best_q = q[np.arange(h2.size), k]
    # golden section on log(delta) over the two cells around the best node
    step = lgrid[1] - lgrid[0]
    a = lgrid[k] - step
    b = lgrid[k] + step
    for _ in range(GOLDEN_ITERS):
        c = b - INV_GOLDEN * (b - a)
        dd = a + INV_GOLDEN * (b - a)
        left = (_fd_csir_q(h2, two_r, lam1, lam2, np.exp(c))
                >= _fd_csir_q(h2, two_r, lam1, lam2, np.exp(dd)))
        b = np.where(left, dd, b)
        a = np.where(left, a, c)
    xm = np.exp(0.5 * (a + b))
    qm = _fd_csir_q(h2, two_r, lam1, lam2, xm)
    better = qm > best_q
    best_x = np.where(better, xm, best_x)
    best_q = np.where(better, qm, best_q)
    # the kink where alpha1 reaches zero is a candidate in its own right
    dt = h2 / (two_r - 1.0) - 1.0
    ok = dt > 0.0
    qt = np.where(ok, _fd_csir_q(h2, two_r, lam1, lam2, np.where(ok, dt, 1.0)), -1.0)
    best_x = np.where(qt > best_q, dt, best_x)
    return np.where(h2 > 0.0, best_x, np.inf)


# --------------------------------------------------------------------------
# half duplex, global CSI
# --------------------------------------------------------------------------

def _hd_profile(h2, g2, lr, f):
    """Rate at the branch-equalizing distortion for schedule ``f``.

    ``lr`` is ``ln((1 + g1^2 + g2^2) / (1 + g2^2))``.
    """
    lv = np.log1p(g2)
    with np.errstate(divide="ignore", over="ignore"):
        delta = (1.0 + h2 / (1.0 + g2)) / np.expm1((1.0 - f) / f * lr)
        i1 = (f * np.log1p(g2 + h2 / (1.0 + delta)) + (1.0 - f) * lv) / LN2
    return i1, delta


def hd_global_search(h2, g1, g2, n_coarse):
    """Best ``(f, delta, rate)`` per trial: coarse scan in ``f`` then golden refinement."""
    h2 = np.asarray(h2, dtype=float)
    g1 = np.asarray(g1, dtype=float)
    g2 = np.asarray(g2, dtype=float)
    lr = np.log1p(g1 + g2) - np.log1p(g2)
    grid = np.linspace(F_MIN, 1.0 - F_MIN, int(n_coarse))
    rate, _ = _hd_profile(h2[:, None], g2[:, None], lr[:, None], grid[None, :])
    k = np.argmax(rate, axis=1)
    best_f = grid[k]
    best_r = rate[np.arange(k.size), k]
    step = grid[1] - grid[0]
    a = np.maximum(best_f - step, F_MIN)
    b = np.minimum(best_f + step, 1.0 - F_MIN)
    for _ in range(GOLDEN_ITERS):
        c = b - INV_GOLDEN * (b - a)
        d = a + INV_GOLDEN * (b - a)
        left = _hd_profile(h2, g2, lr, c)[0] >= _hd_profile(h2, g2, lr, d)[0]
        b = np.where(left, d, b)
        a = np.where(left, a, c)
    fm = 0.5 * (a + b)
    rm, _ = _hd_profile(h2, g2, lr, fm)
    best_f = np.where(rm > best_r, fm, best_f)
    best_r, best_d = _hd_profile(h2, g2, lr, best_f)
    return best_f, best_d, best_r


# --------------------------------------------------------------------------
# half duplex, CSIR success probability
# --------------------------------------------------------------------------

def hd_csir_success(hs, c, f, R, lam1, lam2):
    """Probability that both half-duplex QMF constraints hold, over ``(g1^2, g2^2)``.

    ``hs`` is ``h^2 / (1 + delta)`` (``inf`` drops the listening constraint),
    ``c`` the quantization penalty in bits and ``f`` the listening fraction;
    all three broadcast.
    """
    hs, c, f = np.broadcast_arrays(np.asarray(hs, float), np.asarray(c, float),
                                   np.asarray(f, float))
    hs, c, f = hs.ravel(), c.ravel(), f.ravel()
    # w_a: smallest log2(1 + g2^2) meeting the listening-phase constraint
    with np.errstate(invalid="ignore"):
        g0 = f * _l2p(hs) - R
    lo = np.zeros_like(hs)
    hi = np.full_like(hs, float(R))
    for _ in range(ROOT_ITERS):
        mid = 0.5 * (lo + hi)
        with np.errstate(invalid="ignore"):
            g = f * _l2p(np.expm1(mid * LN2) + hs) + (1.0 - f) * mid - R
        up = g >= 0.0
        hi = np.where(up, mid, hi)
        lo = np.where(up, lo, mid)
    w_a = np.where(g0 >= 0.0, 0.0, hi)
    w_b = R + f * c
    # the g2^2 exponential makes anything beyond this negligible
    w_cap = _l2p(40.0 / lam2)
    tail_w = np.maximum(w_a, w_b)
    with np.errstate(over="ignore"):
        tail = np.exp(-lam2 * np.expm1(np.minimum(tail_w, 1100.0) * LN2))
    upper = np.minimum(w_b, w_cap)
    active = (upper > w_a) & (f < 1.0)
    total = tail
    if np.any(active):
        total = tail + _curved_integral(w_a, upper, w_b, f, lam1, lam2, active)
    return np.clip(total, 0.0, 1.0)


def _curved_integral(w_a, upper, w_b, f, lam1, lam2, active):
    a = np.where(active, w_a, 0.0)
    b = np.where(active, upper, 1.0)
    ff = np.where(active, f, 0.5)
    wb = np.where(active, w_b, 1.0)
    length = b - a
    acc = np.zeros_like(a)
    # panels shrink geometrically towards the upper end where the integrand is steepest
    edges = [1.0]
    for _ in range(GL_PANELS - 1):
        edges.append(edges[-1] * GL_RATIO)
    edges.append(0.0)
    for j in range(GL_PANELS):
        p_hi = b - length * edges[j + 1]
        p_lo = b - length * edges[j]
        half = 0.5 * (p_hi - p_lo)
        mid = 0.5 * (p_hi + p_lo)
        for x, wt in zip(_gl_x, _gl_w):
            w = mid + half * x
            pw = np.exp2(w)
            bu = np.exp2((wb - ff * w) / (1.0 - ff)) - pw
            acc += wt * half * LN2 * pw * lam2 * np.exp(-lam2 * (pw - 1.0) - lam1 * np.maximum(bu, 0.0))
    return np.where(active, acc, 0.0)


# --------------------------------------------------------------------------
# diamond cut enumeration
# --------------------------------------------------------------------------

def diamond_cut_min(g2, hs, pen, fixed):
    """Minimum over relay sets ``S`` containing ``fixed`` of the QMF cut value.

    ``g2``, ``hs`` (``h^2/(1+delta)``) and ``pen`` are ``(T, N)``; ``fixed``
    holds one bitmask per trial. The penalty is charged only for relays in
    ``S`` outside ``fixed``. Values are unclipped.
    """
    g2 = np.asarray(g2, dtype=float)
    hs = np.asarray(hs, dtype=float)
    pen = np.asarray(pen, dtype=float)
    fixed = np.asarray(fixed, dtype=np.int64)
    t, n = g2.shape
    masks = np.arange(1 << n, dtype=np.int64)
    bits = ((masks[:, None] >> np.arange(n)) & 1).astype(float)
    sg = g2 @ bits.T
    sh = hs @ (1.0 - bits).T
    sp = pen @ bits.T - (pen * ((fixed[:, None] >> np.arange(n)) & 1)).sum(axis=1)[:, None]
    val = _l2p(sg) + _l2p(sh) - sp
    allowed = (masks[None, :] & fixed[:, None]) == fixed[:, None]
    return np.where(allowed, val, np.inf).min(axis=1)

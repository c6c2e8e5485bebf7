"""Joint schedule and distortion optimization for the half-duplex relay.

With global CSI the distortion that equalizes the two QMF branches has a
closed form for every schedule ``f``, which leaves a one-dimensional search
over ``f``. With CSIR the relay maximizes the success probability over the
unknown ``(g1^2, g2^2)``; that objective is evaluated with a vectorized
Gauss-Legendre rule (``kernels.hd_csir_success``) and searched jointly.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .channel import ChannelSingle
from .errors import RelayLinkAbsent
from .numerics import Region2D, exp_measure, find_root, grid_refine_max
from .qopt_fd import CsirContext
from .rates_single import log2p, quant_penalty

F_MIN = 1e-6
DELTA_RANGE = (1e-4, 1e6)
GOLDEN_ITERS = 40
INV_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


class HdMode(enum.Enum):
    QMF = "QMF"
    DDF = "DDF"
    DIRECT = "DIRECT"


@dataclass(frozen=True)
class HdPolicy:
    """Relay operating point chosen from CSIR; ``outage`` is its predicted outage."""

    mode: HdMode
    f: float
    delta: float
    outage: float = math.nan


# --------------------------------------------------------------------------
# global CSI
# --------------------------------------------------------------------------

def hd_delta_star(ch: ChannelSingle, f):
    """Distortion equalizing ``I_hd1`` and ``I_hd2`` at schedule ``f``.

    Setting the branches equal gives ``1 + (1 + h^2/(1+g2^2)) / delta = K``
    with ``K = ((1+g1^2+g2^2)/(1+g2^2))**((1-f)/f)``, hence
    ``delta = (1 + h^2/(1+g2^2)) / (K - 1)``. ``f = 1`` or ``g1 = 0`` give
    ``inf``.
    """
    f = np.asarray(f, dtype=float)
    lr = np.log1p(ch.g1_2 + ch.g2_2) - np.log1p(ch.g2_2)
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        k = np.expm1((1.0 - f) / f * lr)
        out = np.where(k > 0.0, (1.0 + ch.h2 / (1.0 + ch.g2_2)) / k, np.inf)
    return float(out) if out.ndim == 0 else out


def hd_profile(ch: ChannelSingle, f):
    """Best half-duplex QMF rate at schedule ``f`` (the branch-equalizing point)."""
    delta = hd_delta_star(ch, f)
    f = np.asarray(f, dtype=float)
    with np.errstate(divide="ignore"):
        rate = f * log2p(ch.g2_2 + ch.h2 / (1.0 + np.asarray(delta))) + (1.0 - f) * log2p(ch.g2_2)
    return float(rate) if np.ndim(rate) == 0 else rate


def hd_opt_global(ch: ChannelSingle, coarse_points: int = 1024):
    """Jointly optimal ``(f, delta, rate)`` with global CSI."""
    if ch.g1_2 <= 0.0:
        raise RelayLinkAbsent("g1^2 = 0: bypass the relay")
    f, rate = grid_refine_max(lambda x: hd_profile(ch, x), F_MIN, 1.0 - F_MIN,
                              coarse_points=coarse_points, vectorized=True)
    return f, hd_delta_star(ch, f), rate


def hd_delta_star_numeric(ch: ChannelSingle, f: float) -> float:
    """Branch-crossing distortion found by bracketing ``I_hd1 - I_hd2`` (test oracle)."""
    from .rates_single import hd_qmf_branches

    def gap(d):
        i1, i2 = hd_qmf_branches(ch, d, f)
        return float(i1 - i2)

    return find_root(gap, 1e-250, 1e250, tol=1e-13)


# --------------------------------------------------------------------------
# CSIR
# --------------------------------------------------------------------------

def _listen_floor(hs: float, f: float, R: float) -> float:
    """Smallest ``g2^2`` meeting the listening-phase constraint (``a`` in the docs)."""
    def g(v):
        return f * log2p(v + hs) + (1.0 - f) * log2p(v) - R
    if g(0.0) >= 0.0:
        return 0.0
    return find_root(g, 0.0, 2.0 ** R - 1.0, tol=1e-14)


def hd_csir_region(ctx: CsirContext, f: float, delta: float) -> Region2D:
    """Success region of half-duplex QMF in the ``(g1^2, g2^2)`` plane."""
    R = ctx.R
    c = float(quant_penalty(delta))
    hs = ctx.h2 / (1.0 + delta)
    a = _listen_floor(hs, f, R)
    if f >= 1.0:
        return Region2D.quadrant(0.0, max(a, 2.0 ** (R + c) - 1.0))
    v0 = 2.0 ** (R + f * c) - 1.0

    def boundary(v):
        return 2.0 ** ((R + f * c - f * math.log2(1.0 + v)) / (1.0 - f)) - 1.0 - v

    return Region2D.curve(a, boundary, v0)


def hd_csir_outage(ctx: CsirContext, f: float, delta: float) -> float:
    """Outage of half-duplex QMF at ``(f, delta)`` by adaptive quadrature."""
    if ctx.R == 0.0:
        return 0.0
    region = hd_csir_region(ctx, f, delta)
    return 1.0 - exp_measure(region, ctx.lambda1, ctx.lambda2)


def hd_csir_outage_fast(ctx: CsirContext, f, delta):
    """Vectorized :func:`hd_csir_outage` through the Gauss-Legendre kernel."""
    delta = np.asarray(delta, dtype=float)
    s = kernels.hd_csir_success(ctx.h2 / (1.0 + delta), quant_penalty(delta), f,
                                ctx.R, ctx.lambda1, ctx.lambda2)
    out = 1.0 - s.reshape(np.broadcast_shapes(np.shape(f), delta.shape))
    return float(out) if out.ndim == 0 else out


def ddf_csir_outage(ctx: CsirContext, f) -> float:
    """Outage of DDF at schedule ``f`` given that the relay decodes within ``f``."""
    s = kernels.hd_csir_success(np.inf, 0.0, f, ctx.R, ctx.lambda1, ctx.lambda2)
    out = 1.0 - s.reshape(np.shape(f))
    return float(out) if out.ndim == 0 else out


def direct_outage(ctx: CsirContext) -> float:
    return -math.expm1(-ctx.lambda2 * (2.0 ** ctx.R - 1.0))


def f_ddf(h2, R):
    """Listening fraction at which the relay just decodes; ``> 1`` means never."""
    with np.errstate(divide="ignore"):
        out = np.where(np.asarray(h2) > 0.0, R / log2p(h2), np.inf)
    return float(out) if out.ndim == 0 else out


def _success(h2, f, log_d, R, lam1, lam2):
    d = np.exp(log_d)
    return kernels.hd_csir_success(h2 / (1.0 + d), quant_penalty(d), f, R, lam1, lam2).reshape(
        np.broadcast_shapes(np.shape(h2), np.shape(f), np.shape(log_d)))


def _golden(fun, a, b, iters=GOLDEN_ITERS):
    """Vectorized golden-section maximization on ``[a, b]`` (elementwise)."""
    c = b - INV_GOLDEN * (b - a)
    d = a + INV_GOLDEN * (b - a)
    fc, fd = fun(c), fun(d)
    for _ in range(iters):
        left = fc >= fd
        a, b = np.where(left, a, c), np.where(left, d, b)
        c_new = np.where(left, b - INV_GOLDEN * (b - a), d)
        d_new = np.where(left, c, a + INV_GOLDEN * (b - a))
        probe = np.where(left, c_new, d_new)
        fp = fun(probe)
        fc, fd = np.where(left, fp, fd), np.where(left, fc, fp)
        c, d = c_new, d_new
    x = 0.5 * (a + b)
    return x, fun(x)


def csir_search(h2, R: float, lam1: float, lam2: float, f_max=None,
                nf: int = 64, nd: int = 96, iters: int = GOLDEN_ITERS):
    """Maximize the half-duplex CSIR success probability for each entry of ``h2``.

    The search works on the profile ``P(f) = max over delta``. A coarse
    ``nf x nd`` grid in ``(f, log delta)`` brackets the best distortion of
    every coarse schedule, golden-section refines it, and a final golden
    pass over ``f`` around the best coarse schedule re-optimizes ``delta``
    at each probe. Optimizing ``delta`` inside ``f`` keeps the search on
    the diagonal ridge of the objective, where coordinate moves stall.
    ``f_max`` caps the schedule per entry.

    Returns ``(f, delta, success)`` arrays.
    """
    h2 = np.atleast_1d(np.asarray(h2, dtype=float))
    n = h2.size
    rows = np.arange(n)
    f_hi = np.full(n, 1.0 - F_MIN) if f_max is None else np.minimum(
        np.broadcast_to(np.asarray(f_max, float), (n,)), 1.0 - F_MIN)
    f_hi = np.maximum(f_hi, 2.0 * F_MIN)
    u = np.linspace(0.0, 1.0, nf)
    fgrid = F_MIN + (f_hi[:, None] - F_MIN) * u[None, :]
    lgrid = np.linspace(math.log(DELTA_RANGE[0]), math.log(DELTA_RANGE[1]), nd)
    step_l = lgrid[1] - lgrid[0]
    s = _success(h2[:, None, None], fgrid[:, :, None], lgrid[None, None, :], R, lam1, lam2)
    kd = s.argmax(axis=2)
    coarse = np.take_along_axis(s, kd[:, :, None], axis=2)[:, :, 0]
    hh = h2[:, None]
    x, val = _golden(lambda lg: _success(hh, fgrid, lg, R, lam1, lam2),
                     lgrid[kd] - step_l, lgrid[kd] + step_l, iters)
    take = val > coarse
    prof_l = np.where(take, x, lgrid[kd])
    prof = np.where(take, val, coarse)

    kf = prof.argmax(axis=1)
    best_f, best_l, best_s = fgrid[rows, kf], prof_l[rows, kf], prof[rows, kf]
    k_lo, k_hi = np.maximum(kf - 1, 0), np.minimum(kf + 1, nf - 1)
    nb = np.stack([prof_l[rows, k_lo], best_l, prof_l[rows, k_hi]])
    l_lo, l_hi = nb.min(axis=0) - step_l, nb.max(axis=0) + step_l

    def inner(ff):
        return _golden(lambda lg: _success(h2, ff, lg, R, lam1, lam2), l_lo, l_hi, iters)

    fx, _ = _golden(lambda ff: inner(ff)[1], fgrid[rows, k_lo], fgrid[rows, k_hi], iters)
    lx, sx = inner(fx)
    take = sx > best_s
    best_f, best_l, best_s = (np.where(take, fx, best_f), np.where(take, lx, best_l),
                              np.where(take, sx, best_s))
    return best_f, np.exp(best_l), best_s


def hd_opt_csir(ctx: CsirContext) -> tuple[float, float]:
    """Schedule and distortion minimizing the half-duplex CSIR outage."""
    f, d, _ = csir_search(ctx.h2, ctx.R, ctx.lambda1, ctx.lambda2)
    return float(f[0]), float(d[0])


def hybrid_ddf_qmf(ctx: CsirContext) -> HdPolicy:
    """Outage-minimizing DDF/QMF switch for a half-duplex relay with CSIR.

    Schedules below ``f_DDF`` run QMF; at ``f_DDF`` the relay has decoded
    and forwards the message. Longer listening only delays forwarding, so
    ``f_DDF`` is the single DDF candidate.
    """
    if ctx.R <= 0.0:
        raise ValueError("hybrid_ddf_qmf needs R > 0")
    policy = hybrid_policy_table(np.array([ctx.h2]), ctx.R, ctx.lambda1, ctx.lambda2)
    mode, f, d, p = (x[0] for x in policy)
    return HdPolicy(HdMode(mode), float(f), float(d), float(p))


def hybrid_policy_table(h2, R: float, lam1: float, lam2: float, nf: int = 64, nd: int = 96,
                        iters: int = GOLDEN_ITERS):
    """Vectorized hybrid policy: ``(mode, f, delta, outage)`` arrays over ``h2``."""
    h2 = np.asarray(h2, dtype=float)
    fd = f_ddf(h2, R)
    fd = np.atleast_1d(fd)
    admissible = fd <= 1.0
    f_q, d_q, s_q = csir_search(h2, R, lam1, lam2, f_max=np.where(admissible, fd, 1.0),
                                nf=nf, nd=nd, iters=iters)
    s_ddf = np.where(admissible, kernels.hd_csir_success(
        np.inf, 0.0, np.where(admissible, fd, 0.5), R, lam1, lam2), -1.0)
    s_dir = math.exp(-lam2 * (2.0 ** R - 1.0))
    use_ddf = s_ddf > s_q
    best = np.maximum(s_ddf, s_q)
    mode = np.where(use_ddf, HdMode.DDF.value, HdMode.QMF.value).astype(object)
    direct = s_dir > best
    mode[direct] = HdMode.DIRECT.value
    f = np.where(direct, 0.0, np.where(use_ddf, fd, f_q))
    d = np.where(direct | use_ddf, np.inf, d_q)
    return mode, f, d, 1.0 - np.maximum(best, s_dir)

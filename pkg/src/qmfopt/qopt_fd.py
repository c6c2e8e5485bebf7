"""Outage-optimal quantizer distortion for the full-duplex single relay.

Three levels of relay knowledge are covered: global CSI (all link gains),
local CSI (incoming and outgoing gains) and CSIR (incoming gain only, plus
the fading statistics of the other two links).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .channel import ChannelSingle
from .errors import RelayLinkAbsent
from .numerics import Region2D, cubic_positive_root, cubic_positive_root_vec, find_root

# symmetric-fade formula is used below this relative difference of lambdas
LAMBDA_TIE = 1e-6
CSIR_GRID = (1e-6, 1e8, 400)


def opt_global(ch: ChannelSingle) -> float:
    """Distortion equalizing both QMF branches, ``(1 + h^2 + g2^2) / g1^2``."""
    if ch.g1_2 <= 0.0:
        raise RelayLinkAbsent("g1^2 = 0: bypass the relay")
    return (1.0 + ch.h2 + ch.g2_2) / ch.g1_2


def opt_global_vec(h2, g1_2, g2_2):
    """Array form of :func:`opt_global`; ``inf`` where the relay link is absent."""
    with np.errstate(divide="ignore"):
        return np.where(g1_2 > 0.0, (1.0 + h2 + g2_2) / g1_2, np.inf)


def local_betas(h2, g1_2, R, delta):
    """Thresholds on ``g2^2`` imposed by the two QMF branches at rate ``R``."""
    two_r = 2.0 ** R
    delta = np.asarray(delta, dtype=float)
    beta1 = two_r - h2 / (1.0 + delta) - 1.0
    with np.errstate(divide="ignore"):
        beta2 = two_r * (1.0 + 1.0 / delta) - g1_2 - 1.0
    return beta1, beta2


def opt_local(h2: float, g1_2: float, R: float) -> float:
    """Positive root of ``g1^2 D^2 + (g1^2 - h^2 - 2^R) D - 2^R = 0``."""
    if g1_2 <= 0.0:
        raise RelayLinkAbsent("g1^2 = 0: bypass the relay")
    return float(opt_local_vec(h2, g1_2, R))


def opt_local_vec(h2, g1_2, R):
    two_r = 2.0 ** np.asarray(R, dtype=float)
    b = g1_2 - h2 - two_r
    disc = np.sqrt(b * b + 4.0 * g1_2 * two_r)
    with np.errstate(divide="ignore", invalid="ignore"):
        # the two forms avoid cancellation for either sign of b
        root = np.where(b <= 0.0, (disc - b) / (2.0 * g1_2), 2.0 * two_r / (disc + b))
    return np.where(g1_2 > 0.0, root, np.inf)


def conditional_outage_local(h2, g1_2, R, delta, lambda2):
    """Outage given ``(h, g1)`` when only ``g2^2 ~ Exp(lambda2)`` is random."""
    beta1, beta2 = local_betas(h2, g1_2, R, delta)
    thr = np.maximum(np.maximum(beta1, 0.0), np.maximum(beta2, 0.0))
    out = -np.expm1(-lambda2 * thr)
    return float(out) if np.ndim(out) == 0 else out


@dataclass(frozen=True)
class CsirContext:
    """What a CSIR relay knows: its incoming gain, the rate and the link statistics."""

    h2: float
    R: float
    lambda1: float
    lambda2: float

    def __post_init__(self):
        if self.R < 0.0:
            raise ValueError("R must be non-negative")
        if self.h2 < 0.0:
            raise ValueError("h2 must be non-negative")
        if not (self.lambda1 > 0.0 and self.lambda2 > 0.0):
            raise ValueError("lambdas must be positive")

    @property
    def symmetric(self) -> bool:
        return abs(self.lambda1 - self.lambda2) / max(self.lambda1, self.lambda2) < LAMBDA_TIE

    @property
    def delta_t(self) -> float:
        """Distortion above which the ``g2^2`` threshold is active (may be <= 0)."""
        if self.R == 0.0:
            return math.inf
        return self.h2 / (2.0 ** self.R - 1.0) - 1.0

    def alphas(self, delta):
        """``(alpha1, alpha2)``: thresholds on ``g2^2`` and on ``g1^2 + g2^2``."""
        delta = np.asarray(delta, dtype=float)
        two_r = 2.0 ** self.R
        alpha1 = two_r - self.h2 / (1.0 + delta) - 1.0
        with np.errstate(divide="ignore"):
            alpha2 = two_r * (1.0 + 1.0 / delta) - 1.0
        return alpha1, alpha2


def _q_from_alphas(a1p, alpha2, lam1, lam2):
    if abs(lam1 - lam2) / max(lam1, lam2) < LAMBDA_TIE:
        lam = lam1
        return np.exp(-lam * alpha2) * (1.0 + lam * alpha2 - lam * a1p)
    d = lam2 - lam1
    return (lam2 / d) * np.exp(-(lam1 * alpha2 + d * a1p)) - (lam1 / d) * np.exp(-lam2 * alpha2)


def csir_Q(ctx: CsirContext, delta):
    """Success probability of CSIR-QMF at distortion ``delta`` given ``h``."""
    alpha1, alpha2 = ctx.alphas(delta)
    q = _q_from_alphas(np.maximum(alpha1, 0.0), alpha2, ctx.lambda1, ctx.lambda2)
    q = np.clip(q, 0.0, 1.0)
    return float(q) if np.ndim(q) == 0 else q


def csir_Q_prime(ctx: CsirContext, delta):
    """Analytic derivative of :func:`csir_Q` in ``delta`` (one-sided at the ``alpha1 = 0`` kink)."""
    delta = np.asarray(delta, dtype=float)
    alpha1, alpha2 = ctx.alphas(delta)
    a1p = np.maximum(alpha1, 0.0)
    d_a1p = np.where(alpha1 > 0.0, ctx.h2 / (1.0 + delta) ** 2, 0.0)
    d_a2 = -(2.0 ** ctx.R) / delta ** 2
    lam1, lam2 = ctx.lambda1, ctx.lambda2
    if ctx.symmetric:
        lam = lam1
        out = lam * np.exp(-lam * alpha2) * (lam * (a1p - alpha2) * d_a2 - d_a1p)
    else:
        d = lam2 - lam1
        out = (lam2 * np.exp(-(lam1 * alpha2 + d * a1p)) * (-d * d_a1p - lam1 * d_a2)
               + lam1 * lam2 * d_a2 * np.exp(-lam2 * alpha2)) / d
    return float(out) if np.ndim(out) == 0 else out


def csir_region(ctx: CsirContext, delta: float) -> Region2D:
    """Success region in the ``(g1^2, g2^2)`` plane for :func:`numerics.exp_measure`."""
    alpha1, alpha2 = (float(a) for a in ctx.alphas(delta))
    return Region2D.curve(max(alpha1, 0.0), lambda v: alpha2 - v, alpha2)


def csir_cubic(ctx: CsirContext) -> tuple[float, float, float, float]:
    """Coefficients of the stationarity cubic for equal fade statistics."""
    two_r = 2.0 ** ctx.R
    return (ctx.h2 / ctx.lambda1, -two_r * (two_r + ctx.h2),
            -two_r * (2.0 * two_r + ctx.h2), -two_r * two_r)


def opt_csir(ctx: CsirContext) -> float:
    """Distortion maximizing :func:`csir_Q`.

    Equal fade statistics use the unique positive root of the stationarity
    cubic, then ``max`` with the kink ``delta_t``. Unequal statistics have
    no proven unique stationary point, so the maximizer is found by a
    log-grid scan over the clipped objective, golden-section refinement and
    a root polish on the derivative when the maximum is interior.

    Returns ``inf`` when the relay cannot improve on ignoring it (``h = 0``).
    """
    if ctx.R <= 0.0:
        raise ValueError("opt_csir needs R > 0")
    if ctx.h2 == 0.0:
        return math.inf
    if ctx.symmetric:
        dagger = cubic_positive_root(*csir_cubic(ctx))
        return max(dagger, ctx.delta_t)
    return _opt_csir_scan(ctx)


def _opt_csir_scan(ctx: CsirContext) -> float:
    lo, hi, n = CSIR_GRID
    best = float(kernels.fd_csir_delta_asym(np.array([ctx.h2]), ctx.R, ctx.lambda1,
                                            ctx.lambda2, lo, hi, n)[0])
    if not math.isfinite(best) or best <= ctx.delta_t * (1.0 + 1e-9):
        return best
    # polish the interior stationary point on the analytic derivative
    a, b = best * (1.0 - 1e-3), best * (1.0 + 1e-3)
    if a <= ctx.delta_t:
        return best
    qa, qb = csir_Q_prime(ctx, a), csir_Q_prime(ctx, b)
    if qa > 0.0 > qb:
        root = find_root(lambda x: csir_Q_prime(ctx, x), a, b, tol=1e-14 * best)
        if csir_Q(ctx, root) >= csir_Q(ctx, best):
            return root
    return best


def opt_csir_vec(h2, R: float, lambda1: float, lambda2: float):
    """:func:`opt_csir` for an array of incoming gains at a common rate."""
    h2 = np.asarray(h2, dtype=float)
    if R <= 0.0:
        raise ValueError("opt_csir needs R > 0")
    two_r = 2.0 ** R
    delta_t = h2 / (two_r - 1.0) - 1.0
    if abs(lambda1 - lambda2) / max(lambda1, lambda2) < LAMBDA_TIE:
        pos = h2 > 0.0
        hs = np.where(pos, h2, 1.0)
        dagger = cubic_positive_root_vec(hs / lambda1, -two_r * (two_r + hs),
                                         -two_r * (2.0 * two_r + hs), -two_r * two_r + 0.0 * hs)
        return np.where(pos, np.maximum(dagger, delta_t), np.inf)
    lo, hi, n = CSIR_GRID
    return kernels.fd_csir_delta_asym(h2, R, lambda1, lambda2, lo, hi, n)

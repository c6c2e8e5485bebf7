"""Root finding, 1-D search and exponential-measure integration.

Every optimizer in the package reduces to one of three primitives: locate a
sign change, maximize a scalar profile, or integrate a pair of independent
exponential variables over an upper-right region of the first quadrant.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy import integrate

from .errors import NoSignChange, SignPatternViolation

INV_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


# --------------------------------------------------------------------------
# Root finding
# --------------------------------------------------------------------------

def _bracketed_root(g: Callable[[float], float], a: float, b: float, tol: float,
                    max_iter: int) -> float:
    fa, fb = g(a), g(b)
    if fa == 0.0:
        return a
    if fb == 0.0:
        return b
    if math.copysign(1.0, fa) == math.copysign(1.0, fb):
        raise NoSignChange(f"f({a!r})={fa!r} and f({b!r})={fb!r} share a sign")

    def shrink(x, fx):
        nonlocal a, fa, b, fb
        if math.copysign(1.0, fx) == math.copysign(1.0, fa):
            a, fa = x, fx
        else:
            b, fb = x, fx

    for _ in range(max_iter):
        width = abs(b - a)
        if width <= tol:
            break
        x = 0.5 * (a + b)
        if math.isfinite(fa) and math.isfinite(fb) and fb != fa:
            s = b - fb * (b - a) / (fb - fa)
            if min(a, b) < s < max(a, b):
                x = s
        fx = g(x)
        if fx == 0.0:
            return x
        shrink(x, fx)
        # a secant step that failed to halve the bracket is followed by bisection
        if abs(b - a) > 0.5 * width:
            m = 0.5 * (a + b)
            fm = g(m)
            if fm == 0.0:
                return m
            shrink(m, fm)
    return 0.5 * (a + b)


def find_root(f: Callable[[float], float], lo: float, hi: float, tol: float = 1e-10,
              max_iter: int = 400) -> float:
    """Locate a root of ``f`` inside ``[lo, hi]``.

    Bisection with a safeguarded secant (Illinois) step. When the bracket is
    strictly positive and spans more than three decades the search runs on
    ``log(x)`` and ``tol`` applies to the log-argument, i.e. it becomes a
    relative tolerance on ``x``.

    Raises
    ------
    NoSignChange
        If ``f(lo)`` and ``f(hi)`` have the same sign.
    """
    if not lo < hi:
        raise ValueError(f"empty bracket [{lo}, {hi}]")
    if lo > 0.0 and hi / lo > 1e3:
        t = _bracketed_root(lambda s: f(math.exp(s)), math.log(lo), math.log(hi), tol,
                            max_iter)
        return math.exp(t)
    return _bracketed_root(f, lo, hi, tol, max_iter)


def bisect_vec(func: Callable[[np.ndarray], np.ndarray], lo, hi, iters: int = 100):
    """Elementwise bisection for many independent brackets at once.

    ``func`` must be vectorized; each bracket is assumed to contain a sign
    change. The sign at ``lo`` decides which half is kept.
    """
    lo = np.array(lo, dtype=float, copy=True)
    hi = np.array(hi, dtype=float, copy=True)
    lo, hi = np.broadcast_arrays(lo, hi)
    lo, hi = lo.copy(), hi.copy()
    s_lo = np.sign(func(lo))
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        same = np.sign(func(mid)) == s_lo
        lo = np.where(same, mid, lo)
        hi = np.where(same, hi, mid)
    return 0.5 * (lo + hi)


def _sign_changes(coeffs: Sequence[float]) -> int:
    signs = [math.copysign(1.0, c) for c in coeffs if c != 0.0]
    return sum(1 for a, b in zip(signs, signs[1:]) if a != b)


def _depressed_cubic_roots(c3: float, c2: float, c1: float, c0: float) -> list[float]:
    b, c, d = c2 / c3, c1 / c3, c0 / c3
    shift = b / 3.0
    p = c - b * b / 3.0
    q = 2.0 * b ** 3 / 27.0 - b * c / 3.0 + d
    disc = (q / 2.0) ** 2 + (p / 3.0) ** 3
    if disc > 0.0:
        s = math.sqrt(disc)
        t = np.cbrt(-q / 2.0 + s) + np.cbrt(-q / 2.0 - s)
        return [float(t) - shift]
    if p == 0.0:
        return [-shift]
    m = 2.0 * math.sqrt(-p / 3.0)
    arg = 3.0 * q / (p * m)
    theta = math.acos(max(-1.0, min(1.0, arg))) / 3.0
    return [m * math.cos(theta - 2.0 * math.pi * k / 3.0) - shift for k in range(3)]


def cubic_positive_root(c3: float, c2: float, c1: float, c0: float) -> float:
    """Unique positive root of ``c3 x^3 + c2 x^2 + c1 x + c0``.

    Requires exactly one sign change in the coefficient sequence, which by
    Descartes' rule guarantees a single positive root. The closed-form
    (depressed cubic) value is accepted only if it brackets a sign change of
    the polynomial at relative width 1e-9; otherwise the root is recomputed
    by :func:`find_root` over the Cauchy bound.
    """
    if c3 == 0.0:
        raise SignPatternViolation("leading coefficient is zero")
    coeffs = (c3, c2, c1, c0)
    if _sign_changes(coeffs) != 1:
        raise SignPatternViolation(f"coefficients {coeffs} need exactly one sign change")
    if c0 == 0.0:
        # x = 0 is a root; the positive one solves the remaining quadratic
        disc = c2 * c2 - 4.0 * c3 * c1
        return (-c2 + math.copysign(math.sqrt(disc), c3)) / (2.0 * c3) if c1 != 0.0 \
            else -c2 / c3

    def poly(x: float) -> float:
        return ((c3 * x + c2) * x + c1) * x + c0

    cands = [r for r in _depressed_cubic_roots(c3, c2, c1, c0) if r > 0.0]
    bound = 1.0 + max(abs(c2 / c3), abs(c1 / c3), abs(c0 / c3))
    if cands:
        x = max(cands)
        for _ in range(3):
            dp = (3.0 * c3 * x + 2.0 * c2) * x + c1
            if dp == 0.0:
                break
            step = poly(x) / dp
            if not math.isfinite(step):
                break
            x -= step
        lo, hi = x * (1.0 - 1e-9), x * (1.0 + 1e-9)
        plo, phi = poly(lo), poly(hi)
        if plo == 0.0 or phi == 0.0 or (plo < 0.0) != (phi < 0.0):
            return x
    return find_root(poly, 0.0, bound, tol=1e-14 * bound)


def cubic_positive_root_vec(c3, c2, c1, c0) -> np.ndarray:
    """Vectorized closed-form positive root for cubics with the sign pattern
    ``(+, -, -, -)``.

    Used on the hot path where the pattern is guaranteed by construction.
    Two Newton steps polish the closed-form value.
    """
    c3, c2, c1, c0 = np.broadcast_arrays(*(np.asarray(c, dtype=float) for c in (c3, c2, c1, c0)))
    b, c, d = c2 / c3, c1 / c3, c0 / c3
    shift = b / 3.0
    p = c - b * b / 3.0
    q = 2.0 * b ** 3 / 27.0 - b * c / 3.0 + d
    disc = (q / 2.0) ** 2 + (p / 3.0) ** 3
    with np.errstate(invalid="ignore", divide="ignore"):
        s = np.sqrt(np.maximum(disc, 0.0))
        t_one = np.cbrt(-q / 2.0 + s) + np.cbrt(-q / 2.0 - s)
        m = 2.0 * np.sqrt(np.maximum(-p / 3.0, 0.0))
        arg = np.clip(3.0 * q / (p * m), -1.0, 1.0)
        t_three = m * np.cos(np.arccos(arg) / 3.0)  # largest of the three real roots
    x = np.where(disc > 0.0, t_one, t_three) - shift
    for _ in range(2):
        val = ((c3 * x + c2) * x + c1) * x + c0
        dp = (3.0 * c3 * x + 2.0 * c2) * x + c1
        x = x - val / dp
    return x


# --------------------------------------------------------------------------
# 1-D search
# --------------------------------------------------------------------------

def golden_max(f: Callable[[float], float], a: float, b: float, tol: float,
               max_iter: int = 200) -> tuple[float, float]:
    """Golden-section maximization of ``f`` on ``[a, b]``."""
    c = b - INV_GOLDEN * (b - a)
    d = a + INV_GOLDEN * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(max_iter):
        if b - a <= tol:
            break
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - INV_GOLDEN * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + INV_GOLDEN * (b - a)
            fd = f(d)
    return (c, fc) if fc >= fd else (d, fd)


def grid_refine_max(f: Callable, lo: float, hi: float, coarse_points: int = 1024,
                    vectorized: bool = False, tol: float | None = None) -> tuple[float, float]:
    """Maximize a scalar function by a uniform scan plus golden-section polish.

    The refinement runs on the two cells adjacent to the best coarse point,
    so the result is never worse than the coarse maximum.

    Parameters
    ----------
    f : callable
        Objective. With ``vectorized=True`` it is called once on the whole
        coarse grid.
    lo, hi : float
        Search interval.
    coarse_points : int
        Number of uniform scan points, at least 16.
    tol : float, optional
        Final interval width; defaults to ``1e-12 * (hi - lo)``.

    Returns
    -------
    (argmax, max)
    """
    if not lo < hi:
        raise ValueError("grid_refine_max needs lo < hi")
    if coarse_points < 16:
        raise ValueError("coarse_points must be at least 16")
    xs = np.linspace(lo, hi, coarse_points)
    if vectorized:
        ys = np.asarray(f(xs), dtype=float)
    else:
        ys = np.array([f(float(x)) for x in xs], dtype=float)
    ys = np.where(np.isnan(ys), -np.inf, ys)
    k = int(np.argmax(ys))
    a = xs[max(k - 1, 0)]
    b = xs[min(k + 1, coarse_points - 1)]
    if tol is None:
        tol = 1e-12 * (hi - lo)
    if vectorized:
        def scalar(x):
            return float(np.asarray(f(np.array([x])), dtype=float)[0])
    else:
        scalar = f
    x_ref, y_ref = golden_max(scalar, float(a), float(b), tol)
    if y_ref >= ys[k]:
        return float(x_ref), float(y_ref)
    return float(xs[k]), float(ys[k])


# --------------------------------------------------------------------------
# Exponential measure of upper-right regions
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class Segment:
    """Slice ``v_lo <= v < v_hi`` of a region with threshold ``u >= level(v)``."""

    v_lo: float
    v_hi: float
    level: float | Callable[[float], float]

    @property
    def flat(self) -> bool:
        return not callable(self.level)


@dataclass(frozen=True)
class Region2D:
    """Upper-right subset of the quadrant ``u, v >= 0``.

    Stored as consecutive v-slices; in each slice the region is
    ``{u >= level(v)}``, where ``level`` is a constant (a rectangle column)
    or a non-increasing curve. Points with ``v`` below the first slice are
    excluded.
    """

    segments: tuple[Segment, ...] = field(default_factory=tuple)

    @classmethod
    def quadrant(cls, u0: float = 0.0, v0: float = 0.0) -> "Region2D":
        return cls((Segment(max(v0, 0.0), math.inf, max(u0, 0.0)),))

    @classmethod
    def staircase(cls, corners: Sequence[tuple[float, float]]) -> "Region2D":
        """Union of quadrants ``{u >= u_i, v >= v_i}`` over the given corners."""
        pts = sorted((max(v, 0.0), max(u, 0.0)) for u, v in corners)
        segs: list[Segment] = []
        best = math.inf
        for idx, (v, u) in enumerate(pts):
            best = min(best, u)
            v_next = pts[idx + 1][0] if idx + 1 < len(pts) else math.inf
            if v_next > v:
                segs.append(Segment(v, v_next, best))
        return cls(tuple(segs))

    @classmethod
    def curve(cls, v_min: float, boundary: Callable[[float], float],
              v_zero: float) -> "Region2D":
        """``{v >= v_min, u >= boundary(v)}`` where ``boundary`` reaches 0 at ``v_zero``."""
        v_min = max(v_min, 0.0)
        if v_zero <= v_min:
            return cls((Segment(v_min, math.inf, 0.0),))
        return cls((Segment(v_min, v_zero, boundary), Segment(v_zero, math.inf, 0.0)))

    def threshold(self, v):
        """Vectorized u-threshold at ``v`` (``inf`` outside the region)."""
        v = np.asarray(v, dtype=float)
        out = np.full(v.shape, np.inf)
        for s in self.segments:
            m = (v >= s.v_lo) & (v < s.v_hi)
            if not np.any(m):
                continue
            if s.flat:
                out[m] = s.level
            else:
                out[m] = np.array([s.level(x) for x in v[m]])
        return np.maximum(out, 0.0)

    def contains(self, u, v):
        return np.asarray(u) >= self.threshold(v)


def _exp_interval(rate: float, a: float, b: float) -> float:
    """P{a <= V < b} for V ~ Exp(rate)."""
    ea = math.exp(-rate * a)
    eb = 0.0 if math.isinf(b) else math.exp(-rate * b)
    return ea - eb


def exp_measure(region: Region2D, rate_u: float, rate_v: float,
                epsrel: float = 1e-10) -> float:
    """Probability that ``(U, V)`` lands in ``region``.

    ``U ~ Exp(rate_u)`` and ``V ~ Exp(rate_v)`` are independent. Flat
    slices contribute closed-form rectangle masses; curved slices integrate
    the conditional tail ``exp(-rate_u * level(v))`` against the density
    of ``V`` with adaptive quadrature.
    """
    total = 0.0
    for s in region.segments:
        if s.v_hi <= s.v_lo:
            continue
        if s.flat:
            total += math.exp(-rate_u * max(s.level, 0.0)) * _exp_interval(rate_v, s.v_lo, s.v_hi)
            continue
        level = s.level
        # the density is negligible past this point at double precision
        hi = min(s.v_hi, s.v_lo + 745.0 / rate_v)

        def integrand(v, level=level):
            return rate_v * math.exp(-rate_v * v - rate_u * max(level(v), 0.0))

        val, _ = integrate.quad(integrand, s.v_lo, hi, epsabs=0.0, epsrel=epsrel, limit=400)
        total += val
    return min(max(total, 0.0), 1.0)

"""Rates, bounds and quantizer choices for the N-relay diamond network.

Relays are indexed ``0..N-1``. A relay set ``omega`` names the relays on the
destination side of a cut: their outgoing links cross it, while the
incoming links of the other relays cross it from the source side.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from . import kernels
from .channel import ChannelDiamond
from .errors import DegenerateGain, TooManyRelays
from .numerics import bisect_vec, find_root
from .rates_single import log2p, quant_penalty

MAX_RELAYS = 20


@dataclass(frozen=True)
class RelayPartition:
    """A subset ``omega`` of the relays ``0..n-1``."""

    omega: frozenset
    n: int

    def __post_init__(self):
        object.__setattr__(self, "omega", frozenset(int(i) for i in self.omega))
        if any(i < 0 or i >= self.n for i in self.omega):
            raise ValueError("relay index out of range")

    @property
    def complement(self) -> frozenset:
        return frozenset(range(self.n)) - self.omega

    @property
    def mask(self) -> int:
        return sum(1 << i for i in self.omega)

    @classmethod
    def all(cls, n: int):
        """Every subset of ``n`` relays, smallest first."""
        for k in range(n + 1):
            for combo in combinations(range(n), k):
                yield cls(frozenset(combo), n)


def _guard(n: int):
    if n > MAX_RELAYS:
        raise TooManyRelays(f"{n} relays exceeds the enumeration limit of {MAX_RELAYS}")


def _deltas(dv, n: int) -> np.ndarray:
    d = np.broadcast_to(np.asarray(dv, dtype=float), (n,)).copy()
    if np.any(~(d > 0.0)):
        raise ValueError("distortions must be positive")
    return d


def _cut_terms(ch: ChannelDiamond, dv):
    d = _deltas(dv, ch.n)
    with np.errstate(divide="ignore", invalid="ignore"):
        hs = np.where(np.isinf(d), 0.0, ch.h2 / (1.0 + d))
    return hs, quant_penalty(d)


def qmf_rate(ch: ChannelDiamond, dv) -> float:
    """QMF rate: the minimum cut value over all ``2^N`` relay sets, clipped at zero."""
    _guard(ch.n)
    hs, pen = _cut_terms(ch, dv)
    v = kernels.diamond_cut_min(ch.g2[None, :], hs[None, :], pen[None, :], np.zeros(1, np.int64))
    return max(float(v[0]), 0.0)


def cut_value(ch: ChannelDiamond, dv, omega: RelayPartition) -> float:
    """Unclipped QMF value of a single cut."""
    hs, pen = _cut_terms(ch, dv)
    inside = np.zeros(ch.n, dtype=bool)
    inside[list(omega.omega)] = True
    return float(log2p(ch.g2[inside].sum()) + log2p(hs[~inside].sum()) - pen[inside].sum())


def hybrid_rate(ch: ChannelDiamond, omega_d: RelayPartition, dv) -> float:
    """Rate when the relays in ``omega_d`` decoded and the rest quantize.

    Decoded relays always sit on the destination side and pay no
    quantization penalty; the minimum runs over the placements of the
    quantizing relays.
    """
    _guard(ch.n)
    hs, pen = _cut_terms(ch, dv)
    fixed = np.array([omega_d.mask], dtype=np.int64)
    v = kernels.diamond_cut_min(ch.g2[None, :], hs[None, :], pen[None, :], fixed)
    return max(float(v[0]), 0.0)


def _masks(n: int) -> np.ndarray:
    m = np.arange(1 << n, dtype=np.int64)
    return ((m[:, None] >> np.arange(n)) & 1).astype(bool)


def cutset_batch(h2: np.ndarray, g2: np.ndarray) -> np.ndarray:
    """Cutset bound for a ``(T, N)`` batch."""
    h2 = np.atleast_2d(h2)
    g2 = np.atleast_2d(g2)
    _guard(h2.shape[1])
    bits = _masks(h2.shape[1]).astype(float)
    amp = np.sqrt(g2) @ bits.T
    hsum = h2 @ (1.0 - bits).T
    return (log2p(amp * amp) + log2p(hsum)).min(axis=1)


def cutset(ch: ChannelDiamond) -> float:
    """Cutset bound with magnitude-aligned relay amplitudes."""
    return float(cutset_batch(ch.h2[None, :], ch.g2[None, :])[0])


def df_rate_batch(h2: np.ndarray, g2: np.ndarray) -> np.ndarray:
    """Decode-forward rate for a ``(T, N)`` batch.

    For a fixed weakest decoding relay, adding every relay whose incoming
    link is at least as strong only helps, so the best set is a prefix of
    the relays sorted by incoming gain.
    """
    h2 = np.atleast_2d(h2)
    g2 = np.atleast_2d(g2)
    order = np.argsort(-h2, axis=1, kind="stable")
    hs = np.take_along_axis(h2, order, axis=1)
    gs = np.cumsum(np.take_along_axis(g2, order, axis=1), axis=1)
    return np.maximum(np.minimum(log2p(gs), log2p(hs)), 0.0).max(axis=1)


def df_rate(ch: ChannelDiamond) -> float:
    """Best decode-forward rate over sets of decoding relays (0 if none helps)."""
    return float(df_rate_batch(ch.h2[None, :], ch.g2[None, :])[0])


def qmf_rate_batch(h2, g2, deltas, fixed=None) -> np.ndarray:
    """QMF (or hybrid, with ``fixed`` decoded-relay masks) rates for a ``(T, N)`` batch."""
    h2 = np.atleast_2d(np.asarray(h2, dtype=float))
    g2 = np.atleast_2d(np.asarray(g2, dtype=float))
    _guard(h2.shape[1])
    d = np.broadcast_to(np.asarray(deltas, dtype=float), h2.shape)
    with np.errstate(divide="ignore", invalid="ignore"):
        hs = np.where(np.isinf(d), 0.0, h2 / (1.0 + d))
    pen = quant_penalty(d)
    if fixed is None:
        fixed = np.zeros(h2.shape[0], dtype=np.int64)
    return np.maximum(kernels.diamond_cut_min(g2, hs, pen, fixed), 0.0)


def decode_set(ch: ChannelDiamond, R: float) -> RelayPartition:
    """Relays whose incoming link supports rate ``R``."""
    ok = R < log2p(ch.h2)
    return RelayPartition(frozenset(np.flatnonzero(ok).tolist()), ch.n)


def decode_masks(h2: np.ndarray, R: float) -> np.ndarray:
    ok = R < log2p(np.atleast_2d(h2))
    return (ok.astype(np.int64) << np.arange(ok.shape[1])).sum(axis=1)


# --------------------------------------------------------------------------
# universal quantizer
# --------------------------------------------------------------------------

def universal_gap(n: int, delta: float) -> float:
    """Worst-case cutset gap of QMF with a common distortion ``delta`` on ``n`` relays."""
    if n < 1:
        raise ValueError("need at least one relay")
    pen = float(quant_penalty(delta))
    first = math.log2(n) + n * pen
    if n == 1:
        return first
    second = math.log2(n - 1) + (n - 1) * pen + math.log2(1.0 + delta)
    return max(first, second)


def universal_delta_opt(n: int) -> float:
    """Common distortion minimizing :func:`universal_gap`."""
    if n < 2:
        raise ValueError("the universal quantizer is defined for n >= 2")
    return 2.0 if n == 2 else float(n - 1)


def gap_star(n: int) -> float:
    """The minimized worst-case gap ``universal_gap(n, universal_delta_opt(n))``."""
    if n < 2:
        raise ValueError("the universal quantizer is defined for n >= 2")
    if n == 2:
        return 2.0 * math.log2(3.0) - 1.0
    return n * math.log2(n / (n - 1.0)) + 2.0 * math.log2(n - 1.0)


# --------------------------------------------------------------------------
# two relays
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class TwoRelayCase:
    """Constants of the two-relay optimum and the interval holding ``delta3``.

    ``interval`` is 1, 2 or 3 for ``(0, d1)``, ``[d1, d2)`` and ``[d2, inf)``;
    it is 3 by convention when ``A >= 0`` (``delta3`` is then ``nan``).
    """

    A: float
    B: float
    C: float
    delta1: float
    delta2: float
    delta3: float
    interval: int

    @property
    def case(self) -> int:
        """Which optimum branch applies (1: ``d2``, 2: ``d1``, 3: ``d3``)."""
        return {3: 1, 1: 2, 2: 3}[self.interval]


def _two_relay_constants(h1, h2, g1, g2):
    """Vectorized constants; arguments are squared gains."""
    A = h1 * (1.0 + h1) - h2 * (1.0 + h1 + g1 + g2)
    B = 2.0 * h1 * (1.0 + h1)
    C = h1 * (1.0 + h1 + h2)
    d1 = (((1.0 + g1 + g2) * (1.0 + h1 + h2) + (1.0 + g2) * h1 * h2)
          / (g2 * (1.0 + g1 + g2) * (1.0 + h1)))
    d2 = (1.0 + g1) * (1.0 + h2) / g2
    with np.errstate(invalid="ignore", divide="ignore"):
        d3 = np.where(A < 0.0, (-B - np.sqrt(B * B - 4.0 * A * C)) / (2.0 * A), np.nan)
    interval = np.where(A >= 0.0, 3, np.where(d3 < d1, 1, np.where(d3 < d2, 2, 3)))
    return A, B, C, d1, d2, d3, interval


def two_relay_case(ch: ChannelDiamond) -> TwoRelayCase:
    if ch.n != 2:
        raise ValueError("two_relay_case needs exactly two relays")
    if np.any(ch.h2 <= 0.0) or np.any(ch.g2 <= 0.0):
        raise DegenerateGain("all four link gains must be positive")
    vals = _two_relay_constants(ch.h2[0], ch.h2[1], ch.g2[0], ch.g2[1])
    return TwoRelayCase(*(float(v) for v in vals[:6]), int(vals[6]))


def delta1_given_delta2(h1, h2, g1, g2, d2):
    """Best ``delta1`` for a fixed ``delta2`` (piecewise over the three intervals)."""
    _, _, _, lo, hi, _, _ = _two_relay_constants(h1, h2, g1, g2)
    in1 = (1.0 + g2) * (1.0 + h1) / g1
    in2 = ((1.0 + h1) * d2 + (1.0 + h1 + h2)) / ((g1 + g2) * d2 - (1.0 + h2))
    in3 = ((1.0 + h1) * d2 + (1.0 + h1 + h2)) / (g1 * (d2 + (1.0 + h2)))
    with np.errstate(invalid="ignore", divide="ignore"):
        return np.where(d2 < lo, in1, np.where(d2 < hi, in2, in3))


def two_relay_opt_batch(h2: np.ndarray, g2: np.ndarray):
    """Vectorized two-relay optimum over a ``(T, 2)`` batch: ``(delta1, delta2, rate)``."""
    h2 = np.atleast_2d(np.asarray(h2, dtype=float))
    g2 = np.atleast_2d(np.asarray(g2, dtype=float))
    h1, hh2, g1, gg2 = h2[:, 0], h2[:, 1], g2[:, 0], g2[:, 1]
    _, _, _, d1, d2, d3, interval = _two_relay_constants(h1, hh2, g1, gg2)
    dd2 = np.where(interval == 3, d2, np.where(interval == 1, d1, d3))
    # the interval-2 expression is used on [d1, d2]; it matches the
    # neighbouring expressions at both ends
    dd1 = ((1.0 + h1) * dd2 + (1.0 + h1 + hh2)) / ((g1 + gg2) * dd2 - (1.0 + hh2))
    rate = qmf_rate_batch(h2, g2, np.stack([dd1, dd2], axis=1))
    return dd1, dd2, rate


def two_relay_opt(ch: ChannelDiamond):
    """Globally optimal distortions ``(delta1, delta2, rate)`` for two relays."""
    two_relay_case(ch)  # validates
    d1, d2, rate = two_relay_opt_batch(ch.h2[None, :], ch.g2[None, :])
    return float(d1[0]), float(d2[0]), float(rate[0])


# --------------------------------------------------------------------------
# symmetric N relays
# --------------------------------------------------------------------------

def symmetric_rates(n: int, h2: float, g2: float, delta):
    """``R_k(delta)`` for ``k = 0..n`` (rows) when every relay sees ``(h2, g2)``."""
    k = np.arange(n + 1)[:, None]
    d = np.atleast_1d(np.asarray(delta, dtype=float))[None, :]
    return (log2p((n - k) * h2 / (1.0 + d)) + log2p(k * g2) - k * quant_penalty(d))


def _rk_diff(n, h2, g2, i, j):
    def diff(d):
        return float(symmetric_rates(n, h2, g2, d)[i, 0] - symmetric_rates(n, h2, g2, d)[j, 0])
    return diff


def _bracket_crossing(fun):
    """First sign change of ``fun`` on a log grid spanning ``[1e-15, 1e15]``."""
    xs = np.logspace(-15, 15, 121)
    vals = np.array([fun(x) for x in xs])
    idx = np.flatnonzero(np.sign(vals[1:]) != np.sign(vals[:-1]))
    if idx.size == 0:
        raise ValueError("no crossing in [1e-15, 1e15]")
    k = int(idx[0])
    return float(xs[k]), float(xs[k + 1])


def crossing(n: int, h2: float, g2: float, i: int, j: int) -> float:
    """The positive ``delta`` where ``R_i = R_j``."""
    fun = _rk_diff(n, h2, g2, i, j)
    lo, hi = _bracket_crossing(fun)
    return find_root(fun, lo, hi, tol=1e-14)


def symmetric_opt(n: int, h2: float, g2: float):
    """Optimal common distortion and rate for a symmetric diamond, ``(delta, rate)``.

    The optimum sits where the all-source-side cut ``R_0`` meets the
    all-destination-side cut ``R_n``.
    """
    if n < 1:
        raise ValueError("need at least one relay")
    if not (h2 > 0.0 and g2 > 0.0):
        raise DegenerateGain("symmetric_opt needs positive gains")
    d = crossing(n, h2, g2, 0, n)
    rate = float(symmetric_rates(n, h2, g2, d)[0, 0])
    return d, max(rate, 0.0)


def symmetric_delta_batch(n: int, h2: np.ndarray, g2: np.ndarray, iters: int = 100):
    """Vectorized ``R_0 = R_n`` crossing for arrays of per-relay gains ``h2``, ``g2``."""
    h2 = np.asarray(h2, dtype=float)
    g2 = np.asarray(g2, dtype=float)

    def diff(logd):
        d = np.exp(logd)
        return log2p(n * h2 / (1.0 + d)) - log2p(n * g2) + n * quant_penalty(d)

    # diff is decreasing in delta; the bracket is wide enough for gains in [1e-8, 1e8]
    lo = np.full(h2.shape, math.log(1e-12))
    hi = np.full(h2.shape, math.log(1e14))
    return np.exp(bisect_vec(diff, lo, hi, iters=iters))


@dataclass
class LemmaReport:
    """Outcome of the three symmetric-network certifications."""

    n: int
    unique_crossings: bool = True
    small_delta_order: bool = True
    monotone_crossings: bool = True
    violations: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.unique_crossings and self.small_delta_order and self.monotone_crossings


def nrelay_lemma_checks(n: int, h2: float, g2: float, grid_points: int = 4000,
                        grid=(1e-9, 1e12)) -> LemmaReport:
    """Numerically certify the crossing structure of the ``R_k`` curves.

    (a) every pair ``R_i - R_j`` changes sign exactly once on a dense log
    grid; (b) ``R_i - R_{i+1}`` exceeds 20 bits at ``delta = 1e-9``;
    (c) consecutive crossings are non-decreasing in ``i``.
    """
    rep = LemmaReport(n)
    ds = np.exp(np.linspace(math.log(grid[0]), math.log(grid[1]), grid_points))
    rk = symmetric_rates(n, h2, g2, ds)
    for i in range(n + 1):
        for j in range(i + 1, n + 1):
            s = np.sign(rk[i] - rk[j])
            s = s[s != 0.0]
            changes = int(np.count_nonzero(s[1:] != s[:-1]))
            if changes != 1:
                rep.unique_crossings = False
                rep.violations.append(f"R_{i} - R_{j} changes sign {changes} times")
    tiny = symmetric_rates(n, h2, g2, 1e-9)[:, 0]
    for i in range(n):
        if not tiny[i] - tiny[i + 1] > 20.0:
            rep.small_delta_order = False
            rep.violations.append(f"R_{i} - R_{i + 1} = {tiny[i] - tiny[i + 1]:.3g} at 1e-9")
    prev = 0.0
    for i in range(n):
        c = crossing(n, h2, g2, i, i + 1)
        if c < prev * (1.0 - 1e-9):
            rep.monotone_crossings = False
            rep.violations.append(f"crossing {i},{i + 1} = {c:.6g} below previous {prev:.6g}")
        prev = max(prev, c)
    return rep


def lemma_violations_batch(n: int, h2, g2, grid_points: int = 1000,
                           grid=(1e-9, 1e12)) -> np.ndarray:
    """Vectorized form of :func:`nrelay_lemma_checks` over arrays of instances.

    Returns a ``(T, 3)`` boolean array flagging violations of (a), (b), (c).
    Crossings of consecutive curves are found by bisection, which is valid
    because ``R_i - R_{i+1}`` is strictly decreasing in ``delta``.
    """
    h2 = np.atleast_1d(np.asarray(h2, dtype=float))[:, None]
    g2 = np.atleast_1d(np.asarray(g2, dtype=float))[:, None]
    t = h2.shape[0]
    bad = np.zeros((t, 3), dtype=bool)
    ds = np.exp(np.linspace(math.log(grid[0]), math.log(grid[1]), grid_points))[None, :]
    pen = quant_penalty(ds)
    rk = [log2p((n - k) * h2 / (1.0 + ds)) + log2p(k * g2) - k * pen for k in range(n + 1)]
    for i, j in combinations(range(n + 1), 2):
        s = np.sign(rk[i] - rk[j])
        # zeros are skipped by carrying the previous sign forward
        idx = np.where(s != 0.0, np.arange(grid_points)[None, :], 0)
        np.maximum.accumulate(idx, axis=1, out=idx)
        s = np.take_along_axis(s, idx, axis=1)
        changes = np.count_nonzero((s[:, 1:] != s[:, :-1]) & (s[:, :-1] != 0.0), axis=1)
        bad[:, 0] |= changes != 1
    tiny = [log2p((n - k) * h2[:, 0] / (1.0 + 1e-9)) + log2p(k * g2[:, 0])
            - k * quant_penalty(1e-9) for k in range(n + 1)]
    for i in range(n):
        bad[:, 1] |= ~(tiny[i] - tiny[i + 1] > 20.0)
    prev = np.zeros(t)
    for i in range(n):
        def diff(logd, i=i):
            d = np.exp(logd)
            return (log2p((n - i) * h2[:, 0] / (1.0 + d)) - log2p((n - i - 1) * h2[:, 0] / (1.0 + d))
                    + log2p(i * g2[:, 0]) - log2p((i + 1) * g2[:, 0]) + quant_penalty(d))
        c = np.exp(bisect_vec(diff, np.full(t, math.log(1e-15)), np.full(t, math.log(1e15))))
        bad[:, 2] |= c < prev * (1.0 - 1e-9)
        prev = np.maximum(prev, c)
    return bad

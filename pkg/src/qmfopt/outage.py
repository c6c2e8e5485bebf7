"""Monte Carlo outage estimation over Rayleigh fading.

Trials are processed in fixed-size chunks. Each chunk draws its gains from
the counter-based stream in :mod:`qmfopt.channel`, evaluates every requested
scheme on the same realizations and returns integer outage counts, so the
totals do not depend on how chunks are spread over threads.

Half-duplex CSIR policies depend on the incoming gain only. They are
tabulated once per operating point on 512 logarithmic bins of ``h^2``
spanning ``[1e-6, 50]`` times its mean, and each trial uses its bin's entry.
"""

from __future__ import annotations

import enum
import math
import os
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import diamond, kernels
from .channel import ChannelDiamond, ChannelSingle, FadingParams, RateSpec, sample_batch
from .errors import InvalidCombination
from .qopt_fd import opt_csir_vec, opt_global_vec, opt_local_vec
from .qopt_hd import csir_search, f_ddf
from .rates_single import (fd_cutset, fd_df_rate, fd_qmf_rate, hd_cutset,
                           hd_cutset_best_schedule, hd_qmf_rate, log2p)

CHUNK = 8192
HD_GLOBAL_COARSE = 128
HD_BINS = 512
HD_BIN_SPAN = (1e-6, 50.0)
# coarse grid of the tabulated CSIR search (the one-off optimizer uses a finer one)
HD_TABLE_GRID = dict(nf=16, nd=24, iters=20)


class Network(enum.Enum):
    SINGLE_FD = "SINGLE_FD"
    SINGLE_HD = "SINGLE_HD"
    DIAMOND = "DIAMOND"


class Scheme(enum.Enum):
    QMF_NOISE_LEVEL = "QMF_NOISE_LEVEL"
    QMF_GLOBAL = "QMF_GLOBAL"
    QMF_LOCAL = "QMF_LOCAL"
    QMF_CSIR = "QMF_CSIR"
    DF = "DF"
    DDF = "DDF"
    HYBRID = "HYBRID"
    CUTSET = "CUTSET"
    DIRECT = "DIRECT"
    QMF_UNIVERSAL = "QMF_UNIVERSAL"
    QMF_TWO_RELAY_OPT = "QMF_TWO_RELAY_OPT"
    QMF_SYMMETRIC_OPT = "QMF_SYMMETRIC_OPT"


_VALID = {
    Network.SINGLE_FD: {Scheme.QMF_NOISE_LEVEL, Scheme.QMF_GLOBAL, Scheme.QMF_LOCAL,
                        Scheme.QMF_CSIR, Scheme.DF, Scheme.HYBRID, Scheme.CUTSET, Scheme.DIRECT},
    Network.SINGLE_HD: {Scheme.QMF_NOISE_LEVEL, Scheme.QMF_GLOBAL, Scheme.QMF_CSIR, Scheme.DDF,
                        Scheme.HYBRID, Scheme.CUTSET, Scheme.DIRECT},
    Network.DIAMOND: {Scheme.QMF_NOISE_LEVEL, Scheme.QMF_UNIVERSAL, Scheme.QMF_TWO_RELAY_OPT,
                      Scheme.QMF_SYMMETRIC_OPT, Scheme.DF, Scheme.HYBRID, Scheme.CUTSET},
}


@dataclass(frozen=True)
class SchemeSpec:
    """A relaying scheme together with its CSI policy on a given network."""

    network: Network
    scheme: Scheme
    n_relays: int = 1

    def __post_init__(self):
        object.__setattr__(self, "network", Network(self.network))
        object.__setattr__(self, "scheme", Scheme(self.scheme))
        if self.n_relays < 1:
            raise InvalidCombination("n_relays must be at least 1")
        if self.network is not Network.DIAMOND and self.n_relays != 1:
            raise InvalidCombination("single-relay networks have n_relays = 1")
        if self.scheme not in _VALID[self.network]:
            raise InvalidCombination(f"{self.scheme.value} is not defined for {self.network.value}")
        if self.scheme is Scheme.QMF_TWO_RELAY_OPT and self.n_relays != 2:
            raise InvalidCombination("QMF_TWO_RELAY_OPT needs exactly two relays")
        if self.scheme is Scheme.QMF_UNIVERSAL and self.n_relays < 2:
            raise InvalidCombination("QMF_UNIVERSAL needs at least two relays")

    @property
    def n_links(self) -> int:
        return 3 if self.network is not Network.DIAMOND else 2 * self.n_relays


@dataclass(frozen=True)
class OutageEstimate:
    """Outage fraction with its normal-approximation 95% half-width."""

    p_hat: float
    trials: int
    ci95_halfwidth: float

    @classmethod
    def from_count(cls, outages: int, trials: int) -> "OutageEstimate":
        p = outages / trials
        return cls(p, trials, 1.96 * math.sqrt(p * (1.0 - p) / trials))

    @property
    def std_error(self) -> float:
        return self.ci95_halfwidth / 1.96


# --------------------------------------------------------------------------
# tabulated half-duplex CSIR policies
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class HdTable:
    """Per-bin half-duplex CSIR policy; ``use_ddf`` only matters for the hybrid."""

    log_lo: float
    log_step: float
    f: np.ndarray
    delta: np.ndarray
    use_ddf: np.ndarray

    def lookup(self, h2: np.ndarray) -> np.ndarray:
        with np.errstate(divide="ignore"):
            k = np.floor((np.log(h2) - self.log_lo) / self.log_step)
        return np.clip(np.nan_to_num(k, neginf=0.0), 0, self.f.size - 1).astype(np.intp)


_table_cache: dict = {}
_table_lock = threading.Lock()


def _build_hd_table(centers, R, lam1, lam2, hybrid, grid):
    if hybrid:
        fd = np.atleast_1d(f_ddf(centers, R))
        admissible = fd <= 1.0
        f, d, s_q = csir_search(centers, R, lam1, lam2, f_max=np.where(admissible, fd, 1.0),
                                **grid)
        s_ddf = np.where(admissible, kernels.hd_csir_success(
            np.inf, 0.0, np.where(admissible, fd, 0.5), R, lam1, lam2), -1.0)
        use_ddf = s_ddf > s_q
    else:
        f, d, _ = csir_search(centers, R, lam1, lam2, **grid)
        use_ddf = np.zeros(centers.size, dtype=bool)
    return f, d, use_ddf


def hd_table(R: float, params: FadingParams, hybrid: bool) -> HdTable:
    """Policy table for one operating point, memoized on its parameters."""
    rho, lam1, lam2 = params.inv_snr
    key = (float(R), params.inv_snr, bool(hybrid))
    with _table_lock:
        hit = _table_cache.get(key)
        if hit is not None:
            return hit
        mean = 1.0 / rho
        log_lo = math.log(mean * HD_BIN_SPAN[0])
        log_step = (math.log(mean * HD_BIN_SPAN[1]) - log_lo) / HD_BINS
        centers = np.exp(log_lo + (np.arange(HD_BINS) + 0.5) * log_step)
        f, d, use_ddf = _build_hd_table(centers, R, lam1, lam2, hybrid, HD_TABLE_GRID)
        table = HdTable(log_lo, log_step, f, d, use_ddf)
        if len(_table_cache) > 256:
            _table_cache.clear()
        _table_cache[key] = table
        return table


def _exact_hd_policy(h2, R, params, hybrid):
    _, lam1, lam2 = params.inv_snr
    grid = dict(nf=64, nd=96)
    return _build_hd_table(np.asarray(h2, dtype=float), R, lam1, lam2, hybrid, grid)


# --------------------------------------------------------------------------
# per-trial supportable rates
# --------------------------------------------------------------------------

def _ddf_rate(h, g1, g2, R):
    """Rate of DDF when the relay listens exactly until it decodes."""
    f = np.atleast_1d(f_ddf(h, R))
    direct = log2p(g2)
    ok = f <= 1.0
    fs = np.where(ok, f, 1.0)
    forward = (1.0 - fs) * log2p(g1 + g2) + fs * direct
    # listening for f_DDF supports exactly R
    return np.where(ok, np.maximum(direct, np.minimum(R, forward)), direct)


def _single_rates(scheme, h, g1, g2, R, params, exact):
    ch = ChannelSingle(h, g1, g2)
    rho, lam1, lam2 = params.inv_snr if params is not None else (None, None, None)
    net, sch = scheme
    if sch is Scheme.DIRECT:
        return log2p(g2)
    if net is Network.SINGLE_FD:
        if sch is Scheme.QMF_NOISE_LEVEL:
            return fd_qmf_rate(ch, 1.0)
        if sch is Scheme.QMF_GLOBAL:
            return fd_qmf_rate(ch, opt_global_vec(h, g1, g2))
        if sch is Scheme.QMF_LOCAL:
            return fd_qmf_rate(ch, opt_local_vec(h, g1, R))
        if sch is Scheme.DF:
            return fd_df_rate(ch)
        if sch is Scheme.CUTSET:
            return fd_cutset(ch)
        if sch in (Scheme.QMF_CSIR, Scheme.HYBRID):
            _need(params, sch)
            delta = opt_csir_vec(h, R, lam1, lam2) if R > 0.0 else np.ones_like(h)
            qmf = fd_qmf_rate(ch, delta)
            if sch is Scheme.QMF_CSIR:
                return qmf
            # once decoded the relay forwards; report the better of the two achievable rates
            df = np.minimum(log2p(h), log2p(g1 + g2))
            return np.where(log2p(h) > R, np.maximum(qmf, df), qmf)
    else:
        if sch is Scheme.QMF_NOISE_LEVEL:
            return hd_qmf_rate(ch, 1.0, 0.5)
        if sch is Scheme.QMF_GLOBAL:
            return kernels.hd_global_search(h, g1, g2, HD_GLOBAL_COARSE)[2]
        if sch is Scheme.CUTSET:
            return hd_cutset(ch, hd_cutset_best_schedule(ch))
        if sch is Scheme.DDF:
            return _ddf_rate(h, g1, g2, R)
        if sch in (Scheme.QMF_CSIR, Scheme.HYBRID):
            _need(params, sch)
            if R <= 0.0:
                return hd_qmf_rate(ch, 1.0, 0.5)
            hybrid = sch is Scheme.HYBRID
            if exact:
                f, d, use_ddf = _exact_hd_policy(h, R, params, hybrid)
            else:
                tab = hd_table(R, params, hybrid)
                k = tab.lookup(h)
                f, d, use_ddf = tab.f[k], tab.delta[k], tab.use_ddf[k]
            qmf = hd_qmf_rate(ch, d, f)
            if not hybrid:
                return qmf
            # the relay switches to forwarding as soon as it has decoded
            decodes = np.atleast_1d(f_ddf(h, R)) <= 1.0
            to_ddf = decodes & (use_ddf | (f >= f_ddf(h, R)))
            return np.where(to_ddf, _ddf_rate(h, g1, g2, R), qmf)
    raise InvalidCombination(f"{sch.value} is not defined for {net.value}")


def _need(params, sch):
    if params is None:
        raise ValueError(f"{sch.value} needs the fading statistics (params)")


def _diamond_rates(sch, n, h, g, R):
    if sch is Scheme.QMF_NOISE_LEVEL:
        return diamond.qmf_rate_batch(h, g, 1.0)
    if sch is Scheme.QMF_UNIVERSAL:
        return diamond.qmf_rate_batch(h, g, diamond.universal_delta_opt(n))
    if sch is Scheme.QMF_TWO_RELAY_OPT:
        return diamond.two_relay_opt_batch(h, g)[2]
    if sch is Scheme.QMF_SYMMETRIC_OPT:
        d = diamond.symmetric_delta_batch(n, h.mean(axis=1), g.mean(axis=1))
        return diamond.qmf_rate_batch(h, g, d[:, None])
    if sch is Scheme.DF:
        return diamond.df_rate_batch(h, g)
    if sch is Scheme.CUTSET:
        return diamond.cutset_batch(h, g)
    if sch is Scheme.HYBRID:
        delta = diamond.universal_delta_opt(n) if n >= 2 else 1.0
        fixed = diamond.decode_masks(h, R)
        rate = diamond.qmf_rate_batch(h, g, delta, fixed=fixed)
        # decoded relays only carry what their incoming link supports
        decoded = (fixed[:, None] >> np.arange(n)) & 1 == 1
        rate = np.minimum(rate, np.where(decoded, log2p(h), np.inf).min(axis=1))
        return np.maximum(rate, diamond.qmf_rate_batch(h, g, delta))
    raise InvalidCombination(f"{sch.value} is not defined for DIAMOND")


def rates_batch(spec: SchemeSpec, gains: np.ndarray, R: float,
                params: FadingParams | None = None, exact: bool = False) -> np.ndarray:
    """Supportable rate of ``spec`` on every row of ``gains`` (``(T, n_links)``).

    ``exact`` replaces the tabulated half-duplex CSIR policy by a per-trial
    optimization (slow; used for single realizations and validation).
    """
    gains = np.atleast_2d(np.asarray(gains, dtype=float))
    if gains.shape[1] != spec.n_links:
        raise ValueError(f"expected {spec.n_links} link gains per trial")
    if spec.network is Network.DIAMOND:
        n = spec.n_relays
        return np.asarray(_diamond_rates(spec.scheme, n, gains[:, :n], gains[:, n:], R), float)
    h, g1, g2 = (np.ascontiguousarray(gains[:, k]) for k in range(3))
    out = _single_rates((spec.network, spec.scheme), h, g1, g2, R, params, exact)
    return np.broadcast_to(np.asarray(out, dtype=float), h.shape).copy()


def supportable_rate(spec: SchemeSpec, realization, R_target: float,
                     params: FadingParams | None = None) -> float:
    """Per-realization rate of a scheme; outage occurs when ``R_target`` exceeds it.

    CSIR schemes need ``params`` for the fading statistics the relay optimizes over.
    """
    if isinstance(realization, ChannelSingle):
        if spec.network is Network.DIAMOND:
            raise InvalidCombination("diamond scheme given a single-relay realization")
        row = [realization.h2, realization.g1_2, realization.g2_2]
    elif isinstance(realization, ChannelDiamond):
        if spec.network is not Network.DIAMOND or realization.n != spec.n_relays:
            raise InvalidCombination("realization does not match the scheme's network")
        row = np.concatenate([realization.h2, realization.g2])
    else:
        raise TypeError("realization must be ChannelSingle or ChannelDiamond")
    return float(rates_batch(spec, np.array([row], dtype=float), R_target, params, exact=True)[0])


# --------------------------------------------------------------------------
# estimation
# --------------------------------------------------------------------------

def default_threads() -> int:
    env = os.environ.get("QMFOPT_THREADS")
    if env:
        return max(int(env), 1)
    return max(min(os.cpu_count() or 1, 8), 1)


def _prepare(specs, params, R):
    """Build shared policy tables before any worker starts."""
    for spec in specs:
        if spec.network is Network.SINGLE_HD and spec.scheme in (Scheme.QMF_CSIR, Scheme.HYBRID) \
                and R > 0.0:
            hd_table(R, params, spec.scheme is Scheme.HYBRID)


def outage_counts(specs, params: FadingParams, R: float, trials: int, seed: int,
                  threads: int | None = None) -> np.ndarray:
    """Outage counts of each spec on the same ``trials`` realizations."""
    if trials < 1:
        raise ValueError("trials must be at least 1")
    specs = list(specs)
    for spec in specs:
        if spec.n_links != params.n_links:
            raise InvalidCombination("fading parameters do not match the network")
    if R <= 0.0:
        return np.zeros(len(specs), dtype=np.int64)
    _prepare(specs, params, R)
    starts = list(range(0, trials, CHUNK))

    def work(t0):
        t1 = min(t0 + CHUNK, trials)
        gains = sample_batch(params, t0, t1, seed)
        return np.array([np.count_nonzero(R > rates_batch(s, gains, R, params)) for s in specs],
                        dtype=np.int64)

    threads = default_threads() if threads is None else max(int(threads), 1)
    if threads == 1 or len(starts) == 1:
        parts = [work(t0) for t0 in starts]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(work, starts))
    return np.sum(parts, axis=0)


def estimate(spec: SchemeSpec, params: FadingParams, rate: RateSpec | float, trials: int,
             seed: int, snr_db: float = 0.0, threads: int | None = None) -> OutageEstimate:
    """Outage probability of one scheme at the rate given by ``rate``."""
    R = rate.rate_at(snr_db) if isinstance(rate, RateSpec) else float(rate)
    counts = outage_counts([spec], params, R, trials, seed, threads)
    return OutageEstimate.from_count(int(counts[0]), trials)


def paired_indicators(specs, params: FadingParams, R: float, t0: int, t1: int,
                      seed: int) -> np.ndarray:
    """Boolean outage indicators ``(len(specs), t1 - t0)`` on shared realizations."""
    gains = sample_batch(params, t0, t1, seed)
    return np.array([R > rates_batch(s, gains, R, params) for s in specs])


@dataclass(frozen=True)
class SweepRow:
    snr_db: float
    scheme: str
    rate_bits: float
    estimate: OutageEstimate


def params_at(ratios, snr_db: float) -> FadingParams:
    """Link statistics with mean gain ``ratio * SNR`` on every link."""
    snr = 10.0 ** (snr_db / 10.0)
    return FadingParams.from_mean_snr([r * snr for r in ratios])


def sweep(specs, ratios, rate: RateSpec, snr_grid_db, trials: int, seed: int,
          threads: int | None = None) -> list[SweepRow]:
    """Outage of every spec at every SNR point, on common random numbers."""
    specs = list(specs)
    rows: list[SweepRow] = []
    for snr_db in snr_grid_db:
        params = params_at(ratios, snr_db)
        R = rate.rate_at(snr_db)
        counts = outage_counts(specs, params, R, trials, seed, threads)
        for spec, c in zip(specs, counts):
            rows.append(SweepRow(float(snr_db), spec.scheme.value, R,
                                 OutageEstimate.from_count(int(c), trials)))
    return rows

"""Oracle cross-checks behind ``qmfopt verify``.

Each suite compares closed forms against grid searches, adaptive quadrature
or Monte Carlo with fixed seeds, and returns a list of :class:`Check`.
Sizes are arguments so the same code serves quick CLI runs and the larger
acceptance runs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import diamond
from .channel import ChannelDiamond, ChannelSingle, sample_batch
from .numerics import exp_measure
from .outage import Network, Scheme, SchemeSpec, paired_indicators, params_at, rates_batch
from .qopt_fd import (CsirContext, conditional_outage_local, csir_Q, csir_region, local_betas,
                      opt_csir, opt_global_vec, opt_local_vec)
from .qopt_hd import (ddf_csir_outage, f_ddf, hd_csir_outage, hd_csir_outage_fast,
                      hd_delta_star, hd_delta_star_numeric, hd_opt_csir, hd_opt_global,
                      hybrid_ddf_qmf)
from .rates_single import fd_qmf_branches, fd_qmf_rate, hd_qmf_rate


@dataclass(frozen=True)
class Check:
    name: str
    ok: bool
    detail: str = ""

    def line(self) -> str:
        return f"{'PASS' if self.ok else 'FAIL'}  {self.name}" + (f"  ({self.detail})" if self.detail else "")


def _loguni(rng, lo, hi, size):
    return 10.0 ** rng.uniform(math.log10(lo), math.log10(hi), size)


def _chunks(n, size):
    for a in range(0, n, size):
        yield a, min(a + size, n)


# --------------------------------------------------------------------------
# full duplex
# --------------------------------------------------------------------------

def fd_opt(n: int = 500, seed: int = 1) -> list[Check]:
    rng = np.random.default_rng(seed)
    h, g1, g2 = (_loguni(rng, 1e-2, 1e3, n) for _ in range(3))
    R = rng.uniform(0.2, 4.0, n)
    lam2 = _loguni(rng, 1e-2, 10.0, n)
    grid = np.logspace(-6, 8, 20001)
    checks = []

    d = opt_global_vec(h, g1, g2)
    rate = fd_qmf_rate(ChannelSingle(h, g1, g2), d)
    deficit = 0.0
    for a, b in _chunks(n, 50):
        ch = ChannelSingle(h[a:b, None], g1[a:b, None], g2[a:b, None])
        deficit = max(deficit, float(np.max(fd_qmf_rate(ch, grid[None, :]).max(axis=1) - rate[a:b])))
    checks.append(Check("opt_global >= grid max - 1e-6", deficit <= 1e-6, f"max deficit {deficit:.2e}"))
    i1, i2 = fd_qmf_branches(ChannelSingle(h, g1, g2), d)
    gap = float(np.max(np.abs(i1 - i2)))
    checks.append(Check("opt_global equalizes the branches", gap <= 1e-9, f"max |I1-I2| {gap:.2e}"))

    d = opt_local_vec(h, g1, R)
    p = conditional_outage_local(h, g1, R, d, lam2)
    excess = 0.0
    for a, b in _chunks(n, 50):
        pg = conditional_outage_local(h[a:b, None], g1[a:b, None], R[a:b, None], grid[None, :],
                                      lam2[a:b, None])
        excess = max(excess, float(np.max(p[a:b] - pg.min(axis=1))))
    checks.append(Check("opt_local outage <= grid min", excess <= 1e-12, f"max excess {excess:.2e}"))
    b1, b2 = local_betas(h, g1, R, d)
    gap = float(np.max(np.abs(b1 - b2) / (1.0 + np.abs(b1))))
    checks.append(Check("opt_local equalizes the thresholds", gap <= 1e-9, f"max rel gap {gap:.2e}"))

    lam1 = _loguni(rng, 1e-2, 10.0, n)
    lam1[: n // 2] = lam2[: n // 2]
    excess, worst_q = 0.0, 0.0
    for k in range(n):
        ctx = CsirContext(float(h[k]), float(R[k]), float(lam1[k]), float(lam2[k]))
        dk = opt_csir(ctx)
        q = csir_Q(ctx, dk) if math.isfinite(dk) else csir_Q(ctx, 1e300)
        excess = max(excess, float(np.max(csir_Q(ctx, grid))) - float(q))
    checks.append(Check("opt_csir success >= grid max", excess <= 1e-10,
                        f"max shortfall {excess:.2e}"))
    for k in range(20):
        ctx = CsirContext(float(h[k]), float(R[k]), float(lam1[k]), float(lam2[k]))
        dk = float(rng.choice(grid))
        ref = exp_measure(csir_region(ctx, dk), ctx.lambda1, ctx.lambda2)
        worst_q = max(worst_q, abs(ref - float(csir_Q(ctx, dk))))
    checks.append(Check("csir_Q closed form matches quadrature", worst_q <= 1e-8,
                        f"max abs diff {worst_q:.2e}"))
    return checks


# --------------------------------------------------------------------------
# half duplex
# --------------------------------------------------------------------------

def hd_global_grid_deficit(h, g1, g2, nf: int = 300, nd: int = 300) -> float:
    """Largest amount by which a 2-D ``(f, delta)`` grid beats ``hd_opt_global``."""
    fs = np.linspace(1e-3, 1.0 - 1e-3, nf)[:, None]
    ds = np.logspace(-4, 7, nd)[None, :]
    worst = -math.inf
    for a, b, c in zip(h, g1, g2):
        ch = ChannelSingle(float(a), float(b), float(c))
        rate = hd_opt_global(ch)[2]
        worst = max(worst, float(hd_qmf_rate(ch, ds, fs).max()) - rate)
    return worst


def hd_opt(n: int = 200, seed: int = 2) -> list[Check]:
    rng = np.random.default_rng(seed)
    h, g1, g2 = (_loguni(rng, 1e-2, 1e3, n) for _ in range(3))
    checks = []
    deficit = hd_global_grid_deficit(h, g1, g2)
    checks.append(Check("hd_opt_global >= 2-D grid max - 1e-6", deficit <= 1e-6,
                        f"max deficit {deficit:.2e}"))
    worst = 0.0
    for k in range(50):
        ch = ChannelSingle(float(h[k]), float(g1[k]), float(g2[k]))
        f = float(rng.uniform(0.05, 0.95))
        worst = max(worst, abs(hd_delta_star(ch, f) / hd_delta_star_numeric(ch, f) - 1.0))
    checks.append(Check("closed-form delta*(f) matches root finding", worst <= 1e-8,
                        f"max rel diff {worst:.2e}"))

    worst = 0.0
    for k in range(20):
        ctx = CsirContext(float(h[k]), float(rng.uniform(0.3, 3.0)), float(_loguni(rng, 0.05, 5, 1)[0]),
                          float(_loguni(rng, 0.05, 5, 1)[0]))
        f, d = float(rng.uniform(0.05, 0.95)), float(_loguni(rng, 1e-2, 1e2, 1)[0])
        worst = max(worst, abs(hd_csir_outage(ctx, f, d) - hd_csir_outage_fast(ctx, f, d)))
    checks.append(Check("fast outage kernel matches adaptive quadrature", worst <= 1e-5,
                        f"max abs diff {worst:.2e}"))

    excess, dominated = 0.0, True
    fs = np.linspace(0.01, 0.99, 60)[:, None]
    ds = np.logspace(-3, 4, 80)[None, :]
    for k in range(6):
        ctx = CsirContext(float(_loguni(rng, 0.1, 20, 1)[0]), float(rng.uniform(0.5, 2.0)), 1.0, 1.0)
        f, d = hd_opt_csir(ctx)
        p = hd_csir_outage(ctx, f, d)
        excess = max(excess, p - float(hd_csir_outage_fast(ctx, fs, ds).min()))
        pol = hybrid_ddf_qmf(ctx)
        fdd = f_ddf(ctx.h2, ctx.R)
        p_ddf = ddf_csir_outage(ctx, fdd) if fdd <= 1.0 else 1.0
        dominated &= pol.outage <= min(p, p_ddf) + 1e-6
    checks.append(Check("hd_opt_csir outage <= 60x80 grid min", excess <= 1e-6,
                        f"max excess {excess:.2e}"))
    checks.append(Check("hybrid policy outage <= min(QMF, DDF)", bool(dominated)))
    return checks


# --------------------------------------------------------------------------
# two relays and symmetric networks
# --------------------------------------------------------------------------

def two_relay_grid_deficit(h2, g2, grid_points: int = 400, lo: float = 1e-6,
                           hi: float = 1e8) -> np.ndarray:
    """Per-channel ``grid max - analytic rate`` on a square log grid."""
    grid = np.logspace(math.log10(lo), math.log10(hi), grid_points)
    d1, d2 = (x.ravel() for x in np.meshgrid(grid, grid, indexing="ij"))
    dv = np.stack([d1, d2], axis=1)
    out = np.empty(len(h2))
    for k in range(len(h2)):
        rate = diamond.two_relay_opt(ChannelDiamond(h2[k], g2[k]))[2]
        hb = np.broadcast_to(h2[k], dv.shape)
        gb = np.broadcast_to(g2[k], dv.shape)
        out[k] = float(diamond.qmf_rate_batch(hb, gb, dv).max()) - rate
    return out


def symmetric_two_relay_mismatch(n: int = 200, seed: int = 4) -> float:
    """Largest relative difference of the two-relay and symmetric optima on ``(h,h,g,g)``."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(n):
        h, g = _loguni(rng, 1e-2, 1e2, 2)
        d1, d2, rate = diamond.two_relay_opt(ChannelDiamond([h, h], [g, g]))
        ds, rs = diamond.symmetric_opt(2, h, g)
        worst = max(worst, abs(d1 - ds) / ds, abs(d2 - ds) / ds, abs(rate - rs))
    return worst


def two_relay(n: int = 200, grid_points: int = 400, seed: int = 3) -> list[Check]:
    rng = np.random.default_rng(seed)
    h2 = _loguni(rng, 1e-1, 1e3, (n, 2))
    g2 = _loguni(rng, 1e-1, 1e3, (n, 2))
    deficit = two_relay_grid_deficit(h2, g2, grid_points)
    worst = float(deficit.max())
    checks = [Check(f"closed form >= {grid_points}x{grid_points} grid max - 0.01 bits",
                    worst <= 0.01, f"max deficit {worst:.2e}")]
    mismatch = symmetric_two_relay_mismatch(50, seed + 1)
    checks.append(Check("symmetric inputs reproduce the symmetric optimum", mismatch <= 1e-8,
                        f"max mismatch {mismatch:.2e}"))
    ties = 0.0
    for k in range(min(n, 50)):
        ch = ChannelDiamond(h2[k], g2[k])
        d1, d2, rate = diamond.two_relay_opt(ch)
        cuts = sorted(diamond.cut_value(ch, [d1, d2], om) for om in diamond.RelayPartition.all(2))
        ties = max(ties, cuts[1] - cuts[0])
    checks.append(Check("optimum ties at least two cuts", ties <= 1e-6, f"max spread {ties:.2e}"))
    return checks


def symmetric_n(n: int = 100, seed: int = 5) -> list[Check]:
    rng = np.random.default_rng(seed)
    grid = np.logspace(-6, 8, 1000)
    worst, worst_batch = -math.inf, 0.0
    ns = rng.integers(2, 9, n)
    h2, g2 = _loguni(rng, 1e-2, 1e2, n), _loguni(rng, 1e-2, 1e2, n)
    for k in range(n):
        d, rate = diamond.symmetric_opt(int(ns[k]), h2[k], g2[k])
        gm = float(diamond.symmetric_rates(int(ns[k]), h2[k], g2[k], grid).min(axis=0).max())
        worst = max(worst, gm - rate)
        db = float(diamond.symmetric_delta_batch(int(ns[k]), h2[k:k + 1], g2[k:k + 1])[0])
        worst_batch = max(worst_batch, abs(db / d - 1.0))
    checks = [Check("symmetric_opt >= 1-D grid max - 1e-3", worst <= 1e-3, f"max deficit {worst:.2e}"),
              Check("batched crossing matches scalar crossing", worst_batch <= 1e-9,
                    f"max rel diff {worst_batch:.2e}")]
    rep = diamond.nrelay_lemma_checks(5, 1.0, 10.0)
    checks.append(Check("N=5 reference instance certified", rep.ok, "; ".join(rep.violations)))
    return checks


# --------------------------------------------------------------------------
# universal quantizer
# --------------------------------------------------------------------------

def universal_gap(n_channels: int = 10_000, seed: int = 6) -> list[Check]:
    checks = []
    g2 = diamond.gap_star(2)
    exact = 2.0 * math.log2(3.0) - 1.0
    checks.append(Check("gap_star(2) = 2 log2 3 - 1", abs(g2 - exact) <= 4 * np.finfo(float).eps,
                        f"{g2!r}"))
    beats = all(diamond.gap_star(n) <= diamond.universal_gap(n, 1.0) for n in range(2, 65))
    checks.append(Check("gap_star(N) <= noise-level gap for N = 2..64", beats))
    growth = diamond.gap_star(1024) - 2.0 * math.log2(1023.0)
    checks.append(Check("gap_star(1024) - 2 log2 1023 within 0.01 of log2 e",
                        abs(growth - math.log2(math.e)) <= 0.01, f"{growth:.5f}"))
    grid = np.logspace(-3, 4, 1000)
    worst = max(diamond.gap_star(n) - min(diamond.universal_gap(n, d) for d in grid)
                for n in (2, 3, 4, 8, 16))
    checks.append(Check("gap_star matches a 1000-point grid minimum", worst <= 1e-3,
                        f"max excess {worst:.2e}"))
    rng = np.random.default_rng(seed)
    excess = -math.inf
    for n in (2, 3, 4, 6):
        h2 = _loguni(rng, 1e-3, 1e4, (n_channels, n))
        g2 = _loguni(rng, 1e-3, 1e4, (n_channels, n))
        gap = diamond.cutset_batch(h2, g2) - diamond.qmf_rate_batch(h2, g2, diamond.universal_delta_opt(n))
        excess = max(excess, float(gap.max()) - diamond.gap_star(n))
    checks.append(Check("cutset - universal QMF <= gap_star on random channels", excess <= 1e-9,
                        f"max excess {excess:.3g}"))
    return checks


# --------------------------------------------------------------------------
# appendix properties
# --------------------------------------------------------------------------

def claim_violations(h1, h2, g1, g2, d2_frac):
    """Violation masks of the interval-ordering and dominance claims.

    The ordering claim is ``(1 + h2) / (g1 + g2) < delta1 < delta2``. The
    dominance claim compares the two candidate ``delta1`` values for
    ``Delta2 >= delta2``; the (1;2) crossing is infinite when its
    denominator is not positive. ``d2_frac`` in ``[0, 1)`` places ``Delta2``
    on ``[delta2, 100 delta2)`` logarithmically.
    """
    _, _, _, lo, hi, _, _ = diamond._two_relay_constants(h1, h2, g1, g2)
    order = ~(((1.0 + h2) / (g1 + g2) < lo) & (lo < hi))
    d2 = hi * 100.0 ** d2_frac
    one_empty = ((1.0 + h1) * d2 + (1.0 + h1 + h2)) / (g1 * (d2 + (1.0 + h2)))
    den = (g1 - g2) * d2 + (1.0 + g1) * (1.0 + h2)
    with np.errstate(divide="ignore"):
        one_two = np.where(den > 0.0, (1.0 + g1) * (1.0 + h1) * d2 / den, np.inf)
    return order, ~(one_two > one_empty)


def lemmas(n: int = 10_000, seed: int = 7) -> list[Check]:
    rng = np.random.default_rng(seed)
    h1, h2, g1, g2 = (_loguni(rng, 1e-3, 1e4, n) for _ in range(4))
    order, dom = claim_violations(h1, h2, g1, g2, rng.uniform(0.0, 1.0, n))
    checks = [Check(f"interval ordering claim on {n} channels", not order.any(),
                    f"{int(order.sum())} violations"),
              Check(f"dominance claim on {n} channels", not dom.any(), f"{int(dom.sum())} violations")]
    ns = rng.integers(2, 9, n)
    hs, gs = _loguni(rng, 1e-2, 1e2, n), _loguni(rng, 1e-2, 1e2, n)
    bad = np.zeros(3, dtype=int)
    for k in range(2, 9):
        sel = ns == k
        if sel.any():
            bad += diamond.lemma_violations_batch(k, hs[sel], gs[sel]).sum(axis=0)
    names = ("single crossing per pair", "ordering as delta -> 0", "crossings non-decreasing")
    checks += [Check(f"{nm} on {n} symmetric networks", b == 0, f"{b} violations")
               for nm, b in zip(names, bad)]
    return checks


# --------------------------------------------------------------------------
# hybrid dominance
# --------------------------------------------------------------------------

def realization_dominance(trials: int = 100_000, seed: int = 8) -> dict[str, int]:
    """Count trials where the hybrid rate falls below its QMF component."""
    out = {}
    p_fd = params_at((1.0, 1.0, 1.0), 15.0)
    gains = sample_batch(p_fd, 0, trials, seed)
    for R in (0.5, 2.0, 4.0):
        hyb = rates_batch(SchemeSpec(Network.SINGLE_FD, Scheme.HYBRID), gains, R, p_fd)
        qmf = rates_batch(SchemeSpec(Network.SINGLE_FD, Scheme.QMF_CSIR), gains, R, p_fd)
        out[f"FD single R={R}"] = int(np.count_nonzero(hyb < qmf - 1e-12))
    for n in (2, 3, 4):
        p = params_at((1.0,) * n + (3.0,) * n, 10.0)
        gains = sample_batch(p, 0, trials, seed)
        for R in (1.0, 3.0):
            hyb = rates_batch(SchemeSpec(Network.DIAMOND, Scheme.HYBRID, n), gains, R, p)
            qmf = rates_batch(SchemeSpec(Network.DIAMOND, Scheme.QMF_UNIVERSAL, n), gains, R, p)
            out[f"diamond N={n} R={R}"] = int(np.count_nonzero(hyb < qmf - 1e-12))
    return out


def paired_dominance(network: Network, rival: Scheme, ratios, r: float, snr_grid_db,
                     trials: int, seed: int) -> list[tuple[float, float, float]]:
    """Per SNR point: ``(snr_db, mean difference, 3 sigma band)`` of hybrid minus rival outage."""
    rows = []
    specs = [SchemeSpec(network, Scheme.HYBRID), SchemeSpec(network, rival)]
    for snr in snr_grid_db:
        params = params_at(ratios, snr)
        R = r * math.log2(10.0 ** (snr / 10.0))
        diffs = []
        for a, b in _chunks(trials, 8192):
            ind = paired_indicators(specs, params, R, a, b, seed)
            diffs.append(ind[0].astype(np.int8) - ind[1].astype(np.int8))
        dvec = np.concatenate(diffs).astype(float)
        rows.append((float(snr), float(dvec.mean()), 3.0 * float(dvec.std()) / math.sqrt(trials)))
    return rows


def hybrid_dominance(trials: int = 100_000, seed: int = 9, points: int = 10) -> list[Check]:
    checks = [Check(f"per-trial hybrid >= QMF, {k}", v == 0, f"{v} exceptions")
              for k, v in realization_dominance(trials, seed).items()]
    grid = np.linspace(4.0, 40.0, points)
    for net, rival, r in ((Network.SINGLE_FD, Scheme.DF, 0.5), (Network.SINGLE_HD, Scheme.DDF, 0.5)):
        rows = paired_dominance(net, rival, (1.0, 1.0, 1.0), r, grid, trials, seed)
        worst = max(m - band for _, m, band in rows)
        checks.append(Check(f"hybrid outage <= {rival.value} within 3 sigma ({net.value})",
                            worst <= 0.0, f"max excess over band {worst:.2e}"))
    return checks


SUITES = {
    "fd-opt": fd_opt,
    "hd-opt": hd_opt,
    "two-relay": two_relay,
    "symmetric-n": symmetric_n,
    "universal-gap": universal_gap,
    "lemmas": lemmas,
    "hybrid-dominance": hybrid_dominance,
}


def run_suite(name: str) -> list[Check]:
    """Run a suite by name at its default size."""
    return SUITES[name]()


__all__ = ["Check", "SUITES", "run_suite", "claim_violations", "two_relay_grid_deficit",
           "hd_global_grid_deficit", "symmetric_two_relay_mismatch", "realization_dominance",
           "paired_dominance"]

"""Acceptance criteria, each at its stated tolerance.

Every test records one PASS/FAIL line, printed in the terminal summary.
"""

import math
import time

import numpy as np
import pytest

from conftest import loguni
from qmfopt import verify
from qmfopt.channel import ChannelSingle, RateSpec
from qmfopt.cli import main
from qmfopt.outage import Network, Scheme, SchemeSpec, sweep
from qmfopt.qopt_fd import CsirContext, conditional_outage_local, csir_Q, opt_csir, opt_local
from qmfopt.rates_single import fd_qmf_rate

TRIALS = 100_000


def _all_ok(checks):
    return all(c.ok for c in checks), "; ".join(f"{c.name}: {c.detail}" for c in checks if c.detail)


def test_1_optimizer_equivalence(acceptance):
    t = time.perf_counter()
    checks = verify.fd_opt(n=500)
    rng = np.random.default_rng(11)
    h, g1, g2 = (loguni(rng, 1e-2, 1e3, 500) for _ in range(3))
    deficit = verify.hd_global_grid_deficit(h, g1, g2)
    checks.append(verify.Check("hd_opt_global >= 300x300 grid max - 1e-6", deficit <= 1e-6,
                               f"{deficit:.2e}"))
    elapsed = time.perf_counter() - t
    ok, detail = _all_ok(checks)
    assert acceptance("1 optimizer equivalence", ok and elapsed < 60, f"{elapsed:.1f}s; {detail}")


def test_2_universal_quantizer(acceptance):
    ok, detail = _all_ok(verify.universal_gap()[:3])
    assert acceptance("2 universal quantizer gap", ok, detail)


def test_3_two_relay_brute_force(acceptance):
    t = time.perf_counter()
    rng = np.random.default_rng(3)
    h2, g2 = loguni(rng, 1e-1, 1e3, (200, 2)), loguni(rng, 1e-1, 1e3, (200, 2))
    deficit = float(verify.two_relay_grid_deficit(h2, g2, 400).max())
    mismatch = verify.symmetric_two_relay_mismatch(200)
    elapsed = time.perf_counter() - t
    ok = deficit <= 0.01 and mismatch <= 1e-8 and elapsed < 180
    assert acceptance("3 two-relay optimum vs 400x400 grid", ok,
                      f"{elapsed:.1f}s; deficit {deficit:.2e}; symmetric mismatch {mismatch:.2e}")


def test_4_property_suites(acceptance):
    t = time.perf_counter()
    ok, detail = _all_ok(verify.lemmas(n=10_000))
    elapsed = time.perf_counter() - t
    assert acceptance("4 claims and lemma certificates", ok and elapsed < 120,
                      f"{elapsed:.1f}s; {detail}")


def test_5_closed_form_outage_vs_mc(acceptance):
    rng = np.random.default_rng(5)
    n_mc, worst = 10**6, 0.0
    for _ in range(50):
        h, g1 = loguni(rng, 0.1, 100.0), loguni(rng, 0.1, 100.0)
        R = float(rng.uniform(0.3, 3.0))
        lam1, lam2 = loguni(rng, 0.05, 5.0), loguni(rng, 0.05, 5.0)
        d = opt_local(h, g1, R) * float(loguni(rng, 0.3, 3.0))
        g2 = rng.exponential(1.0 / lam2, n_mc)
        p = float(conditional_outage_local(h, g1, R, d, lam2))
        p_mc = np.mean(fd_qmf_rate(ChannelSingle(h, g1, g2), d) < R)
        worst = max(worst, abs(p_mc - p) / max(math.sqrt(p * (1 - p) / n_mc), 1.0 / n_mc))

        ctx = CsirContext(h, R, lam1, lam2)
        d = opt_csir(ctx)
        d = d if math.isfinite(d) else 1e300
        q = float(csir_Q(ctx, d))
        ch = ChannelSingle(h, rng.exponential(1.0 / lam1, n_mc), rng.exponential(1.0 / lam2, n_mc))
        q_mc = np.mean(fd_qmf_rate(ch, d) >= R)
        worst = max(worst, abs(q_mc - q) / max(math.sqrt(q * (1 - q) / n_mc), 1.0 / n_mc))
    assert acceptance("5 closed-form outage vs 1e6-trial MC", worst <= 4.0,
                      f"max deviation {worst:.2f} standard errors")


def test_6_hybrid_dominance(acceptance):
    ok, detail = _all_ok(verify.hybrid_dominance(trials=TRIALS, points=10))
    assert acceptance("6 hybrid dominance", ok, detail)


# --------------------------------------------------------------------------
# figure trends
# --------------------------------------------------------------------------

def _curves(network, schemes, ratios, r, grid, n=1, seed=1):
    specs = [SchemeSpec(network, s, n) for s in schemes]
    rows = sweep(specs, ratios, RateSpec(r=r), grid, TRIALS, seed)
    return {s.value: np.array([row.estimate.p_hat for row in rows if row.scheme == s.value])
            for s in schemes}


def _snr_at(grid, p, target=1e-2):
    """SNR where the curve finally drops below ``target``, log-interpolated from the high-SNR side."""
    above = np.flatnonzero(p >= target)
    if above.size == 0 or above[-1] == p.size - 1:
        return math.nan
    k = above[-1] + 1
    lo, hi = math.log10(max(p[k], 0.5 / TRIALS)), math.log10(p[k - 1])
    return grid[k] - (grid[k] - grid[k - 1]) * (math.log10(target) - lo) / (hi - lo)


def test_7a_fd_csir_gains(acceptance):
    grid = np.arange(0.0, 42.0, 2.0)
    c = _curves(Network.SINGLE_FD, (Scheme.QMF_NOISE_LEVEL, Scheme.QMF_CSIR, Scheme.QMF_GLOBAL),
                (1, 1, 1), 0.3, grid)
    nl, cs, gl = (_snr_at(grid, c[k]) for k in ("QMF_NOISE_LEVEL", "QMF_CSIR", "QMF_GLOBAL"))
    gain_csir, gain_global = nl - cs, cs - gl
    ok = abs(gain_csir - 3.0) <= 1.0 and abs(gain_global - 2.0) <= 1.0
    assert acceptance("7a FD iid r=0.3 dB gaps at 1e-2", ok,
                      f"CSIR vs noise level {gain_csir:.2f} dB; global vs CSIR {gain_global:.2f} dB")


def test_7b_hd_ddf_sign(acceptance):
    out = {}
    for r, grid in ((0.3, np.arange(0.0, 42.0, 2.0)), (0.7, np.arange(20.0, 62.0, 2.0))):
        c = _curves(Network.SINGLE_HD, (Scheme.QMF_CSIR, Scheme.DDF), (1, 1, 1), r, grid)
        out[r] = _snr_at(grid, c["QMF_CSIR"]) - _snr_at(grid, c["DDF"])
    ok = out[0.3] > 0.0 and out[0.7] < 0.0
    assert acceptance("7b HD DDF vs CSIR-QMF sign", ok,
                      f"CSIR minus DDF at 1e-2: r=0.3 {out[0.3]:+.2f} dB, r=0.7 {out[0.7]:+.2f} dB")


def _tail_slope(grid, p, decades=2.0):
    """Least-squares diversity slope over the top ``decades`` of the SNR grid."""
    sel = (grid >= grid[-1] - 10.0 * decades) & (p > 0.0)
    return -np.polyfit(grid[sel] / 10.0, np.log10(p[sel]), 1)[0]


def test_7c_diamond_slope(acceptance):
    grid = np.arange(0.0, 62.0, 2.0)
    c = _curves(Network.DIAMOND, (Scheme.QMF_UNIVERSAL, Scheme.DF), (1, 10, 25, 1), 0.7, grid, n=2)
    su, sd = _tail_slope(grid, c["QMF_UNIVERSAL"]), _tail_slope(grid, c["DF"])
    assert acceptance("7c asymmetric diamond slope difference > 0.3", su - sd > 0.3,
                      f"universal {su:.3f}, DF {sd:.3f}, difference {su - sd:.3f}")


def test_8_determinism(acceptance, tmp_path):
    cfg = tmp_path / "mixed.cfg"
    outs = []
    texts = {
        "fd": "network = SINGLE_FD\nschemes = QMF_CSIR, QMF_GLOBAL, DF, HYBRID\nr = 0.5\n",
        "hd": "network = SINGLE_HD\nschemes = QMF_CSIR, DDF, HYBRID\nr = 0.5\n",
        "dm": "network = DIAMOND\nn_relays = 3\nschemes = QMF_UNIVERSAL, DF, HYBRID\nr = 0.5\n",
    }
    same = True
    for name, text in texts.items():
        cfg.write_text(text + "snr_db = 0, 30, 10\ntrials = 20000\nseed = 3\n")
        outs = []
        for threads in (1, 8):
            out = tmp_path / f"{name}_{threads}.csv"
            assert main(["sweep", "--config", str(cfg), "--out", str(out), "--threads", str(threads)]) == 0
            outs.append(out.read_bytes())
        same &= outs[0] == outs[1]
    assert acceptance("8 byte-identical CSV at 1 and 8 threads", same)

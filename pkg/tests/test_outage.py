import math

import numpy as np
import pytest

from qmfopt import diamond
from qmfopt.channel import ChannelDiamond, ChannelSingle, FadingParams, RateSpec, sample_batch
from qmfopt.errors import InvalidCombination
from qmfopt.outage import (HD_BINS, Network, OutageEstimate, Scheme, SchemeSpec, estimate,
                           hd_table, outage_counts, params_at, rates_batch, supportable_rate, sweep)
from qmfopt.qopt_fd import conditional_outage_local, opt_global, opt_local
from qmfopt.qopt_hd import csir_search
from qmfopt.rates_single import fd_qmf_rate, hd_qmf_rate

FD = Network.SINGLE_FD
HD = Network.SINGLE_HD
DM = Network.DIAMOND


def test_scheme_validation():
    with pytest.raises(InvalidCombination):
        SchemeSpec(DM, Scheme.DIRECT, 2)
    with pytest.raises(InvalidCombination):
        SchemeSpec(HD, Scheme.DF)
    with pytest.raises(InvalidCombination):
        SchemeSpec(DM, Scheme.QMF_TWO_RELAY_OPT, 3)
    with pytest.raises(InvalidCombination):
        SchemeSpec(FD, Scheme.QMF_CSIR, 2)
    assert SchemeSpec("DIAMOND", "DF", 3).n_links == 6


def test_estimate_fields():
    e = OutageEstimate.from_count(250, 1000)
    assert e.p_hat == 0.25
    assert e.ci95_halfwidth == pytest.approx(1.96 * math.sqrt(0.25 * 0.75 / 1000))


def test_supportable_rate_compositions():
    params = FadingParams((1.0, 1.0, 1.0))
    hyb = SchemeSpec(FD, Scheme.HYBRID)
    assert supportable_rate(hyb, ChannelSingle(15.0, 2.0, 1.0), 1.0, params) == pytest.approx(2.0)
    ch = ChannelSingle(3.0, 2.0, 1.0)
    assert supportable_rate(SchemeSpec(FD, Scheme.QMF_GLOBAL), ch, 1.0) == \
        pytest.approx(fd_qmf_rate(ch, opt_global(ch)))
    dch = ChannelDiamond([0.5, 0.5], [2.0, 1.0])
    rate = supportable_rate(SchemeSpec(DM, Scheme.HYBRID, 2), dch, 2.0)
    assert rate == pytest.approx(diamond.qmf_rate(dch, [2.0, 2.0]))


def test_direct_outage():
    est = estimate(SchemeSpec(FD, Scheme.DIRECT), FadingParams((1.0, 1.0, 1.0)), 1.0, 10**6, 3)
    p = 1 - math.exp(-1)
    assert abs(est.p_hat - p) <= 4 * math.sqrt(p * (1 - p) / 10**6)


def test_zero_rate_never_outage():
    est = estimate(SchemeSpec(FD, Scheme.QMF_CSIR), FadingParams((1.0, 1.0, 1.0)), 0.0, 1000, 1)
    assert est.p_hat == 0.0


def test_local_scheme_conditional_outage():
    # fix (h, g1) through near-deterministic statistics, randomize only g2
    h, g1, R = 2.0, 0.8, 1.1
    g2 = sample_batch(FadingParams((1.0, 1.0, 0.7)), 0, 10**6, 9)[:, 2]
    gains = np.stack([np.full_like(g2, h), np.full_like(g2, g1), g2], axis=1)
    rates = rates_batch(SchemeSpec(FD, Scheme.QMF_LOCAL), gains, R)
    p = conditional_outage_local(h, g1, R, opt_local(h, g1, R), 0.7)
    assert abs(np.mean(rates < R) - p) <= 4 * math.sqrt(p * (1 - p) / g2.size)


def test_counts_independent_of_threads():
    specs = [SchemeSpec(FD, s) for s in (Scheme.QMF_CSIR, Scheme.DF, Scheme.HYBRID)]
    params = params_at((1, 1, 1), 10.0)
    a = outage_counts(specs, params, 1.0, 50_000, 4, threads=1)
    b = outage_counts(specs, params, 1.0, 50_000, 4, threads=4)
    assert np.array_equal(a, b)


def test_cutset_below_every_scheme():
    params = params_at((1, 1, 1), 12.0)
    gains = sample_batch(params, 0, 20_000, 2)
    cut = rates_batch(SchemeSpec(FD, Scheme.CUTSET), gains, 1.5, params)
    for s in (Scheme.QMF_NOISE_LEVEL, Scheme.QMF_GLOBAL, Scheme.QMF_CSIR, Scheme.DF, Scheme.HYBRID):
        assert np.all(rates_batch(SchemeSpec(FD, s), gains, 1.5, params) <= cut + 1e-12)
    dp = params_at((1, 2, 3, 1), 12.0)
    dg = sample_batch(dp, 0, 20_000, 2)
    cut = rates_batch(SchemeSpec(DM, Scheme.CUTSET, 2), dg, 1.5)
    for s in (Scheme.QMF_UNIVERSAL, Scheme.QMF_TWO_RELAY_OPT, Scheme.DF, Scheme.HYBRID):
        assert np.all(rates_batch(SchemeSpec(DM, s, 2), dg, 1.5) <= cut + 1e-12)


def test_hybrid_dominates_qmf_per_trial():
    params = params_at((1, 1, 1), 15.0)
    gains = sample_batch(params, 0, 50_000, 5)
    for R in (0.5, 2.0, 4.0):
        hyb = rates_batch(SchemeSpec(FD, Scheme.HYBRID), gains, R, params)
        qmf = rates_batch(SchemeSpec(FD, Scheme.QMF_CSIR), gains, R, params)
        assert np.all(hyb >= qmf)
    dp = params_at((1, 1, 3, 3), 10.0)
    dg = sample_batch(dp, 0, 50_000, 5)
    for R in (1.0, 3.0):
        hyb = rates_batch(SchemeSpec(DM, Scheme.HYBRID, 2), dg, R)
        qmf = rates_batch(SchemeSpec(DM, Scheme.QMF_UNIVERSAL, 2), dg, R)
        assert not np.any((hyb < R) & (qmf >= R))


def test_sweep_monotone_in_snr():
    specs = [SchemeSpec(FD, s) for s in (Scheme.QMF_CSIR, Scheme.DF)]
    rows = sweep(specs, (1, 1, 1), RateSpec(fixed_rate=1.0), [0, 5, 10, 15], 40_000, 1)
    for s in ("QMF_CSIR", "DF"):
        p = [r.estimate.p_hat for r in rows if r.scheme == s]
        assert all(b <= a for a, b in zip(p, p[1:]))


def test_hd_table_matches_exact_policy():
    params = params_at((1, 1, 1), 10.0)
    R = RateSpec(r=0.5).rate_at(10.0)
    tab = hd_table(R, params, hybrid=False)
    assert tab.f.size == HD_BINS
    _, lam1, lam2 = params.inv_snr
    h = 10 ** np.random.default_rng(3).uniform(-1, 1.5, 200) * 10.0
    k = tab.lookup(h)
    _, _, s_exact = csir_search(h, R, lam1, lam2)
    from qmfopt.qopt_hd import _success
    s_tab = _success(h, tab.f[k], np.log(tab.delta[k]), R, lam1, lam2)
    # expected outage difference averaged over the fading of h
    assert np.mean(s_exact - s_tab) < 0.005
    assert np.max(s_exact - s_tab) < 0.02


def test_hd_rates_use_table_policy():
    params = params_at((1, 1, 1), 10.0)
    gains = sample_batch(params, 0, 1000, 1)
    R = 1.5
    tab = hd_table(R, params, hybrid=False)
    k = tab.lookup(gains[:, 0])
    ch = ChannelSingle(gains[:, 0], gains[:, 1], gains[:, 2])
    np.testing.assert_allclose(rates_batch(SchemeSpec(HD, Scheme.QMF_CSIR), gains, R, params),
                               hd_qmf_rate(ch, tab.delta[k], tab.f[k]))


def test_params_needed_for_csir():
    with pytest.raises(ValueError):
        rates_batch(SchemeSpec(FD, Scheme.QMF_CSIR), np.ones((2, 3)), 1.0)

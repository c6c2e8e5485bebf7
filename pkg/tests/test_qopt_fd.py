import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from qmfopt.channel import ChannelSingle
from qmfopt.errors import RelayLinkAbsent
from qmfopt.numerics import exp_measure
from qmfopt.qopt_fd import (CsirContext, conditional_outage_local, csir_cubic, csir_Q, csir_Q_prime,
                           csir_region, local_betas, opt_csir, opt_csir_vec, opt_global,
                           opt_local, opt_local_vec)
from qmfopt.rates_single import fd_qmf_branches, fd_qmf_rate

gain = st.floats(1e-3, 1e3)


def test_opt_global_example():
    ch = ChannelSingle(3.0, 2.0, 1.0)
    assert opt_global(ch) == 2.5
    i1, i2 = fd_qmf_branches(ch, 2.5)
    assert i1 == pytest.approx(math.log2(20 / 7)) and i2 == pytest.approx(i1)
    assert opt_global(ChannelSingle(0.0, 1.0, 0.0)) == 1.0


def test_opt_global_needs_relay_link():
    with pytest.raises(RelayLinkAbsent):
        opt_global(ChannelSingle(1.0, 0.0, 1.0))


@given(gain, gain, gain)
def test_opt_global_beats_grid(h, g1, g2):
    ch = ChannelSingle(h, g1, g2)
    d = opt_global(ch)
    i1, i2 = fd_qmf_branches(ch, d)
    assert i1 == pytest.approx(i2, rel=1e-10, abs=1e-12)
    assert fd_qmf_rate(ch, d) >= np.max(fd_qmf_rate(ch, np.logspace(-4, 6, 200))) - 1e-12


def test_opt_local_example():
    d = opt_local(1.0, 1.0, 1.0)
    assert d == pytest.approx(1 + math.sqrt(3), rel=1e-12)
    b1, b2 = local_betas(1.0, 1.0, 1.0, d)
    assert b1 == pytest.approx(math.sqrt(3) - 1) and b2 == pytest.approx(b1)


@given(gain, gain, st.floats(0, 6))
def test_opt_local_equalizes(h, g1, R):
    d = opt_local(h, g1, R)
    assert d > 0.0
    b1, b2 = local_betas(h, g1, R, d)
    assert b1 == pytest.approx(b2, rel=1e-10, abs=1e-10 * 2**R)


def test_opt_local_vec_handles_no_relay():
    out = opt_local_vec(np.array([1.0, 1.0]), np.array([1.0, 0.0]), 1.0)
    assert out[0] == pytest.approx(1 + math.sqrt(3)) and math.isinf(out[1])


def test_conditional_outage_local():
    p = conditional_outage_local(1.0, 1.0, 1.0, 1 + math.sqrt(3), 1.0)
    assert p == pytest.approx(1 - math.exp(-(math.sqrt(3) - 1)), rel=1e-12)
    assert conditional_outage_local(1.0, 1.0, 0.0, 2.0, 1.0) == 0.0


def test_conditional_outage_local_monte_carlo(rng):
    h, g1, R, lam2 = 2.0, 0.7, 1.3, 0.8
    d = opt_local(h, g1, R)
    p = conditional_outage_local(h, g1, R, d, lam2)
    g2 = rng.exponential(1 / lam2, 10**6)
    mc = np.mean(fd_qmf_rate(ChannelSingle(h, g1, g2), d) < R)
    assert abs(mc - p) <= 4 * math.sqrt(p * (1 - p) / g2.size)


def test_csir_q_example():
    ctx = CsirContext(1.0, 1.0, 1.0, 1.0)
    a1, a2 = ctx.alphas(1.0)
    assert (a1, a2) == (0.5, 3.0)
    assert csir_Q(ctx, 1.0) == pytest.approx(3.5 * math.exp(-3), rel=1e-12)


def test_csir_q_erlang_branch():
    ctx = CsirContext(10.0, 1.0, 1.0, 1.0)
    d = 2.0  # alpha1 < 0 here
    a2 = ctx.alphas(d)[1]
    assert csir_Q(ctx, d) == pytest.approx(math.exp(-a2) * (1 + a2), rel=1e-12)


@given(st.floats(0.01, 50), st.floats(0.05, 4), st.floats(0.1, 5), st.floats(0.1, 5),
       st.floats(1e-3, 1e4))
def test_csir_q_matches_quadrature(h, R, l1, l2, d):
    ctx = CsirContext(h, R, l1, l2)
    ref = exp_measure(csir_region(ctx, d), l1, l2)
    assert float(csir_Q(ctx, d)) == pytest.approx(ref, abs=1e-6)


def test_csir_q_monte_carlo(rng):
    ctx = CsirContext(1.5, 1.2, 0.7, 1.4)
    d = 3.0
    n = 10**6
    g1 = rng.exponential(1 / ctx.lambda1, n)
    g2 = rng.exponential(1 / ctx.lambda2, n)
    q = float(csir_Q(ctx, d))
    mc = np.mean(fd_qmf_rate(ChannelSingle(ctx.h2, g1, g2), d) >= ctx.R)
    assert abs(mc - q) <= 4 * math.sqrt(q * (1 - q) / n)


def test_opt_csir_symmetric_cubic():
    ctx = CsirContext(1.0, 1.0, 1.0, 1.0)
    assert csir_cubic(ctx) == pytest.approx((1.0, -6.0, -10.0, -4.0))
    assert opt_csir(ctx) == pytest.approx(7.420301085238684, rel=1e-10)


def test_opt_csir_threshold_branch():
    ctx = CsirContext(4.0, 0.5, 1.0, 1.0)
    assert ctx.delta_t == pytest.approx(8.656854249492381)
    assert opt_csir(ctx) == pytest.approx(ctx.delta_t, rel=1e-12)


def test_opt_csir_asymmetric_critical_point():
    ctx = CsirContext(1.0, 1.0, 1.0, 2.0)
    d = opt_csir(ctx)
    assert abs(float(csir_Q_prime(ctx, d))) < 1e-8
    assert float(csir_Q(ctx, d)) >= np.max(csir_Q(ctx, np.logspace(-4, 6, 4000)))


def test_opt_csir_no_incoming_link():
    assert math.isinf(opt_csir(CsirContext(0.0, 1.0, 1.0, 1.0)))


def test_opt_csir_continuity_across_lambda_tie():
    sym = opt_csir(CsirContext(1.0, 1.0, 1.0, 1.0))
    asym = opt_csir(CsirContext(1.0, 1.0, 1.0, 1.0001))
    assert asym == pytest.approx(sym, rel=0.01)


def test_opt_csir_beats_grid(rng):
    grid = np.logspace(-4, 6, 400)
    for k in range(100):
        lam1, lam2 = 10 ** rng.uniform(-1, 1, 2)
        if k % 2:
            lam2 = lam1
        ctx = CsirContext(10 ** rng.uniform(-2, 2), rng.uniform(0.1, 3), lam1, lam2)
        q = float(csir_Q(ctx, opt_csir(ctx)))
        assert q >= np.max(csir_Q(ctx, grid)) - 1e-12


def test_opt_csir_vec_matches_scalar(rng):
    h = 10 ** rng.uniform(-2, 2, 50)
    for lam in ((1.0, 1.0), (0.5, 2.0)):
        vec = opt_csir_vec(h, 1.3, *lam)
        ref = [opt_csir(CsirContext(float(x), 1.3, *lam)) for x in h]
        np.testing.assert_allclose(vec, ref, rtol=1e-6)


def test_context_validation():
    with pytest.raises(ValueError):
        CsirContext(1.0, -1.0, 1.0, 1.0)
    with pytest.raises(ValueError):
        CsirContext(1.0, 1.0, 0.0, 1.0)

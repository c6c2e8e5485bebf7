import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from qmfopt import diamond
from qmfopt.channel import ChannelDiamond, ChannelSingle
from qmfopt.diamond import RelayPartition
from qmfopt.errors import DegenerateGain, TooManyRelays
from qmfopt.rates_single import fd_cutset, fd_qmf_rate
from qmfopt.verify import claim_violations

D_SYM = (4 + math.sqrt(40)) / 4
gains = st.lists(st.floats(1e-2, 1e3), min_size=2, max_size=5)


def test_qmf_rate_symmetric_optimum():
    ch = ChannelDiamond([1.0, 1.0], [1.0, 1.0])
    rate = diamond.qmf_rate(ch, [D_SYM, D_SYM])
    assert rate == pytest.approx(math.log2(1 + 2 / (1 + D_SYM)), abs=1e-12)
    assert rate == pytest.approx(0.6401, abs=1e-4)
    empty = diamond.cut_value(ch, [D_SYM, D_SYM], RelayPartition(frozenset(), 2))
    full = diamond.cut_value(ch, [D_SYM, D_SYM], RelayPartition(frozenset({0, 1}), 2))
    assert empty == pytest.approx(full, abs=1e-12)


def test_single_relay_reduces_to_fd():
    ch = ChannelDiamond([3.0], [2.0])
    for d in (0.3, 2.5, 40.0):
        assert diamond.qmf_rate(ch, [d]) == pytest.approx(fd_qmf_rate(ChannelSingle(3.0, 2.0, 0.0), d))
    assert diamond.cutset(ch) == pytest.approx(fd_cutset(ChannelSingle(3.0, 2.0, 0.0)))


def test_cutset_and_df_examples():
    assert diamond.cutset(ChannelDiamond([1, 1], [1, 1])) == pytest.approx(math.log2(3))
    assert diamond.cutset(ChannelDiamond([0, 0], [5, 5])) == 0.0
    assert diamond.df_rate(ChannelDiamond([3, 3], [1, 1])) == pytest.approx(math.log2(3))


def test_df_skips_dead_relay():
    ch = ChannelDiamond([0.0, 3.0], [10.0, 1.0])
    assert diamond.df_rate(ch) == pytest.approx(1.0)


def test_df_prefix_matches_enumeration(rng):
    h2 = 10 ** rng.uniform(-2, 2, (300, 4))
    g2 = 10 ** rng.uniform(-2, 2, (300, 4))
    fast = diamond.df_rate_batch(h2, g2)
    for k in range(300):
        best = 0.0
        for om in RelayPartition.all(4):
            idx = list(om.omega)
            if idx:
                best = max(best, min(math.log2(1 + g2[k, idx].sum()), math.log2(1 + h2[k, idx].min())))
        assert fast[k] == pytest.approx(best, abs=1e-12)


@given(gains, st.floats(1e-3, 1e4))
def test_rates_below_cutset(h, d):
    g = list(reversed(h))
    ch = ChannelDiamond(h, g)
    bound = diamond.cutset(ch)
    assert diamond.qmf_rate(ch, [d] * ch.n) <= bound + 1e-12
    assert diamond.df_rate(ch) <= bound + 1e-12


def test_universal_gap_values():
    assert diamond.universal_gap(2, 2.0) == pytest.approx(2 * math.log2(3) - 1, abs=1e-12)
    assert diamond.universal_gap(3, 2.0) == pytest.approx(3 * math.log2(1.5) + 2, abs=1e-12)
    assert diamond.universal_delta_opt(2) == 2.0 and diamond.universal_delta_opt(3) == 2.0
    assert diamond.gap_star(3) == pytest.approx(3.7548875021634687)
    with pytest.raises(ValueError):
        diamond.gap_star(1)


def test_gap_star_exact_and_growth():
    assert diamond.gap_star(2) == 2 * math.log2(3) - 1
    assert diamond.gap_star(1024) - 2 * math.log2(1023) == pytest.approx(math.log2(math.e), abs=0.01)
    for n in range(2, 65):
        assert diamond.gap_star(n) <= diamond.universal_gap(n, 1.0)
        assert diamond.gap_star(n) == pytest.approx(diamond.universal_gap(n, diamond.universal_delta_opt(n)))


def test_universal_gap_holds_on_random_channels(rng):
    for n in (2, 3, 4, 6):
        h2 = 10 ** rng.uniform(-3, 4, (10**4, n))
        g2 = 10 ** rng.uniform(-3, 4, (10**4, n))
        gap = diamond.cutset_batch(h2, g2) - diamond.qmf_rate_batch(h2, g2, diamond.universal_delta_opt(n))
        assert gap.max() <= diamond.gap_star(n) + 1e-9


def test_two_relay_symmetric_case_trace():
    case = diamond.two_relay_case(ChannelDiamond([1, 1], [1, 1]))
    assert case.A == -2.0
    assert case.delta1 == pytest.approx(11 / 6) and case.delta2 == pytest.approx(4.0)
    assert case.delta3 == pytest.approx(D_SYM) and case.interval == 2 and case.case == 3
    d1, d2, rate = diamond.two_relay_opt(ChannelDiamond([1, 1], [1, 1]))
    assert d1 == pytest.approx(D_SYM) and d2 == pytest.approx(D_SYM)
    assert rate == pytest.approx(diamond.symmetric_opt(2, 1.0, 1.0)[1], abs=1e-12)


def test_two_relay_positive_a():
    ch = ChannelDiamond([10.0, 0.1], [1.0, 1.0])
    case = diamond.two_relay_case(ch)
    assert case.A == pytest.approx(110 - 1.3) and case.case == 1
    d1, d2, _ = diamond.two_relay_opt(ch)
    assert d2 == pytest.approx(2.2)
    assert d1 == pytest.approx(35.3 / 3.3)
    assert diamond.delta1_given_delta2(10.0, 0.1, 1.0, 1.0, 2.2) == pytest.approx(35.3 / 3.3)


def test_two_relay_degenerate():
    with pytest.raises(DegenerateGain):
        diamond.two_relay_case(ChannelDiamond([0.0, 1.0], [1.0, 1.0]))


def test_two_relay_against_grid(rng):
    from qmfopt.verify import two_relay_grid_deficit
    h2 = 10 ** rng.uniform(-1, 3, (20, 2))
    g2 = 10 ** rng.uniform(-1, 3, (20, 2))
    assert two_relay_grid_deficit(h2, g2, 150).max() <= 0.01


@given(st.floats(1e-2, 1e2), st.floats(1e-2, 1e2), st.floats(1e-2, 1e2), st.floats(1e-2, 1e2))
def test_two_relay_ties_two_cuts(h1, h2, g1, g2):
    ch = ChannelDiamond([h1, h2], [g1, g2])
    d1, d2, rate = diamond.two_relay_opt(ch)
    cuts = sorted(diamond.cut_value(ch, [d1, d2], om) for om in RelayPartition.all(2))
    assert cuts[1] - cuts[0] <= 1e-6
    assert rate == pytest.approx(max(cuts[0], 0.0), abs=1e-12)


@given(st.floats(1e-2, 1e2), st.floats(1e-2, 1e2))
def test_two_relay_symmetric_consistency(h, g):
    d1, d2, rate = diamond.two_relay_opt(ChannelDiamond([h, h], [g, g]))
    ds, rs = diamond.symmetric_opt(2, h, g)
    assert d1 == pytest.approx(ds, rel=1e-8) and d2 == pytest.approx(ds, rel=1e-8)
    assert rate == pytest.approx(rs, abs=1e-8)


def test_claims_on_random_gains(rng):
    n = 10**4
    h1, h2, g1, g2 = (10 ** rng.uniform(-3, 4, n) for _ in range(4))
    order, dom = claim_violations(h1, h2, g1, g2, rng.uniform(0, 1, n))
    assert not order.any() and not dom.any()


def test_symmetric_examples():
    d, rate = diamond.symmetric_opt(2, 1.0, 1.0)
    assert d == pytest.approx(D_SYM, rel=1e-12) and rate == pytest.approx(0.6401, abs=1e-4)
    d, _ = diamond.symmetric_opt(5, 1.0, 10.0)
    assert 1 + 5 / (1 + d) == pytest.approx(51 * (d / (1 + d)) ** 5, rel=1e-10)
    assert d == pytest.approx(1.3393, abs=1e-4)


def test_symmetric_against_grid(rng):
    grid = np.logspace(-6, 8, 1000)
    for _ in range(100):
        n, h, g = int(rng.integers(2, 9)), 10 ** rng.uniform(-2, 2), 10 ** rng.uniform(-2, 2)
        _, rate = diamond.symmetric_opt(n, h, g)
        assert rate >= diamond.symmetric_rates(n, h, g, grid).min(axis=0).max() - 1e-3


def test_lemma_checks():
    assert diamond.nrelay_lemma_checks(5, 1.0, 10.0).ok
    assert diamond.nrelay_lemma_checks(2, 0.3, 7.0).monotone_crossings


def test_lemma_checks_random(rng):
    for _ in range(100):
        n, h, g = int(rng.integers(2, 9)), 10 ** rng.uniform(-2, 2), 10 ** rng.uniform(-2, 2)
        rep = diamond.nrelay_lemma_checks(n, h, g, grid_points=1500)
        assert rep.ok, rep.violations
        assert not diamond.lemma_violations_batch(n, [h], [g]).any()


def test_decode_set():
    ch = ChannelDiamond([3.0, 0.5], [1.0, 1.0])
    assert diamond.decode_set(ch, 1.0).omega == frozenset({0})
    assert diamond.decode_set(ch, 0.0).omega == frozenset({0, 1})
    assert diamond.decode_set(ch, 1e9).omega == frozenset()


def test_hybrid_rate_collapses():
    ch = ChannelDiamond([1.0, 2.0, 3.0], [2.0, 1.0, 0.5])
    dv = [1.5, 2.0, 0.7]
    assert diamond.hybrid_rate(ch, RelayPartition(frozenset(), 3), dv) == diamond.qmf_rate(ch, dv)
    full = diamond.hybrid_rate(ch, RelayPartition(frozenset({0, 1, 2}), 3), dv)
    assert full == pytest.approx(math.log2(1 + 3.5))


def test_hybrid_rate_dominates(rng):
    for _ in range(1000):
        n = int(rng.integers(2, 5))
        ch = ChannelDiamond(10 ** rng.uniform(-2, 2, n), 10 ** rng.uniform(-2, 2, n))
        dv = 10 ** rng.uniform(-2, 2, n)
        base = diamond.qmf_rate(ch, dv)
        mask = int(rng.integers(1, 1 << n))
        om = RelayPartition(frozenset(i for i in range(n) if mask >> i & 1), n)
        assert diamond.hybrid_rate(ch, om, dv) >= base


def test_relay_guard():
    ch = ChannelDiamond([1.0] * 21, [1.0] * 21)
    with pytest.raises(TooManyRelays):
        diamond.qmf_rate(ch, [1.0] * 21)

"""Static-channel rates and cutset bounds of the single-relay network.

All functions broadcast over array-valued :class:`ChannelSingle` fields and
array-valued distortion / schedule arguments. Rates are in bits/s/Hz.
A distortion of ``math.inf`` means the relay forwards nothing informative
and is handled through the exact limit, never a large stand-in number.
"""

from __future__ import annotations

import numpy as np

from .channel import ChannelSingle

LN2 = np.log(2.0)


def log2p(x):
    """``log2(1 + x)`` accurate for small ``x``."""
    return np.log1p(x) / LN2


def quant_penalty(delta):
    """``log2((1 + delta) / delta)``; zero at ``delta = inf``."""
    delta = np.asarray(delta, dtype=float)
    with np.errstate(divide="ignore"):
        return np.log1p(1.0 / delta) / LN2


def _pos(x):
    return np.maximum(x, 0.0)


def _out(x):
    return float(x) if np.ndim(x) == 0 else x


# --------------------------------------------------------------------------
# Full duplex
# --------------------------------------------------------------------------

def fd_qmf_branches(ch: ChannelSingle, delta):
    """The two mutual-information branches ``(I1, I2)`` of full-duplex QMF."""
    delta = np.asarray(delta, dtype=float)
    i1 = log2p(ch.h2 / (1.0 + delta) + ch.g2_2)
    i2 = log2p(ch.g1_2 + ch.g2_2) - quant_penalty(delta)
    return i1, i2


def fd_qmf_rate(ch: ChannelSingle, delta):
    """Full-duplex QMF rate with Gaussian quantizer distortion ``delta``."""
    i1, i2 = fd_qmf_branches(ch, delta)
    return _out(_pos(np.minimum(i1, i2)))


def fd_df_rate(ch: ChannelSingle):
    """Decode-forward rate, falling back to the direct link when it is better."""
    relayed = np.minimum(log2p(ch.h2), log2p(ch.g1_2 + ch.g2_2))
    return _out(np.maximum(log2p(ch.g2_2), relayed))


def fd_cutset(ch: ChannelSingle):
    """Full-duplex cutset bound with magnitude-aligned relay/source amplitudes."""
    _, g1, g2 = ch.amplitudes
    c1 = log2p(ch.h2 + ch.g2_2)
    c2 = log2p((g1 + g2) ** 2)
    return _out(np.minimum(c1, c2))


def direct_rate(ch: ChannelSingle):
    return _out(log2p(ch.g2_2))


# --------------------------------------------------------------------------
# Half duplex
# --------------------------------------------------------------------------

def hd_qmf_branches(ch: ChannelSingle, delta, f):
    """``(I_hd1, I_hd2)`` for listening fraction ``f`` and distortion ``delta``."""
    delta = np.asarray(delta, dtype=float)
    f = np.asarray(f, dtype=float)
    direct = log2p(ch.g2_2)
    i1 = f * log2p(ch.h2 / (1.0 + delta) + ch.g2_2) + (1.0 - f) * direct
    i2 = (1.0 - f) * log2p(ch.g1_2 + ch.g2_2) + f * (direct - quant_penalty(delta))
    return i1, i2


def hd_qmf_rate(ch: ChannelSingle, delta, f):
    """Half-duplex QMF rate; the quantization penalty is scaled by ``f``."""
    i1, i2 = hd_qmf_branches(ch, delta, f)
    return _out(_pos(np.minimum(i1, i2)))


def hd_ddf_rate(ch: ChannelSingle, f):
    """Dynamic decode-forward rate at listening fraction ``f``."""
    f = np.asarray(f, dtype=float)
    listen = f * log2p(ch.h2)
    forward = (1.0 - f) * log2p(ch.g1_2 + ch.g2_2) + f * log2p(ch.g2_2)
    return _out(np.maximum(log2p(ch.g2_2), np.minimum(listen, forward)))


def hd_ddf_best(ch: ChannelSingle):
    """Best DDF schedule ``(f, rate)`` over ``f in [0, 1]``.

    The relayed rate is the minimum of a line increasing in ``f`` and a
    line decreasing in ``f``, so the optimum is their intersection. When
    the source-relay link is no stronger than the direct link the relay
    cannot help and ``f = 0`` is returned with the direct rate.
    """
    lh = log2p(ch.h2)
    l2 = log2p(ch.g2_2)
    l3 = log2p(ch.g1_2 + ch.g2_2)
    denom = lh + l3 - l2
    with np.errstate(divide="ignore", invalid="ignore"):
        f = np.where(denom > 0.0, l3 / denom, 0.0)
    f = np.clip(f, 0.0, 1.0)
    useful = np.asarray(ch.h2) > np.asarray(ch.g2_2)
    f = np.where(useful, f, 0.0)
    rate = np.where(useful, np.maximum(l2, np.minimum(f * lh, (1.0 - f) * l3 + f * l2)), l2)
    return _out(f), _out(rate)


def hd_cutset_branches(ch: ChannelSingle, f):
    f = np.asarray(f, dtype=float)
    _, g1, g2 = ch.amplitudes
    direct = log2p(ch.g2_2)
    c1 = f * log2p(ch.h2 + ch.g2_2) + (1.0 - f) * direct
    c2 = f * direct + (1.0 - f) * log2p((g1 + g2) ** 2)
    return c1, c2


def hd_cutset(ch: ChannelSingle, f):
    """Half-duplex cutset bound for a given listening fraction."""
    c1, c2 = hd_cutset_branches(ch, f)
    return _out(np.minimum(c1, c2))


def hd_cutset_best_schedule(ch: ChannelSingle):
    """Schedule equalizing the two half-duplex cuts (optimal with global CSI).

    Returns 0.5 for the degenerate channel where both cuts coincide for
    every ``f``.
    """
    _, g1, g2 = ch.amplitudes
    direct = log2p(ch.g2_2)
    num = log2p((g1 + g2) ** 2) - direct
    den = log2p(ch.h2 + ch.g2_2) - direct + num
    with np.errstate(divide="ignore", invalid="ignore"):
        f = np.where(den > 0.0, num / den, 0.5)
    return _out(f)

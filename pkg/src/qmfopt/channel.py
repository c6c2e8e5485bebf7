"""Channel realizations, Rayleigh statistics and reproducible sampling.

All gains are squared magnitudes in linear SNR units (unit noise, unit
transmit power). Sampling uses a Philox counter-based generator: the draw
for link ``k`` of trial ``t`` is word ``t * stride + k`` of the stream keyed
by ``seed``, so any chunking of the trial range reproduces the same values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np


def _check_nonneg(name, value):
    arr = np.asarray(value, dtype=float)
    if not np.all(np.isfinite(arr)) or np.any(arr < 0.0):
        raise ValueError(f"{name} must be finite and non-negative")


@dataclass(frozen=True)
class ChannelSingle:
    """Squared gains of the single-relay network.

    ``h2`` is source->relay, ``g1_2`` relay->destination and ``g2_2``
    source->destination. Fields may be scalars or equally shaped arrays;
    every rate function broadcasts over them.
    """

    h2: float
    g1_2: float
    g2_2: float

    def __post_init__(self):
        for name in ("h2", "g1_2", "g2_2"):
            _check_nonneg(name, getattr(self, name))

    @property
    def amplitudes(self):
        return np.sqrt(self.h2), np.sqrt(self.g1_2), np.sqrt(self.g2_2)


@dataclass(frozen=True)
class ChannelDiamond:
    """Squared gains of an N-relay diamond: ``h2[i]`` into relay i, ``g2[i]`` out of it.

    A 2-D array (trials x relays) is accepted for batch evaluation.
    """

    h2: np.ndarray
    g2: np.ndarray

    def __post_init__(self):
        h2 = np.asarray(self.h2, dtype=float)
        g2 = np.asarray(self.g2, dtype=float)
        if h2.shape != g2.shape or h2.ndim == 0:
            raise ValueError("h2 and g2 must be vectors of equal length")
        _check_nonneg("h2", h2)
        _check_nonneg("g2", g2)
        object.__setattr__(self, "h2", h2)
        object.__setattr__(self, "g2", g2)

    @property
    def n(self) -> int:
        return int(self.h2.shape[-1])


@dataclass(frozen=True)
class FadingParams:
    """Inverse mean squared gains, one per link.

    Three entries ``(rho, lambda1, lambda2)`` describe the single-relay
    network (links h, g1, g2). An even count ``2N`` describes a diamond,
    ordered ``(h_1..h_N, g_1..g_N)``.
    """

    inv_snr: tuple[float, ...]

    def __post_init__(self):
        vals = tuple(float(x) for x in self.inv_snr)
        if not vals or any(not (x > 0.0) or not math.isfinite(x) for x in vals):
            raise ValueError("inverse SNRs must be positive and finite")
        if len(vals) != 3 and len(vals) % 2:
            raise ValueError("expected 3 (single relay) or 2N (diamond) links")
        object.__setattr__(self, "inv_snr", vals)

    @property
    def n_links(self) -> int:
        return len(self.inv_snr)

    @property
    def is_single(self) -> bool:
        return len(self.inv_snr) == 3

    @classmethod
    def from_mean_snr(cls, means) -> "FadingParams":
        return cls(tuple(1.0 / float(m) for m in means))


@dataclass(frozen=True)
class RateSpec:
    """Target rate: either a fixed ``R`` in bits/s/Hz or ``R = r * log2(SNR)``."""

    fixed_rate: float | None = None
    r: float | None = None
    snr_db: tuple[float, ...] = field(default_factory=tuple)

    def __post_init__(self):
        if (self.fixed_rate is None) == (self.r is None):
            raise ValueError("exactly one of fixed_rate and r must be set")
        if self.fixed_rate is not None and self.fixed_rate < 0.0:
            raise ValueError("fixed_rate must be non-negative")
        if self.r is not None and not 0.0 <= self.r <= 1.0:
            raise ValueError("multiplexing gain r must lie in [0, 1]")

    def rate_at(self, snr_db: float) -> float:
        if self.fixed_rate is not None:
            return float(self.fixed_rate)
        return max(self.r * math.log2(10.0 ** (snr_db / 10.0)), 0.0)


def _stride_blocks(n_links: int) -> int:
    return -(-n_links // 4)  # Philox emits 4 words per counter step


def unit_exponentials(seed: int, t0: int, t1: int, n_links: int) -> np.ndarray:
    """Unit-mean exponential draws for trials ``[t0, t1)``, shape ``(t1 - t0, n_links)``."""
    if t0 < 0 or t1 < t0:
        raise ValueError("trial range must satisfy 0 <= t0 <= t1")
    stride = _stride_blocks(n_links)
    bitgen = np.random.Philox(key=[int(seed) & 0xFFFFFFFFFFFFFFFF, 0x514D46])
    if t0:
        bitgen.advance(t0 * stride)
    raw = bitgen.random_raw((t1 - t0) * stride * 4).reshape(t1 - t0, stride * 4)[:, :n_links]
    # 53-bit uniforms on (0, 1]; the offset keeps every draw strictly positive
    u = ((raw >> np.uint64(11)).astype(np.float64) + 0.5) * (1.0 / 9007199254740992.0)
    return -np.log(u)


def sample_batch(params: FadingParams, t0: int, t1: int, seed: int) -> np.ndarray:
    """Squared gains for trials ``[t0, t1)``; column ``k`` has mean ``1 / inv_snr[k]``."""
    scale = 1.0 / np.asarray(params.inv_snr)
    return unit_exponentials(seed, t0, t1, params.n_links) * scale


def sample(params: FadingParams, trial_id: int, seed: int):
    """One realization for ``trial_id``; identical for identical ``(seed, trial_id)``."""
    if trial_id < 0:
        raise ValueError("trial_id must be non-negative")
    x = sample_batch(params, trial_id, trial_id + 1, seed)[0]
    if params.is_single:
        return ChannelSingle(float(x[0]), float(x[1]), float(x[2]))
    n = params.n_links // 2
    return ChannelDiamond(x[:n].copy(), x[n:].copy())

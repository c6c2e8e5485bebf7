"""Quantize-map-forward relaying: rates, quantizer optimizers and outage estimation."""

from .channel import ChannelDiamond, ChannelSingle, FadingParams, RateSpec, sample
from .errors import (DegenerateGain, InvalidCombination, NoSignChange, QmfoptError,
                     RelayLinkAbsent, SignPatternViolation, TooManyRelays)

__version__ = "0.1.0"

__all__ = [
    "ChannelDiamond", "ChannelSingle", "FadingParams", "RateSpec", "sample",
    "DegenerateGain", "InvalidCombination", "NoSignChange", "QmfoptError",
    "RelayLinkAbsent", "SignPatternViolation", "TooManyRelays",
]

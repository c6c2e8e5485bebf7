"""Exception types raised by the optimizers and rate routines."""


class QmfoptError(ValueError):
    """Base class for all package errors."""


class NoSignChange(QmfoptError):
    """Root bracket endpoints do not straddle zero."""


class SignPatternViolation(QmfoptError):
    """Cubic coefficients do not have exactly one sign change."""


class RelayLinkAbsent(QmfoptError):
    """The relay-to-destination gain is zero, so quantizing is pointless."""


class DegenerateGain(QmfoptError):
    """A diamond link gain is zero where the analytic solution needs it positive."""


class TooManyRelays(QmfoptError):
    """Partition enumeration requested beyond the supported relay count."""


class InvalidCombination(QmfoptError):
    """Scheme is not defined for the requested network."""

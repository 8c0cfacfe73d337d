"""Exception hierarchy shared by all modules."""


class SwapSteerError(Exception):
    """Base class for library errors."""


class UsageError(SwapSteerError, ValueError):
    """Invalid arguments: bad indices, out-of-range parameters, wrong shapes."""


class ConfigurationError(SwapSteerError, ValueError):
    """A network or scenario whose parts do not fit together."""


class UnsupportedOracleError(SwapSteerError):
    """The swap-chain oracle was asked to handle mixed sources or POVMs."""


class UnsupportedStateError(SwapSteerError):
    """No witness can be constructed for the state (e.g. it is PPT)."""


class HypothesisViolation(SwapSteerError):
    """A self-testing hypothesis (purity, projectivity) does not hold."""


class VerificationFailure(SwapSteerError):
    """A numerical certification check failed."""

"""Exception types raised across the package."""


class AoiSrpError(Exception):
    """Base class for all package errors."""


class SingularChain(AoiSrpError):
    """The chain has no unique stationary distribution."""


class DegenerateChain(AoiSrpError):
    """A two-state chain with both states absorbing (p01 = p10 = 0)."""


class NotLumpable(AoiSrpError):
    """The matrix is not strongly lumpable under the given partition."""


class ZeroSuccessProbability(AoiSrpError):
    """Delivery probability is zero, so the age of state 1 diverges."""


class UnknownParameter(AoiSrpError, KeyError):
    """A sweep axis does not name a scalar field of the configuration."""

    def __str__(self):
        return Exception.__str__(self)


class ImpossibleObservation(AoiSrpError):
    """The observation has zero predictive probability under the belief."""


class ConfigError(AoiSrpError, ValueError):
    """Invalid configuration value; ``path`` names the offending field."""

    def __init__(self, path, message):
        super().__init__(f"{path}: {message}")
        self.path = path

"""Exception types raised across the package."""


class SzegoLabError(Exception):
    """Base class for all package errors."""


class NearSingular(SzegoLabError, ValueError):
    pass


class NotInGroup(SzegoLabError, ValueError):
    pass


class HorizonExceeded(SzegoLabError, IndexError):
    pass


class DepthUnreliable(SzegoLabError, ArithmeticError):
    pass


class UnmappedWord(SzegoLabError, KeyError):
    pass


class InsufficientCoefficients(SzegoLabError, ValueError):
    pass


class EigensolveFailure(SzegoLabError, RuntimeError):
    pass


class NonRealDiscriminant(SzegoLabError, ValueError):
    pass


class DegenerateSplit(SzegoLabError, ValueError):
    """Singular values of a transfer product are too close to split directions."""


class ConfigError(SzegoLabError, ValueError):
    """Invalid run configuration. ``field`` names the offending key."""

    def __init__(self, field, message):
        self.field = field
        super().__init__(f"{field}: {message}")

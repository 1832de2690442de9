"""Exception types raised across the package."""


class LPError(ValueError):
    """Base class for all domain errors."""


class SpectrumOverflow(LPError):
    pass


class IntervalOutOfWindow(LPError):
    pass


class OverlappingIntervals(LPError):
    pass


class LengthMismatch(LPError):
    pass


class NonpositiveWeight(LPError):
    pass


class ZeroDenominator(LPError):
    pass


class UnknownCatalogEntry(LPError):
    pass


class WindowOverflow(LPError):
    pass


class NonDyadicLength(LPError):
    pass


class CoverageGap(LPError):
    pass


class SignMixed(LPError):
    pass


class PlanMismatch(LPError):
    pass


class PreconditionViolated(LPError):
    pass


class ConfigError(LPError):
    pass

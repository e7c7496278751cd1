"""Exception types shared across the package."""


class KppLabError(Exception):
    """Base class for all package errors."""


class DomainError(KppLabError):
    """An evaluation point lies outside a declared domain."""


class ConfigError(KppLabError):
    """Invalid or inconsistent configuration."""


class NumericalError(KppLabError):
    """A computation produced non-finite or unusable values."""


class ConstructionError(KppLabError):
    """An analytic construction (bump, profile shooting, ...) failed."""


class RejectionError(KppLabError):
    """A requested object provably does not exist (speed below threshold)."""


class MeasurementError(KppLabError):
    """A diagnostic cannot be extracted from the available data."""

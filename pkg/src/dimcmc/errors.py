"""Exception types shared across the package."""


class DimcmcError(Exception):
    """Base class for package errors."""


class ConfigurationError(DimcmcError):
    """A run was requested with settings that violate a named requirement."""


class IntegrityError(DimcmcError):
    """An embedded or regenerated dataset failed its checksum."""


class StateSpaceError(DimcmcError):
    """Exact enumeration refused: the state space is too large."""


class ConvergenceError(DimcmcError):
    """An iterative solver hit its cap. Carries the last iterate."""

    def __init__(self, message, last_iterate=None, diagnostics=None):
        super().__init__(message)
        self.last_iterate = last_iterate
        self.diagnostics = diagnostics or {}


class CoalescenceError(DimcmcError):
    """Coupling from the past did not coalesce within the epoch cap."""


class RouletteCapError(DimcmcError):
    """Roulette truncation exceeded the hard stopping-time cap."""


class DegenerateStoreError(DimcmcError):
    """All resampling weights in the cumulative store are zero or non-finite."""

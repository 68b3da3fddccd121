"""Exception types shared across the package."""


class MmfSecError(Exception):
    """Base class for all package errors."""


class DomainError(MmfSecError, ValueError):
    """An argument lies outside the domain of the operation."""


class DimensionError(MmfSecError, ValueError):
    """Matrix or vector shapes do not agree."""


class ChannelFormatError(MmfSecError, ValueError):
    """A channel file does not conform to the JSON channel format."""


class InfeasibleError(MmfSecError, ValueError):
    """The requested configuration admits no valid solution."""


class ConfigError(MmfSecError, ValueError):
    """A sweep configuration violates its invariants."""

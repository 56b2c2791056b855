"""Exception types shared across the package."""


class DomainError(ValueError):
    """Parameters fall outside the region where the construction is defined."""


class DegeneracyError(ValueError):
    """A matrix that must be invertible is (numerically) singular."""


class ProtocolError(RuntimeError):
    """A quantum-information protocol was asked to do something forbidden."""


class ConfigError(ValueError):
    """Invalid command-line or configuration-file input."""

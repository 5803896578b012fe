"""Exception types shared across the package."""


class CavnetError(Exception):
    """Base class for all package errors."""


class DomainError(CavnetError, ValueError):
    """An argument lies outside the domain of the operation."""


class DegenerateInputError(CavnetError, ValueError):
    """Input is formally valid but carries no usable information (all zeros etc.)."""


class ConfigurationError(CavnetError, ValueError):
    """Inconsistent or unsafe simulation settings."""


class SingularSystemError(CavnetError, ArithmeticError):
    """The linear steady-state system has no unique solution."""


class InsufficientDataError(CavnetError, ValueError):
    """Not enough events or counts to form an estimate."""


class ConvergenceError(CavnetError, RuntimeError):
    """An iterative procedure failed to reach its target."""

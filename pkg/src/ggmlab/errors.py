"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument is outside its documented domain."""


class ValidationError(ValueError):
    """A supplied operator or structure fails a consistency check."""


class PolicyViolation(ValueError):
    """A query does not fit any access option of the active memory policy."""


class BudgetExceeded(RuntimeError):
    """A subroutine attempted more quantum work than its declared budget."""


class SizeError(RuntimeError):
    """Exact enumeration would exceed the configured state cap."""


class ConfigError(ValueError):
    """Malformed CLI or schedule configuration."""

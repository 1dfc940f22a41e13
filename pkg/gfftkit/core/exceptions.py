"""Error types. Every error carries a message and a ``details`` mapping."""

from typing import Any


class GfftError(Exception):
    """Base error; ``details`` holds the offending values for logs."""

    def __init__(self, message: str, details: dict[str, Any] | None = None):
        super().__init__(message)
        self.message = message
        self.details = dict(details or {})


class ConfigurationError(GfftError):
    """Invalid run configuration; ``details["fields"]`` names the fields."""


class InvalidFunctionError(GfftError):
    """A time function or integrand is not finite on the grid."""


class DomainError(GfftError):
    """Argument outside the admissible region (λ, q, t, kernel sign)."""


class RankDeficiencyError(GfftError):
    """Gram-Schmidt seed is linearly dependent on its predecessors."""


class SpaceMismatchError(GfftError):
    """Objects built on different function spaces were combined."""


class DimensionError(GfftError):
    """Inconsistent vector or direction counts."""


class VerificationError(GfftError):
    """An oracle produced no usable value."""

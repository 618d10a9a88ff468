"""Exception types shared across the package."""


class CapExceededError(ValueError):
    """Raised when a dense construction would exceed its qubit-count cap."""


class InvalidStateError(ValueError):
    """Raised when an input fails a normalization, Hermiticity or PSD check."""

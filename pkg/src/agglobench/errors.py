"""Exception types shared across the package."""


class ValidationError(ValueError):
    """Raised when an input violates a documented precondition."""


class IngestionError(ValidationError):
    """Raised when an external file cannot be parsed into points."""

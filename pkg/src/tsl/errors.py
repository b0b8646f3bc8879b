"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument is outside the documented domain of an operation."""


class ConstructionError(RuntimeError):
    """A block does not fit its coefficient interval; never silently truncated."""

"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the physical or mathematical domain."""


class UsageError(ValueError):
    """An operation was called with structurally invalid input."""


class UnresolvedError(RuntimeError):
    """A fringe measurement cannot be resolved from the supplied table."""

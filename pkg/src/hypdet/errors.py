"""Exception types shared across the package."""


class DomainError(ValueError):
    """Input outside the domain of an operation (CLI exit code 1)."""


class BudgetExceededError(DomainError):
    pass


class CutoffExceededError(DomainError):
    """A quantity was requested beyond the cutoff the data is complete to."""


class ResourceLimitError(DomainError):
    pass

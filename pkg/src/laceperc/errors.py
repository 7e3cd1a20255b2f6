"""Shared exception types."""


class ResourceBudgetError(RuntimeError):
    """A requested computation exceeds the desk-scale resource budget."""


class DomainError(ValueError):
    """Input is outside the mathematical domain of the operation."""

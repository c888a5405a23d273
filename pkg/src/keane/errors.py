"""Exception types shared across the package."""

import os

DEFAULT_STEP_BUDGET = 10**7


class DomainError(ValueError):
    """An argument lies outside the domain of an operation."""


class ResourceError(RuntimeError):
    """A configured resource budget would be exceeded."""


class StepBudgetExceeded(ResourceError):
    """An orbit computation needed more map applications than allowed."""

    def __init__(self, needed, budget):
        super().__init__(
            f"step budget exceeded: needed more than {budget} applications"
            f" (at least {needed}); try a smaller level or raise KEANE_STEP_BUDGET"
        )
        self.needed = needed
        self.budget = budget


class DigitBudgetExceeded(ResourceError):
    """An integer parameter grew past the configured number of decimal digits."""

    def __init__(self, digits, budget):
        super().__init__(f"parameter with {digits} digits exceeds the digit budget {budget}")
        self.digits = digits
        self.budget = budget


class PrecisionWarning(UserWarning):
    """An enclosure is too wide to certify the requested quantity well."""


def step_budget(budget=None):
    """Resolve the step budget: explicit value, then env var, then default."""
    if budget is not None:
        return int(budget)
    env = os.environ.get("KEANE_STEP_BUDGET")
    if env:
        return int(env)
    return DEFAULT_STEP_BUDGET

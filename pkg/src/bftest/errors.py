"""Exception types shared across the package."""


class ContractError(ValueError):
    """An argument violates an operation's precondition."""


class DimensionError(ContractError):
    """Operands live in different ambient dimensions."""


class CapacityError(ContractError):
    """An exact computation was requested beyond its feasible size."""


class BudgetExceeded(RuntimeError):
    """A tester asked its oracle for more queries than the budget allows."""


class ModelViolation(RuntimeError):
    """A tester tried to query a point its query model does not expose."""


class GenerationFailure(RuntimeError):
    """A certified far instance could not be produced within the retry limit."""

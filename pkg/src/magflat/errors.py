"""Exception types shared across the package."""


class GraphError(ValueError):
    """Malformed or inconsistent graph input."""


class NumericError(ArithmeticError):
    """A numerical invariant was violated or a solver failed."""


class BudgetError(RuntimeError):
    """A computation would exceed its configured work budget."""

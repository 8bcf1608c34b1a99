"""Exception types mapped to CLI exit codes."""


class InputError(ValueError):
    """Bad user input (exit code 2)."""


class GridRangeError(ValueError):
    """Requested scales/grids outside the resolvable range (exit code 3)."""


class BudgetExhausted(RuntimeError):
    """A search budget ran out before a certified answer (exit code 4)."""


class InternalInvariantError(AssertionError):
    """An internal invariant was breached (exit code 1)."""

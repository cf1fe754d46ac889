"""Exception types shared across the package."""


class NotPositiveDefiniteError(ValueError):
    """A matrix expected to be symmetric positive definite is not."""


class InvariantError(AssertionError):
    """An internal construction invariant was violated."""


class DegenerateInstanceError(ValueError):
    """Ideal and nadir coincide in at least one objective."""


class GenerationError(RuntimeError):
    """Instance generation gave up after exhausting its retry budget."""


class SchemaError(ValueError):
    """A serialized document is malformed or has the wrong schema version."""


class BudgetExhausted(Exception):
    """Raised by the counting evaluator once the evaluation budget is spent.

    Solvers are expected to let it propagate (or catch it and return).
    """


class ResourceLimitError(RuntimeError):
    """A configured resource cap (e.g. number of peak pairs) would be exceeded."""

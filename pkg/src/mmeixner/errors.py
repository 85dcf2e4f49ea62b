class ParameterError(ValueError):
    """Parameters violate a family invariant (range, distinctness, integrality)."""


class DegenerateParametersError(ParameterError):
    """A denominator that the invariants should keep nonzero turned out to be zero."""


class DomainError(ValueError):
    """An evaluator was called outside the set where it is defined."""

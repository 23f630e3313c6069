"""Exception types shared across the toolkit."""


class LgformsError(Exception):
    """Base class for all toolkit errors."""


class BudgetExceededError(LgformsError):
    """An enumeration would exceed the configured configuration budget."""


class NotClosedError(LgformsError):
    """A form failed the closedness consistency check."""


class InvalidQueryError(LgformsError):
    """A query violates a precondition (e.g. mismatched conserved vectors)."""


class DegenerateDenominatorError(LgformsError):
    """The move Dirichlet form vanishes on a function where the exchange
    form does not; signals a failure of irreducible quantification on the
    two-site locale."""


class IllConditionedError(LgformsError):
    """The least-squares system has near-degenerate directions that mix the
    conserved-current coefficients, so the coefficient matrix is not
    determined at the requested tolerance."""

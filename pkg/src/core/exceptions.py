"""Exception hierarchy shared by all services."""


class SparseVarError(Exception):
    """Base class for errors raised by this package."""


class InvalidInputError(SparseVarError, ValueError):
    """An operation's precondition does not hold."""


class UnstableTransitionError(InvalidInputError):
    """The transition matrix has spectral radius >= 1."""


class NumericalFailure(SparseVarError, ArithmeticError):
    """A computation produced non-finite values or failed to make progress."""

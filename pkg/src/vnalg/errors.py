"""Exception hierarchy shared by all vnalg modules."""


class VnalgError(Exception):
    """Base class for all errors raised by this package."""


class NotHermitian(VnalgError):
    """A matrix required to be Hermitian fails the symmetry check."""


class NotNormal(VnalgError):
    """A matrix required to be normal does not commute with its adjoint."""


class NotCommuting(VnalgError):
    """A family required to be pairwise commuting contains a non-commuting pair."""


class NoConvergence(VnalgError):
    """An iterative kernel exhausted its budget without converging."""


class DimensionMismatch(VnalgError):
    """Operands live on spaces of different dimensions."""


class UnknownAtom(VnalgError):
    """A referenced atom is not part of the sample space."""


class UndefinedOnSupport(VnalgError):
    """A function is undefined on an atom carrying a nonzero projection."""


class OutOfDisc(VnalgError):
    """Argument of the inverse disc transform lies on or outside the unit circle."""


class InvariantViolation(VnalgError):
    """A domain value failed its construction-time invariant check.

    The message always names the violated invariant so callers can surface it.
    """


class InfeasibleSpec(VnalgError):
    """A requested random instance cannot exist (e.g. more atoms than dimensions)."""


class SchemaError(VnalgError):
    """An input document does not conform to the expected JSON layout."""

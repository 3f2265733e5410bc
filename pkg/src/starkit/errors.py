"""Exception hierarchy shared by all starkit modules."""


class StarkitError(Exception):
    """Base class for all starkit errors."""


class DegenerateExpr(StarkitError):
    """The expression vanishes on an open set (or an atom is the zero form)."""


class FitFailure(StarkitError):
    """Width samples were zero/non-positive, no decay exponent can be fitted."""


class IrrationalSkeleton(StarkitError):
    """An operation requiring rational slopes met an irrational skeleton line."""


class NonConvergent(StarkitError):
    """Adaptive quadrature failed to reach the requested tolerance."""


class SkeletonMismatch(StarkitError):
    """Two distance functions were expected to share a single skeleton line."""


class PrecisionExhausted(StarkitError):
    """A floating-point value cannot support the requested expansion depth."""


class EmptySequence(StarkitError):
    """The ubiquity scan produced no admissible N (signals a bug; the set is infinite)."""


class NotSignificant(StarkitError):
    """The chosen skeleton line fails the significance test."""


class ParseError(StarkitError):
    """DSL parse failure with position information."""

    def __init__(self, message, line=1, column=0, expected=()):
        super().__init__(f"{message} at line {line}, column {column}")
        self.line = line
        self.column = column
        self.expected = tuple(expected)


class ArityError(StarkitError):
    """A combinator was given no children."""


class DimensionMismatch(StarkitError):
    """Vector/matrix dimensions are inconsistent."""


class NoSolutions(StarkitError):
    """An enumeration found no solutions below the given bound (raise the bound)."""

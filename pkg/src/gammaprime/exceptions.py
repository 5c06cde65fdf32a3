"""Exception types raised by gammaprime."""


class DegenerateTableError(ValueError):
    """A 2x2 table has an empty case or control row, or no counts at all."""


class AlreadyCorrectedError(ValueError):
    """The Haldane-Anscombe correction was requested twice."""


class OutOfRangeError(ValueError):
    """log(OR) lies at or beyond the point where gamma stops increasing."""


class BracketError(ValueError):
    """The target function has no sign change on the bracket."""


class ConvergenceError(RuntimeError):
    """An iterative solver hit its iteration cap."""


class PosteriorUnderflowError(FloatingPointError):
    """Every likelihood term underflowed to zero."""

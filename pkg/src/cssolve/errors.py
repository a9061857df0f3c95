"""Error taxonomy shared by the whole package.

Every failure mode that a caller can reasonably branch on gets its own
class.  Numeric tolerances being missed inside a *report* (an inequality
record, a non-converged solver) is data, not an exception; exceptions are
reserved for contract violations and irrecoverable numeric events.
"""


class InvalidArgumentError(ValueError):
    """An argument violates an operation's stated precondition."""


class MagnitudeOverflowError(FloatingPointError):
    """A sample has u^2 > 700, past the safe range of exp in doubles.

    Raised instead of clamping: a clamped exponential would silently turn
    the critical-growth term into garbage.
    """


class NumericFailureError(RuntimeError):
    """An iterative numeric procedure failed structurally.

    Examples: the shooting bisection cannot bracket the ground state, a
    superposition profile concentrates below the grid resolution.
    """


class OutOfRegimeError(ValueError):
    """A mass parameter lies outside the regime the theory covers (c >= c0)."""


class ReparameterizationFailureError(RuntimeError):
    """Path images collapsed onto each other; arclength reparameterization
    has no monotone parameter left to work with."""


class AdmissibilityError(ValueError):
    """A candidate path violates the admissible-path membership test."""


class TruncationWarning(UserWarning):
    """A series evaluation was truncated outside its comfortable range."""

"""Exception hierarchy shared across the package."""


class BlowupError(Exception):
    """Base class for every error raised by this package."""


class ValidationError(BlowupError, ValueError):
    """A constructor or scenario value violates its documented constraints."""


class GridMismatch(BlowupError, ValueError):
    """A field was combined with a grid it does not live on."""


class NonFiniteState(BlowupError, FloatingPointError):
    """NaN or infinity appeared where a finite field value is required.

    During time stepping this is the blow-up overflow signal; the stepping
    driver catches it and halves the step instead of storing the values.
    """


class ZeroField(BlowupError, ValueError):
    """An operation that needs a nonzero field received the zero field."""


class NonConvergence(BlowupError, RuntimeError):
    """An iterative solver hit its iteration cap above the requested tolerance."""


class InvalidSampleRange(BlowupError, ValueError):
    """Condition-check sampling parameters are unusable (bad u_max or count)."""


class ConditionCViolated(BlowupError, ValueError):
    """The supplied (alpha, beta, gamma) fail the structural source condition."""


class BetaConstraintViolated(ConditionCViolated):
    """beta exceeds (alpha - 2) * lambda0 / 2, so the energy chain breaks."""


class NegativeInitialData(BlowupError, ValueError):
    """Initial data must be nonnegative at every node."""


class InsufficientRecords(BlowupError, ValueError):
    """A trajectory diagnostic needs more recorded samples than available."""


class ParseError(BlowupError, ValueError):
    """A scenario file is syntactically malformed or contains unknown keys."""

"""Exception and warning types shared across the package."""


class EntrolabError(Exception):
    """Base class for all package-specific errors."""


class InvalidSpec(EntrolabError):
    """A distribution/grid/sequence specification violates its invariants."""


class TailTruncation(EntrolabError):
    """A density cannot be contained on the requested grid with decayed tails."""


class DegenerateSupport(EntrolabError):
    """The masked support carries too little probability mass."""


class SuspectedInfinite(EntrolabError):
    """A Fisher-information integral fails to stabilize under grid refinement."""


class NonCenteredInput(EntrolabError):
    """An operation requiring a zero-mean density received a shifted one."""


class SolverFailure(EntrolabError):
    """The eigensolver could not produce a pair meeting its residual bounds."""


class IllConditioned(EntrolabError):
    """The weighted mass matrix is too ill-conditioned at this resolution."""


class PreconditionViolation(EntrolabError):
    """A supplied constant or input violates a stated precondition."""


class ConditionViolation(EntrolabError):
    """A sequence generator fails a condition it implicitly claims."""


class DegenerateDenominator(EntrolabError):
    """A diagnostic ratio has a vanishing denominator (equality case)."""


class IoFailure(EntrolabError):
    """A file could not be read or written."""


class TruncationWarning(UserWarning):
    """An integral was cut off while its integrand was still non-negligible."""

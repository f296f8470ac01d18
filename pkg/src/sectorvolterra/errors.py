"""Exception hierarchy.

Every error carries a short ``code`` (the class name) so the CLI can print a
single machine-parsable line and map it to an exit status.
"""


class VolterraError(Exception):
    """Base class for all solver errors."""

    exit_status = 2

    @property
    def code(self) -> str:
        return type(self).__name__


# -- input validation (exit 2) ------------------------------------------------

class ValidationError(VolterraError):
    exit_status = 2


class BreakpointOrder(ValidationError):
    pass


class NonzeroF0(ValidationError):
    pass


class DegenerateDiagonal(ValidationError):
    pass


class KernelCountMismatch(ValidationError):
    pass


class NoFeasibleN(ValidationError):
    pass


class DegreeCapExceeded(ValidationError):
    pass


class NotDifferentiableAtZero(ValidationError):
    pass


class NonpositiveT(ValidationError):
    pass


class OutOfDomain(ValidationError):
    pass


class ResidualLogTerms(ValidationError):
    pass


class ConstantsArity(ValidationError):
    pass


class ProblemSchemaError(ValidationError):
    pass


# -- iteration failure (exit 3) -----------------------------------------------

class NoConvergence(VolterraError):
    exit_status = 3


# -- internal inconsistency (exit 4) ------------------------------------------

class InternalInconsistency(VolterraError):
    exit_status = 4


class AsymptoticInconsistent(InternalInconsistency):
    pass


class InconsistentSystem(InternalInconsistency):
    pass


class MultiplicityOverflow(InternalInconsistency):
    pass

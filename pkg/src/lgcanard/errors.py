"""Exception hierarchy.

Two families: ``InputError`` for parameters or arguments outside an
operation's domain (CLI exit code 2), and ``NumericalError`` for failures
of a numerical procedure on valid input (CLI exit code 1).
"""


class LGError(Exception):
    """Base class for all package errors."""


class InputError(LGError, ValueError):
    pass


class NumericalError(LGError, ArithmeticError):
    pass


class DomainError(InputError):
    """Argument outside the domain of a formula (log of a nonpositive number etc)."""


class OutOfRange(InputError):
    pass


class WrongSector(InputError):
    """Point not covered by the requested blow-up chart."""


class NotDegenerate(InputError):
    """Operation needs C = -A*M*Q."""


class KindUnavailable(InputError):
    pass


class NondegeneracyViolated(InputError):
    pass


class FoldSingularity(NumericalError):
    pass


class ComplexRoots(NumericalError):
    pass


class BranchFailure(NumericalError):
    pass


class NoRoot(NumericalError):
    pass


class BracketFailure(NumericalError):
    pass


class SingularDenominator(NumericalError):
    pass


class NoConvergence(NumericalError):
    pass


class StepUnderflow(NumericalError):
    pass


class ComplexRadicand(NumericalError):
    pass

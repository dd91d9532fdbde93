"""Typed failures raised across the package.

Each class carries the process exit code the command-line front-end maps it to:
1 for malformed input, 2 for a violated numerical precondition, 3 for
infeasible or boundary states.
"""


class ErgodicError(Exception):
    exit_code = 2


class ParseError(ErgodicError):
    exit_code = 1


class UnknownObservable(ErgodicError):
    exit_code = 1


class NonHermitian(ErgodicError, ValueError):
    pass


class ConvergenceFailure(ErgodicError):
    pass


class DimensionMismatch(ErgodicError, ValueError):
    pass


class NonPositiveHorizon(ErgodicError, ValueError):
    pass


class NonCommuting(ErgodicError, ValueError):
    pass


class SingularGram(ErgodicError):
    pass


class DegenerateTrivial(ErgodicError):
    pass


class NotAProbabilityVector(ErgodicError, ValueError):
    pass


class OutOfRangeDimension(ErgodicError, ValueError):
    pass


class OutOfRange(ErgodicError, ValueError):
    exit_code = 3


class InfeasibleValues(ErgodicError):
    exit_code = 3


class BoundaryState(ErgodicError):
    exit_code = 3

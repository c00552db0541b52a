"""Exception hierarchy. Each class maps to one CLI exit code."""


class DiracLabError(Exception):
    exit_code = 1


class InvalidPotentialError(DiracLabError, ValueError):
    exit_code = 2


class EvaluationRangeError(DiracLabError, ArithmeticError):
    """Scaled evaluation still overflowed, or the request is deeper than the validated range."""

    exit_code = 3

    def __init__(self, message: str, achievable_depth: float | None = None):
        super().__init__(message)
        self.achievable_depth = achievable_depth


class BoundaryZeroError(DiracLabError):
    """A zero of the Jost function sits on a contour even after jittering."""

    exit_code = 4

    def __init__(self, message: str, location: complex | None = None):
        super().__init__(message)
        self.location = location


class TruncationError(DiracLabError):
    exit_code = 3

    def __init__(self, message: str, achieved_bound: float):
        super().__init__(message)
        self.achieved_bound = achieved_bound


class DivergentIntegralError(DiracLabError, ValueError):
    exit_code = 2

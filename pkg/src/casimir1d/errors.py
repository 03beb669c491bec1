"""Exception types raised by the numerical routines."""


class ResonanceError(ZeroDivisionError):
    """A closed form was evaluated exactly on one of its poles."""


class DegeneracyError(ValueError):
    """Parameters sit on a point where a leading coefficient vanishes."""


class DomainError(ValueError):
    """A representation was requested outside its range of validity."""


class BranchError(RuntimeError):
    """Phase unwrapping could not keep consecutive samples within pi/2."""


class ToleranceError(RuntimeError):
    """Requested accuracy was not reached.

    The best available estimate and its error bound are attached so that
    callers can still report them.
    """

    def __init__(self, message, estimate=float("nan"), error=float("inf")):
        super().__init__(message)
        self.estimate = estimate
        self.error = error

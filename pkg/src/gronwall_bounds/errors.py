"""Exception types shared across the package."""


class GronwallError(Exception):
    """Base class for errors raised by :mod:`gronwall_bounds`."""


class ValidationError(GronwallError, ValueError):
    """A hypothesis of a bound or construction fails on the grid.

    ``hypothesis`` names the violated condition, ``index`` and ``value``
    locate the first offending node when there is one.
    """

    def __init__(self, message, hypothesis=None, index=None, value=None):
        super().__init__(message)
        self.hypothesis = hypothesis
        self.index = index
        self.value = value


class EvaluationError(GronwallError, ArithmeticError):
    """A signal or state produced a non-finite value."""

    def __init__(self, message, index=None, time=None):
        super().__init__(message)
        self.index = index
        self.time = time

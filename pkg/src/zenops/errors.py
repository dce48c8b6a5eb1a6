"""Exception hierarchy shared by all zenops modules."""


class ZenopsError(Exception):
    """Base class for all errors raised by this package."""


class ParameterError(ZenopsError, ValueError):
    """An argument is outside its documented range or otherwise invalid.

    The message always names the offending field so command-line
    diagnostics can be produced verbatim.
    """


class ConvergenceFailure(ZenopsError, RuntimeError):
    """A numerical procedure did not converge within its declared budget."""

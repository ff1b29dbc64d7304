"""Exception hierarchy shared by all cprfit modules."""


class CprFitError(ValueError):
    """Base class for data errors raised by cprfit."""


class InvalidSampleError(CprFitError):
    """A sample carries non-finite values or breaks time ordering."""


class RateMismatchError(CprFitError):
    """The observed sampling rate drifts too far from the configured one."""


class EmptyWindowError(CprFitError):
    """An operation that needs samples received an empty window."""


class InsufficientParentsError(CprFitError):
    """Crossover needs at least two individuals."""


class NoPeakError(CprFitError):
    """The spectrum has no usable peak (e.g. a constant window)."""


class EmptyReportError(CprFitError):
    """No aligned prediction carries a reference value."""

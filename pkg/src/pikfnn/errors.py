"""Exception and warning types shared across the package."""


class PikfnnError(Exception):
    """Base class for all errors raised by this package."""


class SingularEvaluationError(PikfnnError, ValueError):
    """A field point coincides with a source point or one of its images.

    ``index`` holds the position of the first offending evaluation in the
    broadcast input (a tuple), or ``None`` when not known.
    """

    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


class DomainError(PikfnnError, ValueError):
    """An argument lies outside the domain where a formula is defined."""


class OptimizerError(PikfnnError, RuntimeError):
    """The Levenberg-Marquardt iteration could not make progress."""

    def __init__(self, message, iteration=None):
        super().__init__(message)
        self.iteration = iteration


class UndefinedMetricError(PikfnnError, ValueError):
    """A metric was requested for input where it is not defined."""


class SeriesNotConvergedWarning(RuntimeWarning):
    """The shallow-water image series hit ``chi_max`` before meeting ``eps_rel``."""

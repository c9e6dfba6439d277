import constants


class ShrinkregError(Exception):
    """
    Base class for every failure raised by the estimator library.
    Each subclass carries the process exit code the CLI maps it to.
    """
    exit_code = constants.EXIT_NUMERICAL


# -- Validation --
class DataValidationError(ShrinkregError):
    """
    Input that can never be fitted: empty or non-finite samples, malformed CSV,
    unknown dataset names, too few observations for the number of carriers.
    """
    exit_code = constants.EXIT_VALIDATION


# -- Numerical --
class NumericalError(ShrinkregError):
    """
    Input that is well formed but on which a numerical stage breaks down.
    """
    exit_code = constants.EXIT_NUMERICAL


class NotPositiveDefiniteError(NumericalError):
    def __init__(self, pivot, value=None):
        self.pivot = pivot
        self.value = value
        super().__init__(f"matrix not positive definite (pivot {pivot})")


class DegenerateScatterError(NumericalError):
    def __init__(self, message="degenerate scatter"):
        super().__init__(message)


class CollinearCarriersError(NumericalError):
    def __init__(self, message="collinear carriers"):
        super().__init__(message)


class OverTrimmingError(NumericalError):
    def __init__(self, retained, required, stage):
        self.retained = retained
        self.required = required
        self.stage = stage
        super().__init__(
            f"over-trimming: {stage} stage retained {retained} observations, at least {required} required"
        )

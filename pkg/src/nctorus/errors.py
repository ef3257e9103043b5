"""Exception hierarchy.

Validation problems (bad input, refused preconditions) and numerical problems
(solver trouble, precision shortfalls) are kept apart so the command line can
map them to different exit codes.
"""


class NcToriError(Exception):
    pass


class ValidationError(NcToriError):
    """Input or precondition rejected before any numerics ran."""


class ConfigurationError(ValidationError):
    pass


class DomainError(ValidationError):
    """A spectral parameter or contour lies outside the admissible region."""


class NumericalError(NcToriError):
    pass


class NotInvertibleError(NumericalError):
    def __init__(self, message, condition=None, path=None):
        super().__init__(message)
        self.condition = condition
        self.path = path


class TruncationError(NumericalError):
    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class NearSpectrumError(NumericalError):
    def __init__(self, message, distance=None):
        super().__init__(message)
        self.distance = distance


class PrecisionError(NumericalError):
    def __init__(self, message, estimate=None):
        super().__init__(message)
        self.estimate = estimate

"""Exception hierarchy.

Argument and configuration problems derive from ``ValueError``; numerical
failures derive from :class:`NumericalError` so the CLI can map them to a
distinct exit status.
"""


class TfrwError(Exception):
    """Base class for every error raised by this package."""


class InvalidArgumentError(TfrwError, ValueError):
    pass


class ConfigurationError(TfrwError, ValueError):
    pass


class InvalidRangeError(InvalidArgumentError):
    pass


class NumericalError(TfrwError, ArithmeticError):
    pass


class DegenerateStateError(NumericalError):
    """A wavefunction has zero norm (e.g. total suppression by a kernel)."""


class NoDetectionError(DegenerateStateError):
    """The post-selected detection branch is empty."""


class QuadratureError(NumericalError):
    def __init__(self, message, achieved=None):
        super().__init__(message)
        self.achieved = achieved


class MultimodalError(NumericalError):
    def __init__(self, message, brackets=()):
        super().__init__(message)
        self.brackets = list(brackets)


class SupportTruncationError(NumericalError):
    def __init__(self, message, lost_mass):
        super().__init__(message)
        self.lost_mass = lost_mass


class SingularityError(NumericalError):
    pass


class CollapseError(SingularityError):
    def __init__(self, message, step):
        super().__init__(message)
        self.step = step

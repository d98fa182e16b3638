"""
Exceptions
==========

Error hierarchy shared by the library and the command line.
"""

from typing import Optional


class FotuneError(Exception):
    """Base class for all fotune errors."""


class InvalidSequenceError(FotuneError, ValueError):
    """A sequence or transfer function violates its construction invariants."""


class SampleTimeMismatchError(FotuneError, ValueError):
    """Two sequences with different sampling times were combined."""


class DiscretizationError(FotuneError, ArithmeticError):
    """The bilinear mapping produced a zero leading denominator coefficient."""


class SingularityError(FotuneError, ArithmeticError):
    """
    The leading coefficient of a lower-triangular Toeplitz system is (near) zero.

    Attributes:
        leading_value (float): Offending leading coefficient
        threshold (float): Guard threshold it was tested against
    """

    def __init__(self, message: str, leading_value: float, threshold: float):
        super().__init__(message)
        self.leading_value = leading_value
        self.threshold = threshold


class ControllerNotInvertibleError(SingularityError):
    """The controller impulse response has a (near) zero leading value."""


class AlgebraicLoopError(FotuneError, ArithmeticError):
    """The feedback loop is ill-posed: 1 + p_0 c_0 = 0."""


class NonFiniteError(FotuneError, ArithmeticError):
    """A solve overflowed or produced NaN over the horizon."""


class DataInvalidError(FotuneError, ValueError):
    """Recorded data violates the assumptions of the fictitious reference."""


class ConfigError(FotuneError, ValueError):
    """A configuration file or option is malformed."""


class OptimizerError(FotuneError, RuntimeError):
    """
    The optimizer could not complete.

    Attributes:
        trace: Partial optimization trace, if any
    """

    def __init__(self, message: str, trace: Optional[object] = None):
        super().__init__(message)
        self.trace = trace


class InvalidParameterError(FotuneError, ValueError):
    """A controller or approximation parameter is outside its admissible range."""

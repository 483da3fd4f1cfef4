"""
Typed errors raised by the simulation engine and the experiment front end
"""


class EsrError(Exception):
    """Base class for every error raised by this project"""


class DimensionMismatchError(EsrError, ValueError):
    """Operands live on Hilbert spaces of different dimension"""


class NonHermitianError(EsrError, ValueError):
    """An operator that must be self-adjoint is not, within tolerance"""


class UnknownEigenvalueError(EsrError, ValueError):
    """An outcome value does not belong to the observable's spectrum"""


class DetectionRangeError(EsrError, ValueError):
    """A detection model produced a value outside [0, 1]"""


class MissingDetectionEntryError(EsrError, KeyError):
    """A table-driven detection model has no entry for the requested key"""

    def __str__(self):
        # KeyError quotes its argument; keep the message readable
        return str(self.args[0]) if self.args else ""


class UndefinedDetectionError(EsrError, ValueError):
    """
    The detection probability of a property is conditioned on an event of
    zero quantum probability and has no unique value
    """


class ZeroTotalDetectionError(EsrError, ValueError):
    """A proper mixture has zero overall detection probability for a property"""


class NoRegistrationOutcomeError(EsrError, ValueError):
    """The outcome set contains the no-registration outcome where it is not admissible"""


class InvalidStateError(EsrError, ValueError):
    """A state could not be constructed from the given data"""


class ZeroProbabilityOutcomeError(EsrError, ValueError):
    """A state update was requested for an outcome that cannot occur"""


class NumericalIntegrityError(EsrError, ArithmeticError):
    """A computed probability left [0, 1] by more than the allowed slack"""


class ParameterRangeError(EsrError, ValueError):
    """A scenario parameter is outside its admissible range"""


class ConfigError(EsrError, ValueError):
    """
    The experiment configuration is malformed

    Parameters:
    - message: Human readable diagnostic
    - field: Dotted path of the offending field (optional)
    """

    def __init__(self, message, field=None):
        self.field = field
        if field:
            message = f"{field}: {message}"
        super().__init__(message)


class UnresolvedReferenceError(ConfigError):
    """A config entry names an observable or state that is not defined"""

"""Exception hierarchy.

The CLI maps these onto exit codes: validation problems exit with 3,
numerical failures with 4.
"""


class DPDAError(Exception):
    """Base class for every error raised by the package."""


class ValidationError(DPDAError, ValueError):
    """Input violates a documented invariant or precondition."""


class DimensionMismatchError(ValidationError):
    def __init__(self, message, offending=()):
        super().__init__(message)
        self.offending = tuple(offending)


class EmptyGroupError(ValidationError):
    pass


class NonFiniteError(ValidationError):
    pass


class PreconditionError(ValidationError):
    pass


class DataFormatError(ValidationError):
    """Malformed CSV/IDX/JSON input."""

    def __init__(self, message, row=None):
        super().__init__(message)
        self.row = row


class NumericalError(DPDAError, ArithmeticError):
    """Singular systems, diverging optimisation, non-finite gradients."""


class SingularSystemError(NumericalError):
    pass


class DivergenceError(NumericalError):
    pass

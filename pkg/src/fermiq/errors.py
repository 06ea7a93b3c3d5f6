"""Exception hierarchy shared by the library and the command line.

Every error carries the ``error_type`` reported in the JSON error document and
the process exit code the CLI uses for it.
"""


class FermiqError(Exception):
    """Base class for all fermiq failures."""

    error_type = "server_error"
    exit_code = 2


class SizeError(FermiqError, ValueError):
    error_type = "size_error"


class ModeIndexError(FermiqError, IndexError):
    error_type = "index_error"


class ValidationError(FermiqError, ValueError):
    error_type = "validation_error"


class ShapeError(FermiqError, ValueError):
    error_type = "shape_error"


class MeasurementError(FermiqError, ValueError):
    error_type = "measurement_error"


class PreconditionError(FermiqError, ValueError):
    error_type = "precondition_error"


class CapabilityError(FermiqError):
    """The request is well formed but outside what the implementation supports."""

    error_type = "capability_error"


class StateSpecError(FermiqError, ValueError):
    error_type = "invalid_request_error"


class IntegrationError(FermiqError, ArithmeticError):
    """Time integration left the admissible region (trace drift, lost positivity)."""

    error_type = "numerical_error"
    exit_code = 3

    def __init__(self, message: str, time: float | None = None):
        super().__init__(message)
        self.time = time


def error_document(message: str, error_type: str = "server_error") -> dict:
    """Create an error body in the ``{"error": {...}}`` format."""
    return {"error": {"message": message, "type": error_type}}

from __future__ import annotations


class TwirlError(RuntimeError):
    """Base error. `code` doubles as the CLI exit status."""

    code = 1
    name = "twirl_error"

    def to_dict(self) -> dict:
        return {"error": self.name, "code": self.code, "message": str(self)}


class DimensionError(TwirlError):
    code = 3
    name = "dimension_mismatch"


class NotUnitaryError(TwirlError):
    code = 4
    name = "not_unitary"


class InvalidStateError(TwirlError):
    code = 5
    name = "invalid_state"


class ResourceGuardError(TwirlError):
    code = 6
    name = "resource_guard"


class InvalidParameterError(TwirlError):
    code = 7
    name = "invalid_parameter"


class MatrixFormatError(TwirlError):
    code = 8
    name = "matrix_format"


class NonCommutingError(TwirlError):
    code = 9
    name = "non_commuting_generators"

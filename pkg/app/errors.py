# errors.py

from typing import Any, Dict


class Dilat3rError(Exception):
    """Base class; exit_code is what the command line returns for it"""
    exit_code = 2

    def __init__(self, message: str, **details: Any):
        super().__init__(message)
        self.message = message
        self.details = details

    def to_dict(self) -> Dict[str, Any]:
        return {
            "error": type(self).__name__,
            "message": self.message,
            "exit_code": self.exit_code,
            **{k: v for k, v in self.details.items()},
        }


# exit 1: files, parsing, shapes

class InputError(Dilat3rError):
    exit_code = 1


class DimensionMismatch(InputError):
    pass


# exit 2: mathematical validation

class ValidationError(Dilat3rError):
    exit_code = 2


class ConfigError(ValidationError):
    pass


class NotHermitian(ValidationError):
    pass


class NotPSD(ValidationError):
    pass


class ZeroOperator(ValidationError):
    pass


class NotRowContraction(ValidationError):
    pass


class AmbiguousSupport(ValidationError):
    pass


class NotAPartition(ValidationError):
    pass


class NotStabilizing(ValidationError):
    def __init__(self, message: str, op: int, block: int, **details: Any):
        super().__init__(message, op=op, block=block, **details)
        self.op = op
        self.block = block


class AnnihilatedBlock(ValidationError):
    def __init__(self, message: str, block: int, **details: Any):
        super().__init__(message, block=block, **details)
        self.block = block


class NormalizationFailed(ValidationError):
    pass


class NonCommutingFamilies(ValidationError):
    pass


class LemmaViolation(ValidationError):
    pass


class VerificationFailed(ValidationError):
    pass


class SpanMismatch(ValidationError):
    pass


class InvalidPartition(ValidationError):
    pass


# exit 3: resource caps

class ResourceCapError(Dilat3rError):
    exit_code = 3


class DepthOverflow(ResourceCapError):
    pass


class TooManyBlocks(ResourceCapError):
    pass

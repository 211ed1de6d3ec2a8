"""Exception hierarchy shared by every pipeline stage.

Each error carries a machine-readable ``code`` (its class name unless
overridden) and a ``context`` dict, so the CLI and the HTTP service can emit
structured ``{code, message, context}`` payloads.
"""

from __future__ import annotations


class StereoforgeError(Exception):
    """Base class for all domain errors."""

    code = "StereoforgeError"

    def __init__(self, message: str, **context):
        super().__init__(message)
        self.message = message
        self.context = context

    def as_dict(self) -> dict:
        return {
            "code": self.code,
            "message": self.message,
            "context": {k: _jsonable(v) for k, v in self.context.items()},
        }


def _jsonable(value):
    if isinstance(value, (str, int, float, bool)) or value is None:
        return value
    return str(value)


class MissingManifest(StereoforgeError):
    code = "MissingManifest"


class FrameCountMismatch(StereoforgeError):
    code = "FrameCountMismatch"


class DimensionMismatch(StereoforgeError):
    code = "DimensionMismatch"


class DecodeError(StereoforgeError):
    code = "DecodeError"


class IoError(StereoforgeError):
    code = "IoError"


class NonPositiveDepth(StereoforgeError):
    code = "NonPositiveDepth"


class InvalidConfig(StereoforgeError):
    code = "InvalidConfig"


class InvalidRange(StereoforgeError):
    code = "InvalidRange"


class InvalidRecipe(StereoforgeError):
    code = "InvalidRecipe"


class NoOverlap(StereoforgeError):
    code = "NoOverlap"


class FullyMaskedFrame(StereoforgeError):
    code = "FullyMaskedFrame"


class BackendFailed(StereoforgeError):
    code = "BackendFailed"


class OutputMismatch(StereoforgeError):
    code = "OutputMismatch"


class BackendTimeout(StereoforgeError):
    code = "Timeout"


class EmptyMask(StereoforgeError):
    code = "EmptyMask"


class TooSmall(StereoforgeError):
    code = "TooSmall"


class SingleFrame(StereoforgeError):
    code = "SingleFrame"

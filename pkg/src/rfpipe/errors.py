"""Exception hierarchy with stable machine-readable error codes.

Every domain error carries a unique ``code`` string so the CLI can emit a
single parsable ``CODE: message`` line on stderr and exit 1.
"""


class RFPipeError(Exception):
    """Base class for all domain errors raised by this package."""

    code = "E_GENERIC"

    def __init__(self, message: str, offset: int | None = None):
        if offset is not None:
            message = f"{message} (byte offset {offset})"
        super().__init__(message)
        self.offset = offset


class BadMagicError(RFPipeError):
    code = "E_BAD_MAGIC"


class UnsupportedVersionError(RFPipeError):
    code = "E_UNSUPPORTED_VERSION"


class TruncatedPayloadError(RFPipeError):
    code = "E_TRUNCATED_PAYLOAD"


class NonFiniteDataError(RFPipeError):
    code = "E_NON_FINITE"


class InvalidFrameError(RFPipeError):
    """A frame header or tensor violates the container invariants."""

    code = "E_INVALID_FRAME"


class SchemaError(RFPipeError):
    """A JSON config has a missing, unknown, or wrongly typed field."""

    code = "E_SCHEMA"


class GeometryError(RFPipeError):
    """Phantom geometry is inconsistent (cyst or target outside extent)."""

    code = "E_GEOMETRY"


class AllZeroFrameError(RFPipeError):
    code = "E_ALL_ZERO"


class ConstantFrameError(RFPipeError):
    code = "E_CONSTANT"


class EmptyDatasetError(RFPipeError):
    code = "E_EMPTY_DATASET"


class ConstantDatasetError(RFPipeError):
    code = "E_CONSTANT_DATASET"


class AliasingError(RFPipeError):
    code = "E_ALIASING"


class EmptySpanError(RFPipeError):
    code = "E_EMPTY_SPAN"


class DimensionMismatchError(RFPipeError):
    code = "E_DIM_MISMATCH"


class GridOutOfRangeError(RFPipeError):
    code = "E_GRID_RANGE"


class IndexOutOfRangeError(RFPipeError):
    code = "E_INDEX_RANGE"


class ZeroDenominatorError(RFPipeError):
    code = "E_ZERO_DENOM"


class RegionError(RFPipeError):
    code = "E_REGION"


class ManifestError(RFPipeError):
    code = "E_MANIFEST"

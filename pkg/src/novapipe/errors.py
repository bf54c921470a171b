"""Exception types shared across the pipeline.

Every error the library raises derives from NovapipeError so callers can
catch the whole family. Validation problems that are *reported* rather than
raised (preflight issues, input-field errors) live in their own modules.
"""

from __future__ import annotations


class NovapipeError(Exception):
    """Base class for all library errors."""

    code = "Error"

    def __str__(self) -> str:  # pragma: no cover - cosmetic
        msg = super().__str__()
        return f"{self.code}: {msg}" if msg else self.code


# --- data intake -----------------------------------------------------------

class CsvError(NovapipeError):
    pass


class EmptyInputError(CsvError):
    code = "EmptyInput"


class RaggedRowError(CsvError):
    code = "RaggedRow"

    def __init__(self, row_index: int, expected: int, got: int):
        super().__init__(f"row {row_index} has {got} cells, header has {expected}")
        self.row_index = row_index


class DuplicateColumnError(CsvError):
    code = "DuplicateColumn"

    def __init__(self, name: str):
        super().__init__(name)
        self.name = name


class EmptyColumnNameError(CsvError):
    code = "EmptyColumnName"


class InvalidEncodingError(CsvError):
    code = "InvalidEncoding"


class UnknownColumnError(NovapipeError):
    code = "UnknownColumn"

    def __init__(self, name: str):
        super().__init__(name)
        self.name = name


# --- features / training ---------------------------------------------------

class SingleClassError(NovapipeError):
    code = "SingleClass"


class ClassTooSmallError(NovapipeError):
    code = "ClassTooSmall"

    def __init__(self, label: str, count: int):
        super().__init__(f"class {label!r} has {count} rows, need at least 3")
        self.label = label
        self.count = count


class EmptyCorpusError(NovapipeError):
    code = "EmptyCorpus"


class ShapeMismatchError(NovapipeError):
    code = "ShapeMismatch"


class UnknownBackendError(NovapipeError):
    code = "UnknownBackend"

    def __init__(self, backend_id: str):
        super().__init__(backend_id)
        self.backend_id = backend_id


class NonFiniteLossError(NovapipeError):
    code = "NonFiniteLoss"


# --- cascade ----------------------------------------------------------------

class EmptyStageError(NovapipeError):
    code = "EmptyStage"


class OutOfRangeProbabilityError(NovapipeError):
    code = "OutOfRangeProbability"


# --- evaluation -------------------------------------------------------------

class LengthMismatchError(NovapipeError):
    code = "LengthMismatch"


class UnknownLabelError(NovapipeError):
    code = "UnknownLabel"

    def __init__(self, label: str):
        super().__init__(repr(label))
        self.label = label


class NotACascadeError(NovapipeError):
    code = "NotACascade"


# --- model contract ---------------------------------------------------------

class IoFailureError(NovapipeError):
    code = "IoFailure"


class InconsistentPairError(NovapipeError):
    code = "InconsistentPair"


class ChecksumMismatchError(NovapipeError):
    code = "ChecksumMismatch"


class UnsupportedVersionError(NovapipeError):
    code = "UnsupportedVersion"

    def __init__(self, version):
        super().__init__(f"artifact_version {version}")
        self.version = version


class CorruptArtifactError(NovapipeError):
    code = "CorruptArtifact"


class MissingInputError(NovapipeError):
    code = "MissingInput"

    def __init__(self, name: str):
        super().__init__(name)
        self.name = name


class UnknownInputError(NovapipeError):
    code = "UnknownInput"

    def __init__(self, name: str):
        super().__init__(name)
        self.name = name


# --- guidance ----------------------------------------------------------------

class UnknownMetricError(NovapipeError):
    code = "UnknownMetric"


class InvalidValueError(NovapipeError):
    code = "InvalidValue"


class InconsistentContextError(NovapipeError):
    code = "InconsistentContext"


# --- service ------------------------------------------------------------------

class PreflightFailedError(NovapipeError):
    code = "PreflightFailed"

    def __init__(self, issues):
        super().__init__(", ".join(i.code for i in issues))
        self.issues = list(issues)


class UnknownDatasetError(NovapipeError):
    code = "UnknownDataset"


class UnknownJobError(NovapipeError):
    code = "UnknownJob"


class UnknownModelError(NovapipeError):
    code = "UnknownModel"


class ConfigError(NovapipeError):
    code = "InvalidConfig"

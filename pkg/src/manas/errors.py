"""Exception hierarchy.

Every error raised by the pipeline derives from :class:`ManasError`.  Data and
validation problems derive from :class:`DataError`; the CLI maps those to exit
code 2.  ``stage`` is filled in by the experiment harness so callers can tell
which pipeline stage failed.
"""


class ManasError(Exception):
    stage: str | None = None

    def __str__(self) -> str:
        msg = super().__str__()
        if self.stage:
            return f"[{self.stage}] {msg}"
        return msg


class DataError(ManasError):
    """Bad input data, bad parameters or a corrupt artifact."""


# corpus
class MissingFile(DataError, FileNotFoundError):
    pass


class MissingColumn(DataError):
    def __init__(self, column: str):
        super().__init__(f"required column {column!r} not found in header")
        self.column = column


class InvalidLabel(DataError):
    def __init__(self, raw: str, row: int | None = None):
        where = f"row {row}: " if row is not None else ""
        super().__init__(f"{where}invalid status label {raw!r} (expected yes/no)")
        self.raw = raw
        self.row = row


class EmptyCorpus(DataError):
    pass


class DegenerateSplit(DataError):
    pass


class InvalidParameter(DataError, ValueError):
    pass


# vectorize
class EmptyVocabulary(DataError):
    pass


# classical
class SingleClassTraining(DataError):
    pass


class InsufficientData(DataError):
    pass


class DimensionMismatch(DataError, ValueError):
    pass


# neural
class ReservedIdCollision(DataError):
    pass


class EmptyBatch(DataError):
    pass


class IndexOutOfVocabulary(DataError, IndexError):
    pass


class SequenceTooLong(DataError):
    pass


class ShapeMismatch(DataError, ValueError):
    pass


class EmptyTrainSet(DataError):
    pass


# metrics
class LengthMismatch(DataError, ValueError):
    pass


class InvalidLabelValue(DataError, ValueError):
    pass


class ProbabilityOutOfRange(DataError, ValueError):
    pass


# persistence
class UnsupportedVersion(DataError):
    pass


class CorruptModelFile(DataError):
    pass

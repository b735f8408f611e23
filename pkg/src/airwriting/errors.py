"""Exception types shared across the pipeline.

The CLI maps these to exit codes: usage errors exit 1, ``DataError``
subclasses exit 2, ``NumericError`` subclasses exit 3.
"""


class AirwritingError(Exception):
    """Base class for all pipeline errors."""


class DataError(AirwritingError):
    """A dataset, file, or schema problem."""


class NumericError(AirwritingError):
    """A numeric failure during computation."""


# -- dataset / manifest ------------------------------------------------------

class ParseError(DataError):
    pass


class SchemaViolation(DataError):
    pass


class MissingFile(DataError):
    pass


class CorruptFile(DataError):
    pass


class NonFiniteData(DataError):
    pass


class EmptyDataset(DataError):
    pass


class IoError(DataError):
    pass


# -- resampling / features ---------------------------------------------------

class DegenerateSignal(DataError):
    pass


class InsufficientPoints(DataError):
    pass


class OutOfDomain(DataError):
    pass


class SignalTooShort(DataError):
    pass


# -- splits / training -------------------------------------------------------

class TooFewSubjects(DataError):
    pass


class IncompatibleRepetitionCount(DataError):
    pass


class DegenerateLabels(DataError):
    pass


class DimensionMismatch(DataError):
    pass


class LengthMismatch(DataError):
    pass


class NonFiniteLoss(NumericError):
    pass


# -- metrics / statistics ----------------------------------------------------

class NoErrors(DataError):
    """Confusable-pair analysis on a confusion matrix with no errors."""


class DegenerateGroups(NumericError):
    """ANOVA groups with zero within-variance and zero between-variance."""


class ZeroVariance(NumericError):
    """t-test on samples whose differences are all zero ("no evidence")."""


# -- tensor files ------------------------------------------------------------

class BadMagic(DataError):
    pass


class TruncatedPayload(DataError):
    pass


class MissingTensors(DataError):
    pass


class PartialFailure(DataError):
    """One or more trials failed during batch processing.

    Aborts the run; no output is written on a partial failure.
    """

    def __init__(self, failures):
        self.failures = list(failures)
        detail = "; ".join(f"{key}: {err}" for key, err in self.failures)
        super().__init__(f"{len(self.failures)} trial(s) failed: {detail}")

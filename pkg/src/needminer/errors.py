"""Domain error hierarchy.

Every error raised by the pipeline derives from NeedminerError so the
CLI can map any domain failure to exit code 1 while usage errors stay
on the argparse path (exit code 2).
"""


class NeedminerError(Exception):
    """Base class for all pipeline domain errors."""


# corpus
class MalformedLine(NeedminerError):
    """A record line could not be parsed or violates field constraints."""


class MissingField(NeedminerError):
    """A record is missing its id or text."""


class EmptyText(NeedminerError):
    """A record's text is empty after whitespace trimming."""


class IoError(NeedminerError):
    """An input file could not be read or an output file written."""


# labeling
class DuplicateVote(NeedminerError):
    """The labeler already voted on this item."""


class ItemComplete(NeedminerError):
    """The item already holds its full vote count."""


class UnknownItem(NeedminerError):
    """Vote submitted for an item id that is not in the session."""


# textproc
class EmptyVocabulary(NeedminerError):
    """No tokens survived preprocessing across all training records."""


# sampling
class EmptyDataset(NeedminerError):
    """No usable instances remain after verdict filtering."""


class ClassTooSmall(NeedminerError):
    """A class has fewer than 2 instances; stratified split impossible."""


class MinorityTooSmall(NeedminerError):
    """SMOTE needs at least 2 minority training instances."""


# classify
class SingleClassTraining(NeedminerError):
    """Training data contains only one class."""


class InvalidHyperparameter(NeedminerError):
    """Unknown hyperparameter key or out-of-range value."""


class DimensionMismatch(NeedminerError):
    """Feature vector length does not match the model vocabulary."""


class VersionMismatch(NeedminerError):
    """Model file was written by a newer format version."""


class CorruptModel(NeedminerError):
    """Model file is truncated or structurally invalid."""


# evaluate
class LengthMismatch(NeedminerError):
    """Prediction and truth sequences differ in length."""


class Empty(NeedminerError):
    """Metric input is empty."""


class SingleClassTruth(NeedminerError):
    """ROC needs both classes present in the truth labels."""


class AllDegenerate(NeedminerError):
    """Every candidate row is a single-class predictor."""


# cli / config
class ConfigError(NeedminerError):
    """Run configuration is missing, unreadable, or inconsistent."""

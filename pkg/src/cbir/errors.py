"""Exception types raised by the retrieval engine."""


class CbirError(Exception):
    """Base class for all engine errors."""


class EmptyCorpus(CbirError):
    """No class in the corpus has at least two usable images."""


class UnreadableDirectory(CbirError):
    """Corpus root is missing or cannot be listed."""


class DecodeError(CbirError):
    """An image file could not be decoded."""


class ClassTooSmall(CbirError):
    """A class has fewer than two images, so it cannot be split."""


class LengthMismatch(CbirError):
    """Distance requested between vectors of different lengths."""


class DegenerateClass(CbirError):
    """Training features carry no information (all vectors identical)."""


class DimensionMismatch(CbirError):
    """Feature vector does not match the dimensionality a model expects."""


class EmptyCandidatePool(CbirError):
    """A query produced no candidates to rank."""


class NoRelevant(CbirError):
    """Precision-recall requested with an empty relevant set."""


class FormatVersionMismatch(CbirError):
    """Database file was written by an incompatible format version."""


class ChecksumMismatch(CbirError):
    """Database file is corrupt or truncated."""


class DatabaseLocked(CbirError):
    """Another process holds the database write lock."""

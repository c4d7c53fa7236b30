"""Exception hierarchy for the entrain package.

Every error raised by the library derives from :class:`EntrainError`, so
callers that want blanket fault isolation (the study pipeline does) can catch
one type.
"""


class EntrainError(Exception):
    """Base class for all entrain errors."""


# --- audio decoding ---------------------------------------------------------

class MalformedHeader(EntrainError):
    """File is not a parseable RIFF/WAVE container."""


class UnsupportedEncoding(EntrainError):
    """WAV codec, bit depth or sample rate outside the supported set."""


class EmptyAudio(EntrainError):
    """Audio file contains zero samples."""


# --- frame-level analysis ---------------------------------------------------

class AudioTooShort(EntrainError):
    """Signal shorter than one analysis frame."""


class InvalidConfig(EntrainError):
    """Frame/pitch configuration inconsistent with the signal."""


class MismatchedTracks(EntrainError):
    """Frame tracks do not share framing (length or timestamps)."""


# --- preprocessing ----------------------------------------------------------

class DegenerateDistribution(EntrainError):
    """Too few points or zero variance; z-scores undefined."""


class EmptyInput(EntrainError):
    """Operation requires at least one data point."""


# --- entrainment metrics ----------------------------------------------------

class GridMismatch(EntrainError):
    """Tracks live on different time grids or carry different features."""


class DegenerateSeries(EntrainError):
    """Constant series or too few samples for a correlation."""


class InsufficientOverlap(EntrainError):
    """Lag shift leaves fewer than three overlapping samples."""


class OutOfOrderPoint(EntrainError):
    """Streaming point arrived with a timestamp earlier than its predecessor."""


# --- statistics -------------------------------------------------------------

class LengthMismatch(EntrainError):
    """Paired series have different lengths."""


class TooFewGroups(EntrainError):
    """Test needs at least two non-empty groups."""


class AllValuesIdentical(EntrainError):
    """Every observation is equal; rank/normality tests undefined."""


class OutOfRangeN(EntrainError):
    """Sample size outside the validity range of the approximation."""


class DegenerateGroup(EntrainError):
    """A group is too small or carries no within-group variation."""


class InvalidEffectSize(EntrainError):
    """Correlation effect size must satisfy |r| < 1."""


# --- perception & pipeline --------------------------------------------------

class ParseError(EntrainError):
    """Malformed CSV/JSON input file."""


class DuplicateRecord(EntrainError):
    """Duplicate (dyad, scale) row in a perception file."""


class ScoreOutOfRange(EntrainError):
    """Raw questionnaire score negative or above its maximum."""


class InsufficientPairs(EntrainError):
    """Fewer than three complete (score, metric) pairs."""


class InsufficientData(EntrainError):
    """Not enough dyads/conditions for a between-condition comparison."""

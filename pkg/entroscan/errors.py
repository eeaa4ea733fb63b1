class EntroscanError(Exception):
    """Base class for every error raised on purpose by entroscan."""


class EmptyInput(EntroscanError, ValueError):
    """A stream or series is too short to produce a single value."""


class InsufficientData(EntroscanError, ValueError):
    """Not enough distinct samples to fit the requested model."""


class DegenerateLabels(EntroscanError, ValueError):
    """A labelled set is missing one of the two classes."""


class ShapeError(EntroscanError, ValueError):
    """Feature vectors disagree with the expected dimension."""


class ParseError(EntroscanError, ValueError):
    """A model, codebook, feature or label document could not be read."""


class UnsupportedVersion(ParseError):
    """A persisted document declares a format version we cannot read."""


class CorpusIOError(EntroscanError, OSError):
    """A corpus root or output directory cannot be read or written."""

"""Box-office revenue analytics: dataset cleaning and inflation adjustment,
a statistical association battery, 180-dimensional pre-release feature
vectors with star power and cast familiarity, and ordinal revenue-class
prediction with bingo / one-class-away accuracy."""

from . import classify, features, ingest, pipeline, stats
from .errors import (
    BoxOfficeError,
    EmptyClassError,
    MissingYearError,
    StreamCorruptionError,
    UndefinedCorrelationError,
    UnknownRatingError,
)

__version__ = "0.1.0"

__all__ = [
    "classify", "features", "ingest", "pipeline", "stats",
    "BoxOfficeError", "EmptyClassError", "MissingYearError",
    "StreamCorruptionError", "UndefinedCorrelationError", "UnknownRatingError",
    "__version__",
]

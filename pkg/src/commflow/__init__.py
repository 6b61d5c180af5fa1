"""Density-based episode analytics for bi-directional communication sequences."""

from .errors import (
    CommflowError,
    EmptyCombinationError,
    EmptyEpisodeError,
    EmptyTrainingError,
    InvalidIntervalError,
    InvalidPairError,
    NeedsBothClassesError,
    ParseError,
)
from .ingest import (
    Direction,
    Event,
    EventLog,
    PairSequence,
    ParseReport,
    list_pairs,
    load_events,
    pair_sequence,
    parse_events,
)
from .density import (
    DensityProfile,
    Grid,
    KdeParams,
    default_grid,
    estimate_density,
    grid_for_range,
    integrate,
    kernel,
    profile_pair,
)

__all__ = [
    "CommflowError",
    "ParseError",
    "InvalidPairError",
    "InvalidIntervalError",
    "EmptyEpisodeError",
    "EmptyTrainingError",
    "NeedsBothClassesError",
    "EmptyCombinationError",
    "Direction",
    "Event",
    "EventLog",
    "PairSequence",
    "ParseReport",
    "parse_events",
    "load_events",
    "pair_sequence",
    "list_pairs",
    "KdeParams",
    "Grid",
    "DensityProfile",
    "kernel",
    "estimate_density",
    "profile_pair",
    "integrate",
    "default_grid",
    "grid_for_range",
]

__version__ = "0.1.0"

"""Per-episode descriptive features of conversational dynamics.

The 14 core features characterize one episode of a pair's communication:
duration, absolute volumes per direction (integrals of the count-weighted
densities), balance, synchronicity, raw counts, peak density, who opened
and who closed the episode, mean response latency, turn count, and gap
burstiness. The set is extensible through a registry so domain-specific
features can ride along in exports without touching the core vector.

Volumes integrate n_dir * f_dir over the episode: each per-direction density
integrates to one, so the weighted integral counts messages attributable to
the episode (an isolated burst scores ~n exactly).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .density import DensityProfile, integrate
from .episodes import Episode
from .errors import EmptyEpisodeError
from .ingest import PairSequence

FEATURE_NAMES: tuple[str, ...] = (
    "duration",
    "volume_total",
    "volume_in",
    "volume_out",
    "balance",
    "synchronicity",
    "count_in",
    "count_out",
    "peak_density",
    "initiator",
    "terminator",
    "mean_response_latency",
    "turn_count",
    "burstiness",
)

# sentinel: mean_response_latency when no message has a later opposite reply
NO_LATENCY = -1.0


@dataclass(frozen=True)
class FeatureVector:
    duration: float
    volume_total: float
    volume_in: float
    volume_out: float
    balance: float
    synchronicity: float
    count_in: float
    count_out: float
    peak_density: float
    initiator: float
    terminator: float
    mean_response_latency: float
    turn_count: float
    burstiness: float

    def as_array(self) -> np.ndarray:
        return np.array([getattr(self, n) for n in FEATURE_NAMES], dtype=np.float64)

    def to_json(self) -> dict:
        return {n: getattr(self, n) for n in FEATURE_NAMES}

    @classmethod
    def from_array(cls, values: Sequence[float]) -> "FeatureVector":
        if len(values) != len(FEATURE_NAMES):
            raise ValueError(f"expected {len(FEATURE_NAMES)} values, got {len(values)}")
        return cls(**{n: float(v) for n, v in zip(FEATURE_NAMES, values)})


def synchronicity(profile: DensityProfile, episode: Episode) -> float:
    """How evenly both directions share the episode, in [0, 1].

    0 means the count-weighted densities coincide; 1 means they never
    overlap. Defined as integral of |g_in - g_out| over the episode divided
    by integral of (g_in + g_out), with g = n * f; 0 when the episode carries
    no density at all.
    """
    g_in = profile.n_in * profile.f_in
    g_out = profile.n_out * profile.f_out
    interval = (episode.start, episode.end)
    den = integrate(g_in + g_out, profile.grid, interval)
    if den <= 0:
        return 0.0
    num = integrate(np.abs(g_in - g_out), profile.grid, interval)
    return min(num / den, 1.0)


def _peak_density(profile: DensityProfile, episode: Episode) -> float:
    total = profile.total
    t = profile.grid.points()
    lo = np.searchsorted(t, episode.start, side="left")
    hi = np.searchsorted(t, episode.end, side="right")
    best = float(total[lo:hi].max()) if hi > lo else 0.0
    # boundary values, in case the max sits on a clipped edge between samples
    for edge in (episode.start, episode.end):
        best = max(best, float(np.interp(edge, t, total)))
    return best


def _mean_response_latency(times: np.ndarray, outgoing: np.ndarray) -> float:
    n = len(times)
    nearest_out = -1
    nearest_in = -1
    gaps = []
    for i in range(n - 1, -1, -1):
        j = nearest_in if outgoing[i] else nearest_out
        if j >= 0:
            gaps.append(times[j] - times[i])
        if outgoing[i]:
            nearest_out = i
        else:
            nearest_in = i
    if not gaps:
        return NO_LATENCY
    return float(np.mean(gaps))


def _burstiness(times: np.ndarray) -> float:
    if len(times) < 3:
        return 0.0
    gaps = np.diff(times)
    m = float(np.mean(gaps))
    s = float(np.std(gaps))
    if s + m == 0:
        return 0.0
    return (s - m) / (s + m)


def compute_features(
    seq: PairSequence,
    profile: DensityProfile,
    episode: Episode,
) -> FeatureVector:
    """The 14-feature description of one episode.

    Requires event_indices to be assigned (see assign_events) and at least
    one event in the episode.
    """
    idx = np.asarray(episode.event_indices, dtype=np.intp)
    if len(idx) == 0:
        raise EmptyEpisodeError(
            f"episode [{episode.start}, {episode.end}] has no events assigned"
        )
    times = seq.times[idx]
    outgoing = seq.outgoing[idx]
    interval = (episode.start, episode.end)

    volume_in = profile.n_in * integrate(profile.f_in, profile.grid, interval)
    volume_out = profile.n_out * integrate(profile.f_out, profile.grid, interval)
    volume_total = volume_in + volume_out
    balance = (volume_out - volume_in) / volume_total if volume_total != 0 else 0.0

    first_tie = times == times[0]
    last_tie = times == times[-1]
    initiator = 1.0 if bool(np.any(outgoing[first_tie])) else -1.0
    terminator = 1.0 if bool(np.any(outgoing[last_tie])) else -1.0

    return FeatureVector(
        duration=float(episode.end - episode.start),
        volume_total=float(volume_total),
        volume_in=float(volume_in),
        volume_out=float(volume_out),
        balance=float(balance),
        synchronicity=synchronicity(profile, episode),
        count_in=float(np.count_nonzero(~outgoing)),
        count_out=float(np.count_nonzero(outgoing)),
        peak_density=_peak_density(profile, episode),
        initiator=initiator,
        terminator=terminator,
        mean_response_latency=_mean_response_latency(times, outgoing),
        turn_count=float(np.count_nonzero(outgoing[1:] != outgoing[:-1])),
        burstiness=_burstiness(times),
    )


def feature_matrix(episodes: Sequence[Episode]) -> tuple[np.ndarray, list[str]]:
    """Stack per-episode vectors into an (n, 14) matrix, rows in input order."""
    rows = []
    for ep in episodes:
        if ep.features is None:
            raise ValueError("all episodes must have features computed")
        rows.append(ep.features.as_array())
    if not rows:
        return np.empty((0, len(FEATURE_NAMES))), list(FEATURE_NAMES)
    return np.vstack(rows), list(FEATURE_NAMES)


def minmax_scale(matrix: np.ndarray) -> np.ndarray:
    """Column-wise min-max scaling to [0, 1] for display; constant columns -> 0."""
    if matrix.size == 0:
        return matrix.copy()
    lo = matrix.min(axis=0)
    span = matrix.max(axis=0) - lo
    span[span == 0] = 1.0
    return (matrix - lo) / span


# -- extension registry -------------------------------------------------------

ExtraFeature = Callable[[PairSequence, DensityProfile, Episode], float]
_EXTRA_FEATURES: dict[str, ExtraFeature] = {}


def register_feature(name: str, fn: ExtraFeature) -> None:
    """Add a named feature available to exports alongside the core 14."""
    if name in FEATURE_NAMES:
        raise ValueError(f"{name!r} is a core feature name")
    if name in _EXTRA_FEATURES:
        raise ValueError(f"feature {name!r} already registered")
    _EXTRA_FEATURES[name] = fn


def unregister_feature(name: str) -> None:
    _EXTRA_FEATURES.pop(name, None)


def extra_feature_names() -> tuple[str, ...]:
    return tuple(_EXTRA_FEATURES)


def compute_extras(
    seq: PairSequence,
    profile: DensityProfile,
    episode: Episode,
) -> dict[str, float]:
    return {
        name: float(fn(seq, profile, episode))
        for name, fn in _EXTRA_FEATURES.items()
    }

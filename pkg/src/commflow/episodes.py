"""Episode segmentation and semantic-zoom parameter mapping.

An episode is a maximal interval where the total communication density
f_in + f_out stays above a threshold epsilon. Boundaries are refined by
linear interpolation between grid samples to the exact crossing, so episode
lengths do not quantize to the grid step. Optional post-passes merge runs
separated by less than merge_gap and drop results shorter than min_duration,
in that order.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field, replace
from typing import TYPE_CHECKING, Sequence

import numpy as np

from .density import DensityProfile, KdeParams
from .ingest import PairSequence

if TYPE_CHECKING:
    from .features import FeatureVector

EPSILON_ABSOLUTE = "absolute"
EPSILON_RELATIVE = "relative-to-peak"


@dataclass(frozen=True)
class Episode:
    """One contiguous high-density interval of a pair's timeline."""

    start: float
    end: float
    pair: tuple[str, str] | None = None
    event_indices: tuple[int, ...] = ()
    n_in: int = 0
    n_out: int = 0
    features: "FeatureVector | None" = None
    ref: str | None = None

    def __post_init__(self):
        if not (self.start < self.end):
            raise ValueError(f"episode needs start < end, got [{self.start}, {self.end}]")

    @property
    def duration(self) -> float:
        return self.end - self.start

    def to_json(self) -> dict:
        doc = {
            "pair": list(self.pair) if self.pair else None,
            "start": self.start,
            "end": self.end,
            "duration": self.duration,
            "n_in": self.n_in,
            "n_out": self.n_out,
            "ref": self.ref,
        }
        if self.features is not None:
            doc["features"] = self.features.to_json()
        return doc


@dataclass(frozen=True)
class ZoomLevel:
    """Relative detection parameters for one semantic-zoom step.

    h is derived from the viewed range (h = range_fraction_h * view_range);
    epsilon is either an absolute density or a fraction of the profile's
    peak total density.
    """

    name: str
    range_fraction_h: float
    sigma: float = 1.0
    epsilon_mode: str = EPSILON_RELATIVE
    epsilon_value: float = 0.05

    def __post_init__(self):
        if self.range_fraction_h <= 0:
            raise ValueError("range_fraction_h must be > 0")
        if self.epsilon_value <= 0:
            raise ValueError("epsilon_value must be > 0")
        if self.epsilon_mode not in (EPSILON_ABSOLUTE, EPSILON_RELATIVE):
            raise ValueError(f"unknown epsilon_mode {self.epsilon_mode!r}")
        if self.epsilon_mode == EPSILON_RELATIVE and not self.epsilon_value < 1:
            raise ValueError("relative epsilon_value must lie in (0, 1)")

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "range_fraction_h": self.range_fraction_h,
            "sigma": self.sigma,
            "epsilon_mode": self.epsilon_mode,
            "epsilon_value": self.epsilon_value,
        }


# documented defaults; any ZoomLevel works
BUILTIN_LEVELS: dict[str, ZoomLevel] = {
    "coarse": ZoomLevel("coarse", 1 / 50),
    "medium": ZoomLevel("medium", 1 / 200),
    "fine": ZoomLevel("fine", 1 / 1000),
}


def zoom_params(
    view_range: float,
    level: ZoomLevel,
    peak_total: float | None = None,
) -> tuple[KdeParams, float]:
    """Resolve a zoom level against a viewed range to (KdeParams, epsilon).

    Relative epsilon needs the current profile's peak total density; pass it
    as peak_total (a second call once the profile exists: params first, then
    density, then threshold).
    """
    if view_range <= 0:
        raise ValueError(f"view_range must be > 0, got {view_range}")
    params = KdeParams(mu=0.0, sigma=level.sigma, h=level.range_fraction_h * view_range)
    if level.epsilon_mode == EPSILON_ABSOLUTE:
        return params, level.epsilon_value
    if peak_total is None:
        raise ValueError("relative-to-peak epsilon needs peak_total")
    return params, level.epsilon_value * peak_total


def resolve_epsilon(mode: str, value: float, profile: DensityProfile) -> float:
    """Absolute detection threshold for a profile."""
    if value <= 0:
        raise ValueError("epsilon must be > 0")
    if mode == EPSILON_ABSOLUTE:
        return value
    if mode == EPSILON_RELATIVE:
        return value * profile.peak_total
    raise ValueError(f"unknown epsilon_mode {mode!r}")


def episode_ref(
    pair: tuple[str, str],
    start: float,
    end: float,
    params: KdeParams,
    epsilon: float,
) -> str:
    """Content hash identifying an episode across process restarts.

    Any change to the pair, the interval, or the detection parameters yields
    a different ref, so stored labels go visibly stale instead of silently
    pointing at different intervals.
    """
    key = "|".join(
        [
            pair[0],
            pair[1],
            repr(float(start)),
            repr(float(end)),
            repr(float(params.mu)),
            repr(float(params.sigma)),
            repr(float(params.h)),
            repr(float(epsilon)),
        ]
    )
    return hashlib.sha256(key.encode()).hexdigest()[:16]


def segment(
    profile: DensityProfile,
    epsilon: float,
    min_duration: float = 0.0,
    merge_gap: float = 0.0,
) -> list[Episode]:
    """Episodes of a profile: maximal runs with f_in + f_out > epsilon.

    Runs whose gap is smaller than merge_gap are merged, then episodes
    shorter than min_duration are dropped. Output is disjoint and sorted.
    """
    if epsilon <= 0:
        raise ValueError(f"epsilon must be > 0, got {epsilon}")
    if min_duration < 0 or merge_gap < 0:
        raise ValueError("min_duration and merge_gap must be >= 0")

    y = profile.total
    t = profile.grid.points()
    step = profile.grid.step
    mask = y > epsilon
    if not mask.any():
        return []

    # maximal runs of consecutive True
    edges = np.flatnonzero(np.diff(mask.astype(np.int8)))
    starts = [0] if mask[0] else []
    starts += [int(i) + 1 for i in edges if not mask[i]]
    ends = [int(i) for i in edges if mask[i]]
    if mask[-1]:
        ends.append(len(mask) - 1)

    intervals: list[tuple[float, float]] = []
    for i, j in zip(starts, ends):
        if i == 0:
            lo = float(t[0])
        else:
            lo = float(t[i - 1] + step * (epsilon - y[i - 1]) / (y[i] - y[i - 1]))
        if j == len(y) - 1:
            hi = float(t[-1])
        else:
            hi = float(t[j] + step * (y[j] - epsilon) / (y[j] - y[j + 1]))
        intervals.append((lo, hi))

    if merge_gap > 0:
        merged = [intervals[0]]
        for lo, hi in intervals[1:]:
            if lo - merged[-1][1] < merge_gap:
                merged[-1] = (merged[-1][0], hi)
            else:
                merged.append((lo, hi))
        intervals = merged

    out = []
    for lo, hi in intervals:
        if hi - lo < min_duration or hi <= lo:
            continue
        ref = None
        if profile.pair is not None:
            ref = episode_ref(profile.pair, lo, hi, profile.params, epsilon)
        out.append(Episode(start=lo, end=hi, pair=profile.pair, ref=ref))
    return out


def assign_events(
    seq: PairSequence,
    episodes: Sequence[Episode],
) -> tuple[list[Episode], list[int]]:
    """Attach event indices (closed intervals) and per-direction counts.

    Returns new Episode objects plus the residual list of event indices that
    fall between episodes. Every event lands in exactly one place.
    """
    taken = np.zeros(len(seq), dtype=bool)
    filled = []
    for ep in episodes:
        lo = np.searchsorted(seq.times, ep.start, side="left")
        hi = np.searchsorted(seq.times, ep.end, side="right")
        idx = np.arange(lo, hi)[~taken[lo:hi]]
        taken[idx] = True
        n_out = int(np.count_nonzero(seq.outgoing[idx]))
        filled.append(
            replace(
                ep,
                event_indices=tuple(int(i) for i in idx),
                n_in=len(idx) - n_out,
                n_out=n_out,
            )
        )
    residual = [int(i) for i in np.flatnonzero(~taken)]
    return filled, residual

"""One-call pair analysis: density profile, episodes, features.

Thin orchestration over the density/episodes/features modules so the CLI
and the HTTP server produce identical results from identical parameters.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

from .density import DensityProfile, Grid, KdeParams, default_grid, profile_pair
from .episodes import (
    EPSILON_RELATIVE,
    Episode,
    assign_events,
    resolve_epsilon,
    segment,
)
from .features import compute_features
from .ingest import PairSequence


@dataclass(frozen=True)
class PairAnalysis:
    """Everything derived from one pair at one parameter setting."""

    seq: PairSequence
    profile: DensityProfile
    epsilon: float
    episodes: list[Episode]
    residual: list[int]  # event indices between episodes


def analyze_pair(
    seq: PairSequence,
    params: KdeParams,
    epsilon_mode: str = EPSILON_RELATIVE,
    epsilon_value: float = 0.05,
    min_duration: float = 0.0,
    merge_gap: float = 0.0,
    grid: Grid | None = None,
    samples: int = 2048,
) -> PairAnalysis:
    """Profile the pair, segment episodes, and attach features.

    Episodes clipped to carry no events keep features=None; everything else
    gets the full vector.
    """
    if grid is None:
        grid = default_grid(seq, params, samples)
    profile = profile_pair(seq, params, grid)
    if profile.peak_total <= 0:
        return PairAnalysis(seq, profile, 0.0, [], list(range(len(seq))))
    epsilon = resolve_epsilon(epsilon_mode, epsilon_value, profile)
    episodes = segment(profile, epsilon, min_duration, merge_gap)
    filled, residual = assign_events(seq, episodes)
    described = [
        replace(ep, features=compute_features(seq, profile, ep))
        if ep.event_indices
        else ep
        for ep in filled
    ]
    return PairAnalysis(seq, profile, epsilon, described, residual)

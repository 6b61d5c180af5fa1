"""Binary episode classification with a seeded random-forest ensemble.

Trees use axis-aligned Gini-impurity splits; split thresholds are midpoints
between adjacent observed feature values, so any strictly increasing
rescaling of a feature column leaves the induced partition of the training
points unchanged. All randomness (bootstrap resamples, candidate-feature
draws) comes from one seeded generator consumed in a fixed order after a
canonical sort of the examples, which makes training deterministic in the
seed and invariant to the order examples arrive in.

Confidence is the share of trees voting positive; a tie at exactly 0.5 is
read as negative so "relevant" always means a strict majority.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .episodes import Episode
from .errors import EmptyCombinationError, EmptyTrainingError, NeedsBothClassesError
from .features import FEATURE_NAMES, FeatureVector

LABEL_POSITIVE = "positive"
LABEL_NEGATIVE = "negative"
MODEL_FORMAT_VERSION = 1

# bootstrap redraws allowed before falling back to the full index set; a
# resample that misses one class entirely would grow a vote-everything tree
_MAX_REDRAWS = 1000


@dataclass(frozen=True)
class LabeledExample:
    episode_ref: str
    features: FeatureVector
    label: str

    def __post_init__(self):
        if self.label not in (LABEL_POSITIVE, LABEL_NEGATIVE):
            raise ValueError(f"label must be positive or negative, got {self.label!r}")
        vals = self.features.as_array()
        if not np.all(np.isfinite(vals)):
            raise ValueError("features must be finite")


@dataclass(frozen=True)
class ForestConfig:
    n_trees: int = 100
    max_depth: int = 8
    min_leaf: int = 1
    features_per_split: int = math.ceil(math.sqrt(len(FEATURE_NAMES)))
    bootstrap: bool = True
    rng_seed: int = 0

    def __post_init__(self):
        if self.n_trees < 1:
            raise ValueError("n_trees must be >= 1")
        if self.max_depth < 1:
            raise ValueError("max_depth must be >= 1")
        if self.min_leaf < 1:
            raise ValueError("min_leaf must be >= 1")
        if not 1 <= self.features_per_split <= len(FEATURE_NAMES):
            raise ValueError(
                f"features_per_split must be in [1, {len(FEATURE_NAMES)}]"
            )

    def to_json(self) -> dict:
        return {
            "n_trees": self.n_trees,
            "max_depth": self.max_depth,
            "min_leaf": self.min_leaf,
            "features_per_split": self.features_per_split,
            "bootstrap": self.bootstrap,
            "rng_seed": self.rng_seed,
        }

    @classmethod
    def from_json(cls, doc: dict) -> "ForestConfig":
        return cls(**{k: doc[k] for k in (
            "n_trees", "max_depth", "min_leaf",
            "features_per_split", "bootstrap", "rng_seed",
        )})


@dataclass(frozen=True)
class Prediction:
    label: str
    confidence: float  # share of trees voting positive
    episode_ref: str | None = None


def _leaf(n_pos: int, n_total: int) -> dict:
    # majority label; tie goes negative
    label = LABEL_POSITIVE if 2 * n_pos > n_total else LABEL_NEGATIVE
    return {"kind": "leaf", "label": label}


def _best_cut(xs_sorted: np.ndarray, pos_prefix: np.ndarray, min_leaf: int):
    """Lowest-Gini threshold for one feature, or None when no cut is valid.

    xs_sorted are the node's values ascending; pos_prefix[i] counts positive
    labels among the first i+1. Both leaf-size floors must hold.
    """
    n = len(xs_sorted)
    cuts = np.flatnonzero(xs_sorted[:-1] < xs_sorted[1:])
    if min_leaf > 1:
        cuts = cuts[(cuts + 1 >= min_leaf) & (n - cuts - 1 >= min_leaf)]
    if len(cuts) == 0:
        return None
    nl = cuts + 1.0
    nr = n - nl
    pl = pos_prefix[cuts].astype(np.float64)
    pr = pos_prefix[-1] - pl
    # weighted impurity: n_side * gini_side = n_side - (pos^2 + neg^2)/n_side
    score = (nl - (pl * pl + (nl - pl) ** 2) / nl
             + nr - (pr * pr + (nr - pr) ** 2) / nr) / n
    k = int(np.argmin(score))  # first minimum: deterministic tie-break
    i = int(cuts[k])
    return float(score[k]), float((xs_sorted[i] + xs_sorted[i + 1]) / 2.0)


def _grow(X: np.ndarray, y: np.ndarray, idx: np.ndarray, cfg: ForestConfig,
          rng: np.random.Generator, depth: int) -> dict:
    ys = y[idx]
    n = len(ys)
    n_pos = int(ys.sum())
    if n_pos == 0 or n_pos == n or depth >= cfg.max_depth or n < 2 * cfg.min_leaf:
        return _leaf(n_pos, n)

    # candidate features in seeded order; if the first features_per_split
    # admit no valid cut, keep inspecting the rest so a splittable node is
    # never forced into a mixed leaf by an unlucky draw
    order = rng.permutation(X.shape[1])
    best = None
    for rank, f in enumerate(order):
        xv = X[idx, f]
        sort = np.argsort(xv, kind="stable")
        cut = _best_cut(xv[sort], np.cumsum(ys[sort]), cfg.min_leaf)
        if cut is not None and (best is None or cut[0] < best[0]):
            best = (cut[0], int(f), cut[1])
        if rank + 1 >= cfg.features_per_split and best is not None:
            break
    if best is None:
        return _leaf(n_pos, n)

    _, f, thr = best
    mask = X[idx, f] <= thr
    return {
        "kind": "split",
        "feature": f,
        "threshold": thr,
        "left": _grow(X, y, idx[mask], cfg, rng, depth + 1),
        "right": _grow(X, y, idx[~mask], cfg, rng, depth + 1),
    }


def _bootstrap_indices(rng: np.random.Generator, n: int, y: np.ndarray) -> np.ndarray:
    for _ in range(_MAX_REDRAWS):
        idx = rng.integers(0, n, size=n)
        hits = y[idx]
        if hits.any() and not hits.all():
            return idx
    return np.arange(n)


def _eval_tree(node: dict, x: np.ndarray) -> bool:
    while node["kind"] == "split":
        node = node["left"] if x[node["feature"]] <= node["threshold"] else node["right"]
    return node["label"] == LABEL_POSITIVE


class ForestModel:
    """Trained ensemble; immutable, safe for concurrent prediction."""

    def __init__(self, trees: list[dict], config: ForestConfig,
                 feature_names: Sequence[str], class_name: str):
        if len(trees) != config.n_trees:
            raise ValueError("tree count must match config.n_trees")
        self.trees = trees
        self.config = config
        self.feature_names = list(feature_names)
        self.class_name = class_name

    def predict(self, features: FeatureVector | np.ndarray,
                episode_ref: str | None = None) -> Prediction:
        x = features.as_array() if isinstance(features, FeatureVector) else np.asarray(features)
        votes = sum(1 for t in self.trees if _eval_tree(t, x))
        confidence = votes / len(self.trees)
        label = LABEL_POSITIVE if confidence > 0.5 else LABEL_NEGATIVE
        return Prediction(label, confidence, episode_ref)

    def predict_episodes(self, episodes: Sequence[Episode]) -> list[Prediction]:
        out = []
        for ep in episodes:
            if ep.features is None:
                raise ValueError("episode lacks features")
            out.append(self.predict(ep.features, episode_ref=ep.ref))
        return out

    def to_json(self) -> dict:
        return {
            "version": MODEL_FORMAT_VERSION,
            "class_name": self.class_name,
            "config": self.config.to_json(),
            "feature_names": self.feature_names,
            "trees": self.trees,
        }

    def serialize(self) -> str:
        """Canonical JSON text; equal models serialize to equal bytes."""
        return json.dumps(self.to_json(), sort_keys=True, separators=(",", ":"))

    @classmethod
    def from_json(cls, doc: dict) -> "ForestModel":
        if doc.get("version") != MODEL_FORMAT_VERSION:
            raise ValueError(f"unsupported model version {doc.get('version')!r}")
        return cls(
            trees=doc["trees"],
            config=ForestConfig.from_json(doc["config"]),
            feature_names=doc["feature_names"],
            class_name=doc["class_name"],
        )

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.serialize())

    @classmethod
    def load(cls, path: str | Path) -> "ForestModel":
        return cls.from_json(json.loads(Path(path).read_text()))


def train(examples: Sequence[LabeledExample],
          config: ForestConfig | None = None,
          class_name: str = "model") -> ForestModel:
    """Grow a seeded forest from labeled episodes.

    Needs at least one example of each class. Examples are first sorted by
    (episode_ref, label, feature values), so the result does not depend on
    the order labels were collected in.
    """
    if config is None:
        config = ForestConfig()
    if len(examples) == 0:
        raise EmptyTrainingError("no training examples")
    labels = {e.label for e in examples}
    if labels != {LABEL_POSITIVE, LABEL_NEGATIVE}:
        raise NeedsBothClassesError(
            f"training needs both classes, got only {sorted(labels)}"
        )

    ordered = sorted(
        examples,
        key=lambda e: (e.episode_ref, e.label, tuple(e.features.as_array())),
    )
    X = np.vstack([e.features.as_array() for e in ordered])
    y = np.array([e.label == LABEL_POSITIVE for e in ordered])
    n = len(ordered)

    rng = np.random.default_rng(config.rng_seed)
    trees = []
    for _ in range(config.n_trees):
        idx = _bootstrap_indices(rng, n, y) if config.bootstrap else np.arange(n)
        trees.append(_grow(X, y, idx, config, rng, depth=0))
    return ForestModel(trees, config, FEATURE_NAMES, class_name)


def rank_uncertain(model: "ForestModel | CombinedModel",
                   episodes: Sequence[Episode]) -> list[tuple[str, float]]:
    """Episodes nearest the decision boundary first; ties by start time.

    These are the ones where one more user label buys the most.
    """
    rows = []
    for ep in episodes:
        if ep.features is None:
            raise ValueError("episode lacks features")
        pred = model.predict(ep.features)
        ref = ep.ref if ep.ref is not None else f"{ep.start}..{ep.end}"
        rows.append((abs(pred.confidence - 0.5), ep.start, ref, pred.confidence))
    rows.sort(key=lambda r: (r[0], r[1]))
    return [(ref, conf) for _, _, ref, conf in rows]


def filter_confident(predictions: Sequence[Prediction],
                     min_confidence: float,
                     polarity: str) -> list[Prediction]:
    """Predictions of the requested polarity meeting the confidence floor."""
    if not 0.0 <= min_confidence <= 1.0:
        raise ValueError("min_confidence must lie in [0, 1]")
    if polarity == LABEL_POSITIVE:
        return [p for p in predictions
                if p.label == LABEL_POSITIVE and p.confidence >= min_confidence]
    if polarity == LABEL_NEGATIVE:
        return [p for p in predictions
                if p.label == LABEL_NEGATIVE and p.confidence <= 1.0 - min_confidence]
    raise ValueError(f"polarity must be positive or negative, got {polarity!r}")


class CombinedModel:
    """AND/OR composition of trained models.

    AND is positive only when every member is (confidence = min); OR when
    any member is (confidence = max). Either way the composite confidence
    stays consistent with the strict-majority labeling rule.
    """

    def __init__(self, models: Sequence[ForestModel], mode: str):
        if len(models) == 0:
            raise EmptyCombinationError("need at least one model to combine")
        if mode not in ("and", "or"):
            raise ValueError(f"mode must be 'and' or 'or', got {mode!r}")
        self.models = list(models)
        self.mode = mode

    @property
    def class_name(self) -> str:
        op = f" {self.mode} "
        return "(" + op.join(m.class_name for m in self.models) + ")"

    def predict(self, features: FeatureVector | np.ndarray,
                episode_ref: str | None = None) -> Prediction:
        preds = [m.predict(features) for m in self.models]
        if self.mode == "and":
            confidence = min(p.confidence for p in preds)
            positive = all(p.label == LABEL_POSITIVE for p in preds)
        else:
            confidence = max(p.confidence for p in preds)
            positive = any(p.label == LABEL_POSITIVE for p in preds)
        label = LABEL_POSITIVE if positive else LABEL_NEGATIVE
        return Prediction(label, confidence, episode_ref)

    def predict_episodes(self, episodes: Sequence[Episode]) -> list[Prediction]:
        out = []
        for ep in episodes:
            if ep.features is None:
                raise ValueError("episode lacks features")
            out.append(self.predict(ep.features, episode_ref=ep.ref))
        return out


def combine(models: Sequence[ForestModel], mode: str) -> CombinedModel:
    return CombinedModel(models, mode)

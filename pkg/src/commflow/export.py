"""Shared CSV/JSON encoders for analysis results.

The CLI and any library caller go through these functions, so equal inputs
produce byte-identical output. CSV files open with "# key=value" metadata
lines echoing the parameters that produced the data, then a header row.
Floats are written with repr so a reader recovers the exact double.
"""

from __future__ import annotations

import csv
import io
import json
from typing import Iterable, Sequence

import numpy as np

from .classify import Prediction
from .density import DensityProfile
from .episodes import Episode
from .features import FEATURE_NAMES

EPISODE_COLUMNS = ("pair_a", "pair_b", "ref", "start", "end", "duration", "n_in", "n_out")


def format_value(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def csv_document(metadata: dict, header: Sequence[str], rows: Iterable[Sequence]) -> str:
    buf = io.StringIO()
    for k, v in metadata.items():
        buf.write(f"# {k}={format_value(v)}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([format_value(c) for c in row])
    return buf.getvalue()


def json_document(doc: dict) -> str:
    return json.dumps(doc, indent=2) + "\n"


def read_csv_document(text: str) -> tuple[dict, list[str], list[list[str]]]:
    """Inverse of csv_document: (metadata, header, string rows)."""
    meta = {}
    lines = []
    for line in text.splitlines():
        if line.startswith("# ") and "=" in line:
            k, _, v = line[2:].partition("=")
            meta[k] = v
        else:
            lines.append(line)
    rows = [r for r in csv.reader(lines) if r]
    if not rows:
        return meta, [], []
    return meta, rows[0], rows[1:]


# -- pairs ---------------------------------------------------------------------

PAIR_HEADER = ("a", "b", "count_ab", "count_ba", "total")


def pairs_rows(pairs: Sequence[tuple[tuple[str, str], int, int]]):
    return [(a, b, ab, ba, ab + ba) for (a, b), ab, ba in pairs]


def pairs_csv(pairs, metadata: dict) -> str:
    return csv_document(metadata, PAIR_HEADER, pairs_rows(pairs))


def pairs_json(pairs, metadata: dict) -> str:
    return json_document(
        {
            "params": metadata,
            "pairs": [
                {"a": a, "b": b, "count_ab": ab, "count_ba": ba, "total": ab + ba}
                for (a, b), ab, ba in pairs
            ],
        }
    )


# -- density profiles ----------------------------------------------------------


def profile_json_doc(profile: DensityProfile) -> dict:
    return {
        "pair": list(profile.pair) if profile.pair else None,
        "grid": profile.grid.to_json(),
        "params": profile.params.to_json(),
        "n_in": profile.n_in,
        "n_out": profile.n_out,
        "f_in": [float(v) for v in profile.f_in],
        "f_out": [float(v) for v in profile.f_out],
    }


def profile_csv(profile: DensityProfile, metadata: dict) -> str:
    t = profile.grid.points()
    rows = zip(
        (float(v) for v in t),
        (float(v) for v in profile.f_in),
        (float(v) for v in profile.f_out),
    )
    return csv_document(metadata, ("t", "f_in", "f_out"), rows)


def profile_json(profile: DensityProfile, metadata: dict) -> str:
    doc = {"params": metadata}
    doc.update(profile_json_doc(profile))
    return json_document(doc)


# -- episodes -------------------------------------------------------------------


def episode_row(ep: Episode) -> list:
    a, b = ep.pair if ep.pair else ("", "")
    row = [a, b, ep.ref or "", ep.start, ep.end, ep.duration, ep.n_in, ep.n_out]
    if ep.features is not None:
        row.extend(float(getattr(ep.features, n)) for n in FEATURE_NAMES)
    else:
        row.extend("" for _ in FEATURE_NAMES)
    return row


def episodes_csv(episodes: Sequence[Episode], metadata: dict) -> str:
    header = list(EPISODE_COLUMNS) + list(FEATURE_NAMES)
    return csv_document(metadata, header, (episode_row(e) for e in episodes))


def episodes_json(episodes: Sequence[Episode], metadata: dict) -> str:
    return json_document(
        {"params": metadata, "episodes": [e.to_json() for e in episodes]}
    )


# -- predictions -----------------------------------------------------------------

PREDICTION_HEADER = ("episode_id", "label", "confidence")


def predictions_csv(predictions: Sequence[Prediction], metadata: dict) -> str:
    rows = [(p.episode_ref or "", p.label, p.confidence) for p in predictions]
    return csv_document(metadata, PREDICTION_HEADER, rows)


def predictions_json(predictions: Sequence[Prediction], metadata: dict) -> str:
    return json_document(
        {
            "params": metadata,
            "predictions": [
                {
                    "episode_id": p.episode_ref or "",
                    "label": p.label,
                    "confidence": p.confidence,
                }
                for p in predictions
            ],
        }
    )

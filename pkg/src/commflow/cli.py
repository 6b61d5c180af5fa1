"""Headless pipeline driver: ingest, pairs, profile, episodes, train, predict, serve.

Every output goes through the encoders in export.py, so a script capturing
stdout gets byte-identical results to calling the library with the same
parameters. Exit codes: 0 success, 1 usage error, 2 data error.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

import numpy as np

from . import export
from .classify import (
    ForestConfig,
    ForestModel,
    LabeledExample,
    Prediction,
    filter_confident,
    train,
)
from .density import KdeParams, default_grid, grid_for_range
from .episodes import EPSILON_ABSOLUTE, EPSILON_RELATIVE
from .errors import CommflowError
from .features import FEATURE_NAMES, FeatureVector
from .ingest import load_events
from .pipeline import analyze_pair

EPSILON_MODES = {
    "relative": EPSILON_RELATIVE,
    "relative-to-peak": EPSILON_RELATIVE,
    "absolute": EPSILON_ABSOLUTE,
}


class _Parser(argparse.ArgumentParser):
    # usage problems are exit code 1; argparse's default would be 2,
    # which this tool reserves for data errors
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise SystemExit(1)


def _add_common_pair_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("file", help="event log (whitespace triples or CSV; .gz ok)")
    p.add_argument("--pair", required=True, metavar="A,B",
                   help="entity pair, comma separated; first entity is 'out'")
    p.add_argument("--mu", type=float, default=0.0, help="kernel center offset (default 0)")
    p.add_argument("--sigma", type=float, default=1.0, help="kernel spread (default 1)")
    p.add_argument("--h", type=float, default=None,
                   help="bandwidth in seconds (default: viewed range / 200)")
    p.add_argument("--grid-n", type=int, default=2048,
                   help="density sample count (default 2048)")
    p.add_argument("--from", dest="t0", type=float, default=None,
                   help="viewed range start (default: pair extent)")
    p.add_argument("--to", dest="t1", type=float, default=None,
                   help="viewed range end (default: pair extent)")


def build_parser() -> _Parser:
    parser = _Parser(prog="commflow",
                     description="density-based episode analytics for communication logs")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", parents=[], help="parse a log and report statistics")
    p.add_argument("file")
    p.add_argument("--report", action="store_true", help="print the parse report")
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.add_argument("--strict", action="store_true",
                   help="abort on the first malformed record")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("pairs", help="list communicating pairs")
    p.add_argument("file")
    p.add_argument("--min", type=int, default=1, help="minimum total messages (default 1)")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.set_defaults(func=cmd_pairs)

    p = sub.add_parser("profile", help="density profile of one pair")
    _add_common_pair_args(p)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.set_defaults(func=cmd_profile)

    p = sub.add_parser("episodes", help="detect episodes of one pair")
    _add_common_pair_args(p)
    p.add_argument("--epsilon", type=float, default=0.05,
                   help="detection threshold (default 0.05)")
    p.add_argument("--epsilon-mode", choices=sorted(EPSILON_MODES), default="relative",
                   help="threshold units: fraction of peak or absolute density")
    p.add_argument("--min-duration", type=float, default=0.0,
                   help="drop episodes shorter than this (default 0)")
    p.add_argument("--merge-gap", type=float, default=0.0,
                   help="merge episodes separated by less than this (default 0)")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.set_defaults(func=cmd_episodes)

    p = sub.add_parser("train", help="train a classifier from feature and label files")
    p.add_argument("--features", required=True, help="episodes CSV with feature columns")
    p.add_argument("--labels", required=True, help="CSV with header episode_id,label")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--trees", type=int, default=100)
    p.add_argument("--max-depth", type=int, default=8)
    p.add_argument("--min-leaf", type=int, default=1)
    p.add_argument("--class-name", default="model")
    p.add_argument("--out", required=True, help="output model JSON path")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("predict", help="classify episodes with a trained model")
    p.add_argument("--model", required=True)
    p.add_argument("--features", required=True, help="episodes CSV with feature columns")
    p.add_argument("--min-confidence", type=float, default=None,
                   help="filter to confident predictions")
    p.add_argument("--polarity", choices=("positive", "negative", "any"), default="any")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--corpus", default=os.environ.get("COMMFLOW_CORPUS"))
    p.add_argument("--host", default=os.environ.get("COMMFLOW_HOST", "127.0.0.1"))
    p.add_argument("--port", type=int,
                   default=int(os.environ.get("COMMFLOW_PORT", "8000")))
    p.add_argument("--sessions-dir",
                   default=os.environ.get("COMMFLOW_SESSIONS", "./sessions"))
    p.add_argument("--ui-dir", default=os.environ.get("COMMFLOW_UI"))
    p.set_defaults(func=cmd_serve)

    return parser


def _split_pair(arg: str) -> tuple[str, str]:
    parts = [s.strip() for s in arg.split(",")]
    if len(parts) != 2 or not all(parts):
        raise CommflowError(f"--pair expects 'a,b', got {arg!r}")
    return parts[0], parts[1]


def _resolve_view(seq, args) -> tuple[KdeParams, object, dict]:
    """Shared profile/episodes parameter resolution; returns params, grid, metadata."""
    if len(seq) == 0 and (args.t0 is None or args.t1 is None):
        raise CommflowError(
            f"pair {seq.a},{seq.b} has no events; give an explicit --from/--to range"
        )
    t0 = args.t0 if args.t0 is not None else float(seq.times[0])
    t1 = args.t1 if args.t1 is not None else float(seq.times[-1])
    view_range = t1 - t0
    if view_range <= 0:
        raise CommflowError(f"empty view range [{t0}, {t1}]")
    h = args.h if args.h is not None else view_range / 200.0
    params = KdeParams(mu=args.mu, sigma=args.sigma, h=h)
    if args.t0 is None and args.t1 is None:
        grid = default_grid(seq, params, args.grid_n)
    else:
        grid = grid_for_range(t0, t1, args.grid_n)
    meta = {
        "input": args.file,
        "pair": f"{seq.a},{seq.b}",
        "mu": params.mu,
        "sigma": params.sigma,
        "h": params.h,
        "grid_n": grid.n,
        "from": grid.start,
        "to": grid.end,
    }
    return params, grid, meta


def cmd_ingest(args) -> int:
    _, report = load_events(args.file, strict=args.strict)
    if args.report:
        if args.format == "json":
            sys.stdout.write(export.json_document(report.to_json()))
        else:
            sys.stderr.write(report.format_text() + "\n")
    return 0


def cmd_pairs(args) -> int:
    log, _ = load_events(args.file)
    pairs = log.list_pairs(args.min)
    meta = {"input": args.file, "min": args.min}
    doc = export.pairs_csv(pairs, meta) if args.format == "csv" else export.pairs_json(pairs, meta)
    sys.stdout.write(doc)
    return 0


def cmd_profile(args) -> int:
    log, _ = load_events(args.file)
    a, b = _split_pair(args.pair)
    seq = log.pair_sequence(a, b)
    params, grid, meta = _resolve_view(seq, args)
    from .density import profile_pair
    profile = profile_pair(seq, params, grid)
    doc = (export.profile_csv(profile, meta) if args.format == "csv"
           else export.profile_json(profile, meta))
    sys.stdout.write(doc)
    return 0


def cmd_episodes(args) -> int:
    log, _ = load_events(args.file)
    a, b = _split_pair(args.pair)
    seq = log.pair_sequence(a, b)
    params, grid, meta = _resolve_view(seq, args)
    mode = EPSILON_MODES[args.epsilon_mode]
    result = analyze_pair(
        seq,
        params,
        epsilon_mode=mode,
        epsilon_value=args.epsilon,
        min_duration=args.min_duration,
        merge_gap=args.merge_gap,
        grid=grid,
    )
    meta.update(
        epsilon=args.epsilon,
        epsilon_mode=mode,
        min_duration=args.min_duration,
        merge_gap=args.merge_gap,
        epsilon_resolved=result.epsilon,
    )
    doc = (export.episodes_csv(result.episodes, meta) if args.format == "csv"
           else export.episodes_json(result.episodes, meta))
    sys.stdout.write(doc)
    return 0


def read_feature_rows(path: str) -> list[tuple[str, FeatureVector]]:
    """(episode_id, features) rows from an episodes CSV; featureless rows skipped."""
    meta, header, rows = export.read_csv_document(Path(path).read_text())
    try:
        ref_col = header.index("ref")
    except ValueError:
        try:
            ref_col = header.index("episode_id")
        except ValueError:
            raise CommflowError(f"{path}: no 'ref' or 'episode_id' column") from None
    try:
        cols = [header.index(n) for n in FEATURE_NAMES]
    except ValueError as missing:
        raise CommflowError(f"{path}: missing feature column ({missing})") from None
    out = []
    for row in rows:
        if any(row[c] == "" for c in cols):
            continue
        vec = FeatureVector.from_array(np.array([float(row[c]) for c in cols]))
        out.append((row[ref_col], vec))
    return out


def read_labels(path: str) -> list[tuple[str, str]]:
    _, header, rows = export.read_csv_document(Path(path).read_text())
    want = ["episode_id", "label"]
    if [h.strip().lower() for h in header[:2]] != want:
        raise CommflowError(f"{path}: expected header episode_id,label")
    return [(r[0], r[1]) for r in rows]


def cmd_train(args) -> int:
    features = dict(read_feature_rows(args.features))
    examples = []
    for ref, label in read_labels(args.labels):
        if ref not in features:
            raise CommflowError(f"label for unknown episode_id {ref!r}")
        examples.append(LabeledExample(ref, features[ref], label))
    config = ForestConfig(
        n_trees=args.trees,
        max_depth=args.max_depth,
        min_leaf=args.min_leaf,
        rng_seed=args.seed,
    )
    model = train(examples, config, class_name=args.class_name)
    model.save(args.out)
    sys.stderr.write(
        f"trained {args.class_name!r} on {len(examples)} examples -> {args.out}\n"
    )
    return 0


def cmd_predict(args) -> int:
    model = ForestModel.load(args.model)
    rows = read_feature_rows(args.features)
    preds = [model.predict(vec, episode_ref=ref) for ref, vec in rows]
    if args.min_confidence is not None:
        c = args.min_confidence
        if args.polarity == "any":
            keep = set(filter_confident(preds, c, "positive"))
            keep |= set(filter_confident(preds, c, "negative"))
            preds = [p for p in preds if p in keep]
        else:
            preds = filter_confident(preds, c, args.polarity)
    meta = {
        "model": args.model,
        "class_name": model.class_name,
        "min_confidence": args.min_confidence if args.min_confidence is not None else "",
        "polarity": args.polarity,
    }
    doc = (export.predictions_csv(preds, meta) if args.format == "csv"
           else export.predictions_json(preds, meta))
    sys.stdout.write(doc)
    return 0


def cmd_serve(args) -> int:
    if not args.corpus:
        raise CommflowError("serve needs --corpus (or COMMFLOW_CORPUS)")
    import uvicorn

    from .server import create_app

    app = create_app(
        corpus_path=args.corpus,
        sessions_dir=args.sessions_dir,
        ui_dir=args.ui_dir,
    )
    uvicorn.run(app, host=args.host, port=args.port)
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:  # --help exits 0, usage errors exit 1
        return int(e.code or 0)
    try:
        return args.func(args)
    except CommflowError as e:
        code = getattr(e, "code", "error")
        sys.stderr.write(f"commflow: error [{code}]: {e}\n")
        return 2
    except (OSError, ValueError) as e:
        sys.stderr.write(f"commflow: error: {e}\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())

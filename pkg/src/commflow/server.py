"""HTTP service exposing pairs, densities, episodes, labels, and classifiers.

State model: the corpus is immutable after load; density profiles are
memoized in a small LRU keyed by pair and parameters; each episode served by
the episodes endpoint is remembered in a registry keyed by its content-hash
ref, which is what labels and predictions resolve against. Sessions live in
memory and, when a sessions directory is configured, as one JSON document
per session so an analyst's labels and models survive restarts.

Labels are never dropped when parameters change: a label whose detection
parameters differ from the session's current view is flagged stale in every
response that carries it, and still contributes its stored feature vector
to training.
"""

from __future__ import annotations

import json
import threading
import time
import uuid
from collections import OrderedDict
from pathlib import Path

import numpy as np
from fastapi import FastAPI, HTTPException, Query, Request
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles

from .classify import (
    LABEL_NEGATIVE,
    LABEL_POSITIVE,
    ForestConfig,
    ForestModel,
    LabeledExample,
    combine,
    filter_confident,
    rank_uncertain,
    train,
)
from .density import KdeParams, default_grid, grid_for_range, profile_pair
from .episodes import EPSILON_ABSOLUTE, EPSILON_RELATIVE, Episode
from .errors import CommflowError, EmptyTrainingError, NeedsBothClassesError
from .export import profile_json_doc
from .features import FeatureVector
from .ingest import ParseReport, load_events, parse_events
from .pipeline import analyze_pair

PROFILE_CACHE_SIZE = 32
DEFAULT_GRID_N = 2048
DEFAULT_RANGE_FRACTION = 1 / 200  # medium zoom when no explicit bandwidth


def _fail(status: int, code: str, message: str):
    raise HTTPException(status_code=status, detail={"code": code, "message": message})


class SessionStore:
    """In-memory sessions, mirrored to one JSON file each when dir is set."""

    def __init__(self, directory: str | Path | None):
        self.directory = Path(directory) if directory else None
        if self.directory:
            self.directory.mkdir(parents=True, exist_ok=True)
        self._cache: dict[str, dict] = {}
        self._locks: dict[str, threading.Lock] = {}
        self._guard = threading.Lock()

    def lock(self, sid: str) -> threading.Lock:
        with self._guard:
            if sid not in self._locks:
                self._locks[sid] = threading.Lock()
            return self._locks[sid]

    def create(self, corpus_ref: str) -> dict:
        sid = uuid.uuid4().hex[:12]
        doc = {
            "id": sid,
            "corpus_ref": corpus_ref,
            "labels": {},
            "models": {},
            "view_state": None,
        }
        self._cache[sid] = doc
        self.save(doc)
        return doc

    def get(self, sid: str) -> dict | None:
        if sid in self._cache:
            return self._cache[sid]
        if self.directory:
            path = self.directory / f"{sid}.json"
            if path.exists():
                doc = json.loads(path.read_text())
                self._cache[sid] = doc
                return doc
        return None

    def save(self, doc: dict) -> None:
        if self.directory:
            path = self.directory / f"{doc['id']}.json"
            tmp = path.with_suffix(".json.tmp")
            tmp.write_text(json.dumps(doc))
            tmp.replace(path)


def _label_stale(label_doc: dict, view_state: dict | None) -> bool:
    if not view_state or "params" not in view_state:
        return False
    return label_doc.get("params") != view_state["params"]


def create_app(
    corpus_path: str | Path | None = None,
    corpus_text: str | None = None,
    sessions_dir: str | Path | None = None,
    ui_dir: str | Path | None = None,
) -> FastAPI:
    """Build the service around one corpus (a file path or inline text)."""
    if corpus_text is not None:
        log, report = parse_events(corpus_text)
        corpus_ref = "inline"
    elif corpus_path is not None:
        try:
            log, report = load_events(corpus_path)
        except OSError as e:
            raise RuntimeError(f"cannot read corpus {corpus_path}: {e}") from e
        corpus_ref = Path(corpus_path).name
    else:
        raise ValueError("create_app needs corpus_path or corpus_text")

    app = FastAPI(title="commflow", docs_url=None, redoc_url=None)
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )

    state = app.state
    state.log = log
    state.report = report
    state.corpus_ref = corpus_ref
    state.sessions = SessionStore(sessions_dir)
    state.profile_cache = OrderedDict()
    state.cache_lock = threading.Lock()
    state.registry = {}  # episode ref -> payload with features and params

    @app.exception_handler(HTTPException)
    async def http_error(request: Request, exc: HTTPException):
        detail = exc.detail
        if isinstance(detail, dict) and "code" in detail:
            body = detail
        else:
            body = {"code": "error", "message": str(detail)}
        return JSONResponse(status_code=exc.status_code, content=body)

    @app.exception_handler(RequestValidationError)
    async def validation_error(request: Request, exc: RequestValidationError):
        return JSONResponse(
            status_code=422,
            content={"code": "invalid-request", "message": str(exc.errors()[:3])},
        )

    # ---- corpus reads ---------------------------------------------------

    @app.get("/api/health")
    def health():
        rep: ParseReport = state.report
        return {
            "status": "ok",
            "corpus": {
                "ref": state.corpus_ref,
                "events": rep.events,
                "entities": rep.entities,
                "directed_pairs": rep.directed_pairs,
                "unordered_pairs": rep.unordered_pairs,
                "self_loops": rep.self_loops,
                "span_days": rep.span_days,
                "t_min": rep.t_min,
                "t_max": rep.t_max,
            },
        }

    @app.get("/api/pairs")
    def pairs(min: int = Query(default=1, ge=1), limit: int = Query(default=500, ge=1)):
        rows = state.log.list_pairs(min)[:limit]
        return {
            "pairs": [
                {"a": a, "b": b, "count_ab": ab, "count_ba": ba, "total": ab + ba}
                for (a, b), ab, ba in rows
            ]
        }

    def _sequence_or_404(a: str, b: str):
        try:
            seq = state.log.pair_sequence(a, b)
        except CommflowError as e:
            _fail(422, e.code, str(e))
        if len(seq) == 0:
            _fail(404, "unknown-pair", f"no events between {a!r} and {b!r}")
        return seq

    def _resolve_params(seq, mu, sigma, h, grid_n, t0, t1):
        lo = t0 if t0 is not None else float(seq.times[0])
        hi = t1 if t1 is not None else float(seq.times[-1])
        if hi <= lo:
            _fail(422, "invalid-interval", f"empty view range [{lo}, {hi}]")
        bandwidth = h if h is not None else (hi - lo) * DEFAULT_RANGE_FRACTION
        try:
            params = KdeParams(mu=mu, sigma=sigma, h=bandwidth)
        except ValueError as e:
            _fail(422, "invalid-params", str(e))
        if t0 is None and t1 is None:
            grid = default_grid(seq, params, grid_n)
        else:
            grid = grid_for_range(lo, hi, grid_n)
        return params, grid

    def _profile_cached(seq, params, grid):
        key = (seq.a, seq.b, params.mu, params.sigma, params.h,
               grid.start, grid.step, grid.n)
        with state.cache_lock:
            if key in state.profile_cache:
                state.profile_cache.move_to_end(key)
                return state.profile_cache[key]
        prof = profile_pair(seq, params, grid)
        with state.cache_lock:
            state.profile_cache[key] = prof
            while len(state.profile_cache) > PROFILE_CACHE_SIZE:
                state.profile_cache.popitem(last=False)
        return prof

    @app.get("/api/pairs/{a}/{b}/profile")
    def profile(
        a: str,
        b: str,
        mu: float = 0.0,
        sigma: float = Query(default=1.0, gt=0),
        h: float | None = Query(default=None, gt=0),
        grid_n: int = Query(default=DEFAULT_GRID_N, ge=2, le=100_000),
        t0: float | None = Query(default=None, alias="from"),
        t1: float | None = Query(default=None, alias="to"),
    ):
        seq = _sequence_or_404(a, b)
        params, grid = _resolve_params(seq, mu, sigma, h, grid_n, t0, t1)
        prof = _profile_cached(seq, params, grid)
        return profile_json_doc(prof)

    @app.get("/api/pairs/{a}/{b}/episodes")
    def episodes(
        a: str,
        b: str,
        mu: float = 0.0,
        sigma: float = Query(default=1.0, gt=0),
        h: float | None = Query(default=None, gt=0),
        grid_n: int = Query(default=DEFAULT_GRID_N, ge=2, le=100_000),
        t0: float | None = Query(default=None, alias="from"),
        t1: float | None = Query(default=None, alias="to"),
        epsilon: float = Query(default=0.05, gt=0),
        epsilon_mode: str = Query(default="relative-to-peak"),
        min_duration: float = Query(default=0.0, ge=0),
        merge_gap: float = Query(default=0.0, ge=0),
    ):
        mode = {"relative": EPSILON_RELATIVE,
                EPSILON_RELATIVE: EPSILON_RELATIVE,
                EPSILON_ABSOLUTE: EPSILON_ABSOLUTE}.get(epsilon_mode)
        if mode is None:
            _fail(422, "invalid-params", f"unknown epsilon_mode {epsilon_mode!r}")
        if mode == EPSILON_RELATIVE and not epsilon < 1:
            _fail(422, "invalid-params", "relative epsilon must lie in (0, 1)")
        seq = _sequence_or_404(a, b)
        params, grid = _resolve_params(seq, mu, sigma, h, grid_n, t0, t1)
        result = analyze_pair(
            seq, params,
            epsilon_mode=mode, epsilon_value=epsilon,
            min_duration=min_duration, merge_gap=merge_gap,
            grid=grid,
        )
        param_doc = {
            "pair": [a, b],
            "mu": params.mu, "sigma": params.sigma, "h": params.h,
            "grid_n": grid.n, "from": grid.start, "to": grid.end,
            "epsilon": epsilon, "epsilon_mode": mode,
            "min_duration": min_duration, "merge_gap": merge_gap,
        }
        docs = []
        for ep in result.episodes:
            doc = ep.to_json()
            docs.append(doc)
            if ep.features is not None and ep.ref:
                state.registry[ep.ref] = {
                    "pair": [a, b],
                    "start": ep.start,
                    "end": ep.end,
                    "n_in": ep.n_in,
                    "n_out": ep.n_out,
                    "features": [float(v) for v in ep.features.as_array()],
                    "params": param_doc,
                }
        return {
            "params": param_doc,
            "epsilon_resolved": result.epsilon,
            "episodes": docs,
            "residual_count": len(result.residual),
        }

    # ---- sessions ---------------------------------------------------------

    def _session_or_404(sid: str) -> dict:
        doc = state.sessions.get(sid)
        if doc is None:
            _fail(404, "unknown-session", f"no session {sid!r}")
        return doc

    def _session_view(doc: dict) -> dict:
        labels = [
            {
                "episode_ref": ref,
                "label": entry["label"],
                "stale": _label_stale(entry, doc.get("view_state")),
                "pair": entry["episode"]["pair"],
                "start": entry["episode"]["start"],
                "end": entry["episode"]["end"],
            }
            for ref, entry in sorted(doc["labels"].items())
        ]
        models = [
            {
                "class_name": name,
                "kind": m["kind"],
                "version": m.get("version", 0),
                "trained_on": m.get("trained_on"),
            }
            for name, m in sorted(doc["models"].items())
        ]
        return {
            "id": doc["id"],
            "corpus_ref": doc["corpus_ref"],
            "view_state": doc["view_state"],
            "labels": labels,
            "models": models,
        }

    @app.post("/api/sessions", status_code=201)
    def create_session():
        doc = state.sessions.create(state.corpus_ref)
        return _session_view(doc)

    @app.get("/api/sessions/{sid}")
    def get_session(sid: str):
        return _session_view(_session_or_404(sid))

    @app.put("/api/sessions/{sid}/view")
    def put_view(sid: str, body: dict):
        doc = _session_or_404(sid)
        if not isinstance(body, dict):
            _fail(422, "invalid-request", "view state must be an object")
        with state.sessions.lock(sid):
            doc["view_state"] = body
            state.sessions.save(doc)
        return _session_view(doc)

    @app.put("/api/sessions/{sid}/labels")
    def put_label(sid: str, body: dict):
        doc = _session_or_404(sid)
        ref = body.get("episode_ref")
        label = body.get("label")
        if not isinstance(ref, str) or not ref:
            _fail(422, "invalid-request", "episode_ref required")
        if label not in (LABEL_POSITIVE, LABEL_NEGATIVE):
            _fail(422, "invalid-label", "label must be positive or negative")
        payload = state.registry.get(ref)
        with state.sessions.lock(sid):
            if payload is None:
                # relabeling something stored earlier is fine even if the
                # registry no longer knows the ref (e.g. after a restart)
                existing = doc["labels"].get(ref)
                if existing is None:
                    _fail(404, "unknown-episode",
                          f"episode {ref!r} has not been served by this process")
                payload = existing["episode"] | {"params": existing["params"]}
            doc["labels"][ref] = {
                "label": label,
                "params": payload["params"],
                "episode": {
                    "pair": payload["pair"],
                    "start": payload["start"],
                    "end": payload["end"],
                    "n_in": payload.get("n_in", 0),
                    "n_out": payload.get("n_out", 0),
                    "features": payload["features"],
                },
            }
            state.sessions.save(doc)
        view = doc.get("view_state")
        return {
            "episode_ref": ref,
            "label": label,
            "labels_total": len(doc["labels"]),
            "stale": _label_stale(doc["labels"][ref], view),
        }

    # ---- models -------------------------------------------------------------

    def _examples_from_labels(doc: dict) -> list[LabeledExample]:
        out = []
        for ref, entry in sorted(doc["labels"].items()):
            vec = FeatureVector.from_array(np.array(entry["episode"]["features"]))
            out.append(LabeledExample(ref, vec, entry["label"]))
        return out

    def _model_or_404(doc: dict, name: str):
        stored = doc["models"].get(name)
        if stored is None:
            _fail(404, "unknown-class", f"no model {name!r} in this session")
        return stored

    def _instantiate(doc: dict, name: str, seen=()):
        if name in seen:
            _fail(422, "invalid-combination", f"cycle through {name!r}")
        stored = _model_or_404(doc, name)
        if stored["kind"] == "forest":
            return ForestModel.from_json(stored["model"])
        members = [_instantiate(doc, m, (*seen, name)) for m in stored["members"]]
        return combine(members, stored["mode"])

    @app.post("/api/sessions/{sid}/models/{class_name}/train")
    def train_model(sid: str, class_name: str, body: dict | None = None):
        if class_name == "combined":
            _fail(422, "invalid-class", "'combined' is built by POST .../models/combined")
        doc = _session_or_404(sid)
        cfg_doc = (body or {}).get("config", {})
        try:
            config = ForestConfig(
                n_trees=cfg_doc.get("n_trees", 100),
                max_depth=cfg_doc.get("max_depth", 8),
                min_leaf=cfg_doc.get("min_leaf", 1),
                features_per_split=cfg_doc.get("features_per_split", 4),
                bootstrap=cfg_doc.get("bootstrap", True),
                rng_seed=cfg_doc.get("rng_seed", 0),
            )
        except (TypeError, ValueError) as e:
            _fail(422, "invalid-params", str(e))
        with state.sessions.lock(sid):
            examples = _examples_from_labels(doc)
            try:
                model = train(examples, config, class_name=class_name)
            except NeedsBothClassesError as e:
                _fail(422, e.code, str(e))
            except EmptyTrainingError as e:
                _fail(422, e.code, str(e))
            previous = doc["models"].get(class_name, {})
            version = previous.get("version", 0) + 1
            doc["models"][class_name] = {
                "kind": "forest",
                "model": model.to_json(),
                "version": version,
                "trained_on": len(examples),
                "trained_at": time.time(),
            }
            state.sessions.save(doc)
        view = doc.get("view_state")
        stale = [ref for ref, entry in sorted(doc["labels"].items())
                 if _label_stale(entry, view)]
        return {
            "class_name": class_name,
            "version": version,
            "trained_on": len(examples),
            "stale_labels": stale,
        }

    @app.get("/api/sessions/{sid}/models/{class_name}/status")
    def model_status(sid: str, class_name: str):
        doc = _session_or_404(sid)
        stored = _model_or_404(doc, class_name)
        return {
            "class_name": class_name,
            "kind": stored["kind"],
            "state": "ready",
            "version": stored.get("version", 0),
            "trained_on": stored.get("trained_on"),
            "trained_at": stored.get("trained_at"),
        }

    @app.post("/api/sessions/{sid}/models/combined", status_code=201)
    def make_combined(sid: str, body: dict):
        doc = _session_or_404(sid)
        members = body.get("members")
        mode = body.get("mode")
        name = body.get("name", "combined")
        if not isinstance(members, list) or not members:
            _fail(422, "empty-combination", "members must be a non-empty list")
        if mode not in ("and", "or"):
            _fail(422, "invalid-params", "mode must be 'and' or 'or'")
        for m in members:
            _model_or_404(doc, m)
        with state.sessions.lock(sid):
            previous = doc["models"].get(name, {})
            doc["models"][name] = {
                "kind": "combined",
                "members": members,
                "mode": mode,
                "version": previous.get("version", 0) + 1,
                "trained_on": None,
            }
            state.sessions.save(doc)
        _instantiate(doc, name)  # fail fast on cycles
        return {"class_name": name, "members": members, "mode": mode}

    def _registry_episodes(pair: str | None) -> list[tuple[str, dict]]:
        rows = state.registry.items()
        if pair:
            parts = pair.split(",")
            if len(parts) != 2:
                _fail(422, "invalid-pair", "pair filter expects 'a,b'")
            want = [parts[0], parts[1]]
            rows = [(r, p) for r, p in rows if p["pair"] == want]
        return sorted(rows, key=lambda kv: (kv[1]["pair"], kv[1]["start"], kv[0]))

    @app.get("/api/sessions/{sid}/models/{class_name}/predictions")
    def predictions(
        sid: str,
        class_name: str,
        min_confidence: float = Query(default=0.0, ge=0.0, le=1.0),
        polarity: str = Query(default="any"),
        pair: str | None = Query(default=None),
    ):
        if polarity not in ("positive", "negative", "any"):
            _fail(422, "invalid-params", f"bad polarity {polarity!r}")
        doc = _session_or_404(sid)
        model = _instantiate(doc, class_name)
        rows = _registry_episodes(pair)
        by_ref = {ref: payload for ref, payload in rows}
        flat = [
            model.predict(
                FeatureVector.from_array(np.array(payload["features"])),
                episode_ref=ref,
            )
            for ref, payload in rows
        ]
        if polarity == "any":
            kept = set(filter_confident(flat, min_confidence, LABEL_POSITIVE))
            kept |= set(filter_confident(flat, min_confidence, LABEL_NEGATIVE))
            flat = [p for p in flat if p in kept]
        else:
            flat = filter_confident(flat, min_confidence, polarity)
        return {
            "class_name": class_name,
            "min_confidence": min_confidence,
            "polarity": polarity,
            "predictions": [
                {
                    "episode_ref": p.episode_ref,
                    "label": p.label,
                    "confidence": p.confidence,
                    "pair": by_ref[p.episode_ref]["pair"],
                    "start": by_ref[p.episode_ref]["start"],
                    "end": by_ref[p.episode_ref]["end"],
                }
                for p in flat
            ],
        }

    @app.get("/api/sessions/{sid}/models/{class_name}/uncertain")
    def uncertain(
        sid: str,
        class_name: str,
        limit: int = Query(default=20, ge=1, le=1000),
        pair: str | None = Query(default=None),
    ):
        doc = _session_or_404(sid)
        model = _instantiate(doc, class_name)
        episodes = []
        payloads = {}
        for ref, payload in _registry_episodes(pair):
            ep = Episode(
                start=payload["start"],
                end=payload["end"],
                pair=tuple(payload["pair"]),
                event_indices=(0,),
                ref=ref,
                features=FeatureVector.from_array(np.array(payload["features"])),
            )
            episodes.append(ep)
            payloads[ref] = payload
        ranked = rank_uncertain(model, episodes)[:limit]
        return {
            "class_name": class_name,
            "uncertain": [
                {
                    "episode_ref": ref,
                    "confidence": conf,
                    "pair": payloads[ref]["pair"],
                    "start": payloads[ref]["start"],
                    "end": payloads[ref]["end"],
                }
                for ref, conf in ranked
            ],
        }

    if ui_dir:
        ui_path = Path(ui_dir)
        if ui_path.is_dir():
            app.mount("/", StaticFiles(directory=ui_path, html=True), name="ui")

    return app

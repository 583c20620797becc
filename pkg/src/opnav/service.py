"""HTTP/JSON service: assistant, corpus browsing, analytics, telemetry.

One process hosts the routing layer, the assistant invocation and the
knowledge resources. The (tree, index, synonyms) snapshot is immutable and
swapped atomically on reload, so concurrent asks observe either the old or
the new corpus, never a mix. Session updates and telemetry appends are
serialized behind one lock.
"""
from __future__ import annotations

import sys
import threading
import time
from dataclasses import dataclass
from pathlib import Path

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from . import analytics, reports
from .assistant import (
    Answer,
    AssistantConfig,
    EmptyQuestion,
    EventKind,
    IllegalTransition,
    InteractionEvent,
    SessionEnded,
    SessionState,
    StorageFailure,
    TelemetryLog,
    UnknownNode,
    answer_question,
    related_resources,
    transition,
    usage_summary,
)
from .corpus import ContentTree, SynonymTable, load_synonyms, parse_corpus, validate
from .index import SearchIndex, build_index

API_VERSION = 1

CLIENT_EVENT_KINDS = (
    EventKind.OPEN_CONTENT,
    EventKind.FOLLOW_SUGGESTION,
    EventKind.TYPE_KEYWORDS,
    EventKind.BACK,
    EventKind.END_SESSION,
)


class StartupError(Exception):
    """Configuration or corpus problem that must refuse service startup."""


@dataclass(frozen=True)
class ServiceConfig:
    corpus_path: str
    synonyms_path: str
    telemetry_path: str
    host: str = "127.0.0.1"
    port: int = 8080
    refinement_threshold: int = 10
    keyword_boost: float = 3.0
    top_k: int = 6
    static_assets_path: str | None = None

    def validate_paths(self) -> None:
        if not 0 < self.port < 65536:
            raise StartupError(f"invalid port {self.port}")
        for label, path in (("corpus", self.corpus_path), ("synonyms", self.synonyms_path)):
            if not Path(path).is_file():
                raise StartupError(f"{label} file not found: {path}")
        if self.static_assets_path and not Path(self.static_assets_path).is_dir():
            raise StartupError(f"static assets directory not found: {self.static_assets_path}")


def load_config(path: str) -> ServiceConfig:
    """Read the TOML config; keys live in the [service] table."""
    try:
        import tomllib
    except ModuleNotFoundError:
        import tomli as tomllib
    with open(path, "rb") as fh:
        raw = tomllib.load(fh)
    section = raw.get("service", raw)
    known = {
        "corpus_path", "synonyms_path", "telemetry_path", "host", "port",
        "refinement_threshold", "keyword_boost", "top_k", "static_assets_path",
    }
    unknown = set(section) - known
    if unknown:
        raise StartupError(f"unknown config keys: {', '.join(sorted(unknown))}")
    missing = {"corpus_path", "synonyms_path", "telemetry_path"} - set(section)
    if missing:
        raise StartupError(f"missing config keys: {', '.join(sorted(missing))}")
    return ServiceConfig(**section)


@dataclass(frozen=True)
class Snapshot:
    tree: ContentTree
    index: SearchIndex
    synonyms: SynonymTable


class ServiceState:
    def __init__(self, config: ServiceConfig):
        config.validate_paths()
        self.config = config
        self.snapshot = self._load()
        self.telemetry = TelemetryLog(config.telemetry_path)
        self.sessions: dict[str, SessionState] = {}
        self.nonces: dict[str, tuple[int, dict]] = {}
        self.lock = threading.Lock()
        self.assistant_config = AssistantConfig(
            max_alternates=max(config.top_k - 1, 0),
            refinement_threshold=config.refinement_threshold,
        )

    def _load(self) -> Snapshot:
        tree = parse_corpus(Path(self.config.corpus_path).read_text(encoding="utf-8"))
        violations = validate(tree)
        if violations:
            first = violations[0]
            raise StartupError(
                f"corpus invalid: {first.rule} on node {first.node_id!r}: {first.message}"
            )
        synonyms = load_synonyms(Path(self.config.synonyms_path).read_text(encoding="utf-8"))
        index = build_index(tree, boost=self.config.keyword_boost)
        return Snapshot(tree=tree, index=index, synonyms=synonyms)

    def reload(self) -> Snapshot:
        snapshot = self._load()
        self.snapshot = snapshot  # single reference assignment: atomic swap
        return snapshot

    def next_timestamp(self, session: SessionState) -> int:
        return max(int(time.time() * 1000), session.last_timestamp())


class AskRequest(BaseModel):
    session_id: str
    question: str
    nonce: int | None = None


class EventRequest(BaseModel):
    kind: str
    payload: str = ""


class MwuRequest(BaseModel):
    a: list[float]
    b: list[float]
    alpha: float = 0.05
    method: str = "normal"


def _error(status: int, code: str, message: str, detail: str = "") -> JSONResponse:
    return JSONResponse(
        status_code=status,
        content={"code": code, "message": message, "detail": detail},
    )


def _answer_payload(answer: Answer, session: SessionState) -> dict:
    refinement = None
    if answer.refinement is not None:
        refinement = {
            "message": answer.refinement.message,
            "discriminating_terms": list(answer.refinement.discriminating_terms),
        }
    return {
        "session_id": session.session_id,
        "state": session.state.value,
        "answer": {
            "primary_node": answer.primary_node,
            "snippet": answer.snippet,
            "alternates": [
                {
                    "node_id": hit.node_id,
                    "score": hit.score,
                    "matched_terms": sorted(hit.matched_terms),
                }
                for hit in answer.alternates
            ],
            "suggestions": [
                {"node_id": node_id, "reason": reason}
                for node_id, reason in answer.suggestions
            ],
            "refinement": refinement,
        },
    }


def _node_payload(tree: ContentTree, node_id: str) -> dict:
    node = tree.nodes[node_id]
    return {
        "id": node.id,
        "title": node.title,
        "type": node.node_type,
        "body": node.body,
        "keywords": sorted(node.keywords),
        "parent": node.parent,
        "children": [
            {"id": c, "title": tree.nodes[c].title, "type": tree.nodes[c].node_type}
            for c in node.children
        ],
        "related": list(node.related),
        "media": list(node.media_refs),
    }


def _tree_skeleton(tree: ContentTree, node_id: str) -> dict:
    node = tree.nodes[node_id]
    return {
        "id": node.id,
        "title": node.title,
        "type": node.node_type,
        "children": [_tree_skeleton(tree, c) for c in node.children],
    }


def create_app(config: ServiceConfig) -> FastAPI:
    """Build the service with corpus parsed and index built up front."""
    state = ServiceState(config)
    app = FastAPI(title="opnav", version=str(API_VERSION))
    app.state.service = state

    @app.exception_handler(RequestValidationError)
    async def _on_validation(request: Request, exc: RequestValidationError):
        return _error(400, "bad_request", "invalid request body", str(exc.errors()))

    @app.exception_handler(Exception)
    async def _on_internal(request: Request, exc: Exception):
        return _error(500, "internal", "internal error", repr(exc))

    @app.get("/health")
    def health():
        snap = state.snapshot
        return {
            "status": "ok",
            "corpus_version": snap.tree.version,
            "doc_count": snap.index.doc_count,
            "api_version": API_VERSION,
        }

    @app.post("/ask")
    def ask(body: AskRequest):
        snap = state.snapshot
        with state.lock:
            session = state.sessions.get(body.session_id) or SessionState(
                session_id=body.session_id
            )
            if body.nonce is not None:
                cached = state.nonces.get(body.session_id)
                if cached is not None and cached[0] == body.nonce:
                    return cached[1]
            try:
                answer, new_session = answer_question(
                    session,
                    body.question,
                    snap.index,
                    snap.tree,
                    snap.synonyms,
                    state.assistant_config,
                    now_ms=state.next_timestamp(session),
                )
            except EmptyQuestion as exc:
                return _error(400, "bad_request", "question is empty", str(exc))
            except SessionEnded as exc:
                return _error(409, "conflict", "session has ended", str(exc))
            except IllegalTransition as exc:
                return _error(409, "conflict", "question not allowed now", str(exc))
            try:
                for event in new_session.history[len(session.history):]:
                    state.telemetry.append(event)
            except StorageFailure as exc:
                return _error(500, "internal", "telemetry append failed", str(exc))
            state.sessions[body.session_id] = new_session
            payload = _answer_payload(answer, new_session)
            if body.nonce is not None:
                state.nonces[body.session_id] = (body.nonce, payload)
            return payload

    @app.get("/nodes/{node_id}")
    def get_node(node_id: str):
        snap = state.snapshot
        if node_id not in snap.tree.nodes:
            return _error(404, "not_found", f"no node {node_id!r}")
        return _node_payload(snap.tree, node_id)

    @app.get("/nodes/{node_id}/related")
    def get_related(node_id: str, k: int = 5):
        snap = state.snapshot
        try:
            pairs = related_resources(snap.tree, node_id, k=max(k, 1))
        except UnknownNode:
            return _error(404, "not_found", f"no node {node_id!r}")
        return {"node_id": node_id, "related": [
            {"node_id": nid, "reason": reason} for nid, reason in pairs
        ]}

    @app.get("/tree")
    def get_tree():
        snap = state.snapshot
        return _tree_skeleton(snap.tree, snap.tree.root)

    @app.post("/sessions/{session_id}/events")
    def post_event(session_id: str, body: EventRequest):
        snap = state.snapshot
        try:
            kind = EventKind(body.kind)
        except ValueError:
            return _error(400, "bad_request", f"unknown event kind {body.kind!r}")
        if kind not in CLIENT_EVENT_KINDS:
            return _error(400, "bad_request", f"event kind {kind.value} is server-originated")
        if kind in (EventKind.OPEN_CONTENT, EventKind.FOLLOW_SUGGESTION):
            if body.payload not in snap.tree.nodes:
                return _error(404, "not_found", f"no node {body.payload!r}")
        with state.lock:
            session = state.sessions.get(session_id) or SessionState(session_id=session_id)
            event = InteractionEvent(
                timestamp=state.next_timestamp(session),
                session_id=session_id,
                kind=kind,
                payload=body.payload,
            )
            try:
                new_session = transition(session, event)
            except IllegalTransition as exc:
                return _error(409, "conflict", str(exc))
            try:
                state.telemetry.append(event)
            except StorageFailure as exc:
                return _error(500, "internal", "telemetry append failed", str(exc))
            state.sessions[session_id] = new_session
            return {
                "session_id": session_id,
                "state": new_session.state.value,
                "current_node": new_session.current_node,
            }

    @app.get("/reports/usage")
    def usage():
        snap = state.snapshot
        with state.lock:
            report = usage_summary(state.telemetry, snap.tree)
        return {
            "node_query_counts": report.node_query_counts,
            "session_question_counts": report.session_question_counts,
            "top_procedures": [
                {"node_id": nid, "count": count} for nid, count in report.top_procedures
            ],
        }

    @app.post("/analytics/learning")
    async def analytics_learning(request: Request):
        text = (await request.body()).decode("utf-8")
        try:
            matrix = reports.read_setup_matrix(text)
            return reports.learning_summary(matrix)
        except (reports.BadDataset, analytics.InsufficientData, ValueError) as exc:
            return _error(400, "bad_request", "bad dataset", str(exc))

    @app.post("/analytics/mwu")
    def analytics_mwu(body: MwuRequest):
        try:
            result = analytics.mann_whitney(body.a, body.b, alpha=body.alpha, method=body.method)
        except (analytics.EmptySample, analytics.ExactWithTies, ValueError) as exc:
            return _error(400, "bad_request", "bad samples", str(exc))
        return reports.mwu_dict(result)

    @app.post("/admin/reload")
    def admin_reload():
        try:
            snap = state.reload()
        except Exception as exc:  # report, never half-swap
            return _error(500, "internal", "reload failed", str(exc))
        return {
            "status": "reloaded",
            "corpus_version": snap.tree.version,
            "doc_count": snap.index.doc_count,
        }

    if config.static_assets_path:
        from fastapi.staticfiles import StaticFiles

        app.mount(
            "/", StaticFiles(directory=config.static_assets_path, html=True), name="console"
        )

    return app


def start_service(config: ServiceConfig) -> None:
    """Validate, build, and serve. Refuses to start on the first violation."""
    import uvicorn

    try:
        app = create_app(config)
    except Exception as exc:
        print(f"startup refused: {exc}", file=sys.stderr)
        raise
    uvicorn.run(app, host=config.host, port=config.port, log_level="warning")

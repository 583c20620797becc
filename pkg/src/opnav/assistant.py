"""Question answering, proactive suggestions, session state machine, telemetry.

The assistant answers free-text questions by expanding them with synonyms,
ranking corpus nodes, and attaching related resources the operator may want
next. Every interaction is an event: events drive the per-session state
machine and are appended to a durable telemetry log that usage reports are
replayed from.
"""
from __future__ import annotations

import json
import time
from dataclasses import dataclass, replace
from enum import Enum

from .corpus import ContentTree, SynonymTable
from .index import (
    DEFAULT_STOPWORDS,
    EmptyQuery,
    RefinementSuggestion,
    SearchHit,
    SearchIndex,
    search,
    suggest_refinement,
    tokenize,
)

PROCEDURE_TYPES = frozenset({"operation", "maintenance", "safety"})


class Phase(str, Enum):
    IDLE = "Idle"
    QUESTION_PENDING = "QuestionPending"
    ANSWER_DELIVERED = "AnswerDelivered"
    CONTENT_VIEWING = "ContentViewing"
    MANUAL_SEARCH = "ManualSearch"
    ENDED = "Ended"


class EventKind(str, Enum):
    ASK_QUESTION = "AskQuestion"
    ANSWER_READY = "AnswerReady"
    OPEN_CONTENT = "OpenContent"
    FOLLOW_SUGGESTION = "FollowSuggestion"
    TYPE_KEYWORDS = "TypeKeywords"
    BACK = "Back"
    END_SESSION = "EndSession"


class SessionEnded(Exception):
    """The session reached its absorbing end state."""


class EmptyQuestion(Exception):
    """Blank question text."""


class IllegalTransition(Exception):
    """Event not allowed in the current state; signals a client bug."""

    def __init__(self, state: Phase, kind: EventKind):
        super().__init__(f"event {kind.value} not allowed in state {state.value}")
        self.state = state
        self.kind = kind


class UnknownNode(Exception):
    def __init__(self, node_id: str):
        super().__init__(f"unknown node {node_id!r}")
        self.node_id = node_id


class InvalidTimestamp(Exception):
    """Timestamps must be non-decreasing within a session."""


class StorageFailure(Exception):
    """Telemetry could not be persisted."""


@dataclass(frozen=True)
class InteractionEvent:
    timestamp: int  # milliseconds
    session_id: str
    kind: EventKind
    payload: str = ""


@dataclass(frozen=True)
class SessionState:
    session_id: str
    state: Phase = Phase.IDLE
    current_node: str | None = None
    history: tuple[InteractionEvent, ...] = ()

    def last_timestamp(self) -> int:
        return self.history[-1].timestamp if self.history else 0


# State machine rows. Asking a follow-up question is legal from every state
# where an answer or search result is on screen; EndSession is legal anywhere
# and Ended only loops on itself.
TRANSITIONS: dict[tuple[Phase, EventKind], Phase] = {
    (Phase.IDLE, EventKind.ASK_QUESTION): Phase.QUESTION_PENDING,
    (Phase.QUESTION_PENDING, EventKind.ANSWER_READY): Phase.ANSWER_DELIVERED,
    (Phase.ANSWER_DELIVERED, EventKind.OPEN_CONTENT): Phase.CONTENT_VIEWING,
    (Phase.ANSWER_DELIVERED, EventKind.FOLLOW_SUGGESTION): Phase.CONTENT_VIEWING,
    (Phase.ANSWER_DELIVERED, EventKind.TYPE_KEYWORDS): Phase.MANUAL_SEARCH,
    (Phase.ANSWER_DELIVERED, EventKind.ASK_QUESTION): Phase.QUESTION_PENDING,
    (Phase.CONTENT_VIEWING, EventKind.BACK): Phase.ANSWER_DELIVERED,
    (Phase.CONTENT_VIEWING, EventKind.ASK_QUESTION): Phase.QUESTION_PENDING,
    (Phase.MANUAL_SEARCH, EventKind.ANSWER_READY): Phase.ANSWER_DELIVERED,
    (Phase.MANUAL_SEARCH, EventKind.ASK_QUESTION): Phase.QUESTION_PENDING,
}
for _phase in Phase:
    TRANSITIONS[(_phase, EventKind.END_SESSION)] = Phase.ENDED


def transition(state: SessionState, event: InteractionEvent) -> SessionState:
    """Apply one event per the transition table; anything else is illegal."""
    key = (state.state, event.kind)
    if key not in TRANSITIONS:
        raise IllegalTransition(state.state, event.kind)
    target = TRANSITIONS[key]
    current = state.current_node
    if event.kind in (EventKind.OPEN_CONTENT, EventKind.FOLLOW_SUGGESTION):
        current = event.payload or None
    elif event.kind == EventKind.BACK:
        current = None
    return replace(
        state, state=target, current_node=current, history=state.history + (event,)
    )


def expand_query(terms: list[str], synonyms: SynonymTable) -> list[str]:
    """Append group-mates of each term, originals first, no duplicates."""
    out = list(dict.fromkeys(terms))
    seen = set(out)
    for term in terms:
        group = synonyms.group_of(term)
        if group is None:
            continue
        for mate in group:
            if mate not in seen:
                seen.add(mate)
                out.append(mate)
    return out


def _jaccard(a: frozenset[str], b: frozenset[str]) -> float:
    if not a or not b:
        return 0.0
    union = len(a | b)
    return len(a & b) / union if union else 0.0


def related_resources(
    tree: ContentTree, node_id: str, k: int = 5, jaccard_threshold: float = 0.25
) -> list[tuple[str, str]]:
    """Rank resources near a node: explicit links, then structure, then
    keyword overlap. Returns (node id, reason) pairs, never the node itself.
    """
    if node_id not in tree.nodes:
        raise UnknownNode(node_id)
    node = tree.nodes[node_id]

    best: dict[str, int] = {}  # candidate -> priority (lower wins)
    for ref in node.related:
        best.setdefault(ref, 0)
    structural: list[str] = []
    if node.parent is not None:
        parent = tree.nodes[node.parent]
        structural.append(parent.id)
        structural.extend(c for c in parent.children if c != node_id)
    structural.extend(node.children)
    for cand in structural:
        if cand not in best:
            best[cand] = 1
    for other_id, other in tree.nodes.items():
        if other_id == node_id or other_id in best:
            continue
        if _jaccard(node.keywords, other.keywords) >= jaccard_threshold:
            best[other_id] = 2

    best.pop(node_id, None)
    reasons = {0: "explicit", 1: "structure", 2: "keywords"}
    ranked = sorted(
        best.items(),
        key=lambda it: (it[1], -_jaccard(node.keywords, tree.nodes[it[0]].keywords), it[0]),
    )
    return [(cand, reasons[prio]) for cand, prio in ranked[:k]]


@dataclass(frozen=True)
class AssistantConfig:
    max_alternates: int = 5
    max_suggestions: int = 5
    refinement_threshold: int = 10
    snippet_chars: int = 400
    jaccard_threshold: float = 0.25
    stopwords: frozenset[str] = DEFAULT_STOPWORDS


@dataclass(frozen=True)
class Answer:
    primary_node: str | None
    snippet: str = ""
    alternates: tuple[SearchHit, ...] = ()
    suggestions: tuple[tuple[str, str], ...] = ()
    refinement: RefinementSuggestion | None = None


NO_RESULTS_MESSAGE = (
    "No resources matched your question. Try different wording or other keywords."
)


def answer_question(
    session: SessionState,
    question: str,
    index: SearchIndex,
    tree: ContentTree,
    synonyms: SynonymTable,
    config: AssistantConfig = AssistantConfig(),
    now_ms: int | None = None,
) -> tuple[Answer, SessionState]:
    """Run the full pipeline: tokenize, expand, search, rank, suggest.

    Appends AskQuestion and AnswerReady events and leaves the session in
    AnswerDelivered.
    """
    if session.state is Phase.ENDED:
        raise SessionEnded(f"session {session.session_id} has ended")
    if not question.strip():
        raise EmptyQuestion("question is blank")

    terms = tokenize(question, config.stopwords)
    expanded = expand_query(terms, synonyms)
    try:
        hits = search(index, expanded, k=max(index.doc_count, 1))
    except EmptyQuery:
        hits = []

    if hits:
        primary = hits[0]
        body = tree.nodes[primary.node_id].body
        suggestions = tuple(
            related_resources(
                tree, primary.node_id, k=config.max_suggestions,
                jaccard_threshold=config.jaccard_threshold,
            )
        )
        answer = Answer(
            primary_node=primary.node_id,
            snippet=body[: config.snippet_chars],
            alternates=tuple(hits[1 : 1 + config.max_alternates]),
            suggestions=suggestions,
            refinement=suggest_refinement(hits, index, config.refinement_threshold),
        )
    else:
        answer = Answer(
            primary_node=None,
            refinement=RefinementSuggestion(message=NO_RESULTS_MESSAGE),
        )

    ts = max(int(time.time() * 1000) if now_ms is None else now_ms, session.last_timestamp())
    ask = InteractionEvent(ts, session.session_id, EventKind.ASK_QUESTION, question)
    ready = InteractionEvent(
        ts + 1, session.session_id, EventKind.ANSWER_READY, answer.primary_node or ""
    )
    new_session = transition(transition(session, ask), ready)
    return answer, new_session


class TelemetryLog:
    """Append-only interaction log; one JSON object per line when backed by
    a file. Replays existing lines on open so ordering checks survive
    restarts.
    """

    def __init__(self, path: str | None = None):
        self.path = path
        self._events: list[InteractionEvent] = []
        self._last_ts: dict[str, int] = {}
        if path is not None:
            try:
                with open(path, "r", encoding="utf-8") as fh:
                    for line in fh:
                        line = line.strip()
                        if line:
                            self._ingest(_event_from_json(line))
            except FileNotFoundError:
                pass
            except OSError as exc:
                raise StorageFailure(str(exc)) from exc

    def __len__(self) -> int:
        return len(self._events)

    def events(self) -> tuple[InteractionEvent, ...]:
        return tuple(self._events)

    def _ingest(self, event: InteractionEvent) -> None:
        last = self._last_ts.get(event.session_id)
        if last is not None and event.timestamp < last:
            raise InvalidTimestamp(
                f"timestamp {event.timestamp} precedes {last} in session {event.session_id}"
            )
        self._events.append(event)
        self._last_ts[event.session_id] = event.timestamp

    def append(self, event: InteractionEvent) -> None:
        self._ingest(event)
        if self.path is not None:
            try:
                with open(self.path, "a", encoding="utf-8") as fh:
                    fh.write(_event_to_json(event) + "\n")
                    fh.flush()
            except OSError as exc:
                self._events.pop()
                raise StorageFailure(str(exc)) from exc


def _event_to_json(event: InteractionEvent) -> str:
    return json.dumps(
        {
            "ts": event.timestamp,
            "session": event.session_id,
            "kind": event.kind.value,
            "payload": event.payload,
        },
        ensure_ascii=False,
    )


def _event_from_json(line: str) -> InteractionEvent:
    raw = json.loads(line)
    return InteractionEvent(
        timestamp=int(raw["ts"]),
        session_id=str(raw["session"]),
        kind=EventKind(raw["kind"]),
        payload=str(raw.get("payload", "")),
    )


def record_event(log: TelemetryLog, event: InteractionEvent) -> None:
    log.append(event)


@dataclass(frozen=True)
class UsageReport:
    node_query_counts: dict[str, int]
    session_question_counts: dict[str, int]
    top_procedures: tuple[tuple[str, int], ...]


def usage_summary(log: TelemetryLog, tree: ContentTree) -> UsageReport:
    """Aggregate the log deterministically: counts come from replay alone."""
    node_counts: dict[str, int] = {}
    session_counts: dict[str, int] = {}
    for event in log.events():
        if event.kind is EventKind.ASK_QUESTION:
            session_counts[event.session_id] = session_counts.get(event.session_id, 0) + 1
        elif event.kind is EventKind.ANSWER_READY and event.payload:
            node_counts[event.payload] = node_counts.get(event.payload, 0) + 1

    procedures = [
        (node_id, count)
        for node_id, count in node_counts.items()
        if node_id in tree.nodes and tree.nodes[node_id].node_type in PROCEDURE_TYPES
    ]
    procedures.sort(key=lambda it: (-it[1], it[0]))
    return UsageReport(
        node_query_counts=dict(sorted(node_counts.items())),
        session_question_counts=dict(sorted(session_counts.items())),
        top_procedures=tuple(procedures),
    )

"""HTTP surface: exercises, execution, hints, submissions, telemetry.

Endpoints:

    GET  /exercises                      exercise summaries
    GET  /exercises/{id}                 description, difficulty, schema image
    POST /exercises/{id}/execute         run a query, score the result
    POST /exercises/{id}/hint            next-step hint for the current query
    POST /exercises/{id}/submit          final submission with hint penalty
    POST /events                         telemetry batch (edits, focus, use-hint)
    GET  /exercises/{id}/graph.dot       DOT export of the exercise MDP

Every state-changing endpoint appends exactly one event, so replaying the
event log reconstructs per-session hint counts. A session is the stretch
of (user, exercise) events since the previous submit.
"""

from __future__ import annotations

from dataclasses import dataclass
from datetime import datetime, timezone

from fastapi import FastAPI
from fastapi.responses import JSONResponse, PlainTextResponse
from pydantic import BaseModel

from .config import ServiceConfig
from .errors import (
    EmptySolution,
    ExecError,
    FormatError,
    NoHintAvailable,
    ParseError,
    UnknownExercise,
)
from .executor import execute
from .hints import generate_hint
from .mdp import to_dot
from .parse import parse
from .scoring import score
from .store import ActionEvent, AttemptRecord, Store


@dataclass
class SessionScore:
    raw_score: float
    hints_used: int
    penalty_per_hint: int
    final_score: float

    def to_payload(self) -> dict:
        return {
            "raw_score": self.raw_score,
            "hints_used": self.hints_used,
            "penalty_per_hint": self.penalty_per_hint,
            "final_score": self.final_score,
        }


def apply_hint_penalty(raw_score: float, hints_used: int, penalty_per_hint: int) -> SessionScore:
    final = max(0.0, raw_score - hints_used * penalty_per_hint)
    return SessionScore(
        raw_score=raw_score,
        hints_used=hints_used,
        penalty_per_hint=penalty_per_hint,
        final_score=final,
    )


def count_session_hints(store: Store, user: str, exercise_id: str) -> int:
    """hint_employed events for (user, exercise) since the last submit."""
    count = 0
    for event in store.read_events(user=user, exercise_id=exercise_id):
        if event.kind == "submit":
            count = 0
        elif event.kind == "hint_employed":
            count += 1
    return count


class QueryRequest(BaseModel):
    query: str
    user: str = "anonymous"


class EventIn(BaseModel):
    user: str
    exercise_id: str
    timestamp: str = ""
    kind: str
    query_snapshot: str = ""


def _now() -> str:
    return datetime.now(timezone.utc).isoformat()


def create_app(store: Store, config: ServiceConfig | None = None) -> FastAPI:
    config = config or store.config
    app = FastAPI(title="sqlhinter")

    def _error(status: int, kind: str, detail: str) -> JSONResponse:
        return JSONResponse(status_code=status, content={"error": kind, "detail": detail})

    @app.exception_handler(UnknownExercise)
    async def _unknown(request, exc):
        return _error(404, "UnknownExercise", str(exc))

    @app.exception_handler(ParseError)
    async def _parse(request, exc):
        return _error(400, "ParseError", str(exc))

    @app.exception_handler(ExecError)
    async def _exec(request, exc):
        return _error(400, exc.kind, str(exc))

    @app.exception_handler(EmptySolution)
    async def _empty(request, exc):
        return _error(400, "EmptySolution", str(exc))

    @app.exception_handler(NoHintAvailable)
    async def _nohint(request, exc):
        return _error(409, "NoHintAvailable", str(exc))

    @app.get("/exercises")
    def list_exercises():
        return [b.summary() for b in store.exercises.values()]

    @app.get("/exercises/{exercise_id}")
    def get_exercise(exercise_id: str):
        bundle = store.exercise(exercise_id)
        return {
            "id": bundle.id,
            "description": bundle.description,
            "difficulty": bundle.difficulty,
            "schema": bundle.schema,
            "schema_image": bundle.schema_image,
            "penalty_per_hint": config.penalty_per_hint.get(bundle.difficulty, 0),
        }

    @app.post("/exercises/{exercise_id}/execute")
    def execute_query(exercise_id: str, body: QueryRequest):
        bundle = store.exercise(exercise_id)
        tree = parse(body.query)
        matrix = execute(tree, store.schema_for(bundle))
        result = score(matrix, store.ideal_matrix(bundle), bundle.evaluation_rule)
        store.persist_event(
            ActionEvent(
                user=body.user,
                exercise_id=exercise_id,
                timestamp=_now(),
                kind="execute",
                query_snapshot=body.query,
            )
        )
        return {"result": matrix.to_payload(), "score": result.percent}

    @app.post("/exercises/{exercise_id}/hint")
    def hint_query(exercise_id: str, body: QueryRequest):
        store.exercise(exercise_id)
        graph = store.get_mdp(exercise_id)
        tree = parse(body.query)
        hint = generate_hint(graph, tree)
        store.persist_event(
            ActionEvent(
                user=body.user,
                exercise_id=exercise_id,
                timestamp=_now(),
                kind="hint_requested",
                query_snapshot=body.query,
            )
        )
        return hint.to_payload()

    @app.post("/exercises/{exercise_id}/submit")
    def submit_query(exercise_id: str, body: QueryRequest):
        bundle = store.exercise(exercise_id)
        tree = parse(body.query)
        matrix = execute(tree, store.schema_for(bundle))
        result = score(matrix, store.ideal_matrix(bundle), bundle.evaluation_rule)
        hints_used = count_session_hints(store, body.user, exercise_id)
        session = apply_hint_penalty(
            result.percent, hints_used, config.penalty_per_hint.get(bundle.difficulty, 0)
        )
        now = _now()
        store.add_attempt(
            AttemptRecord(
                query_text=body.query,
                score=result.percent,
                user=body.user,
                schema=bundle.schema,
                exercise_id=exercise_id,
                timestamp=now,
            )
        )
        store.persist_event(
            ActionEvent(
                user=body.user,
                exercise_id=exercise_id,
                timestamp=now,
                kind="submit",
                query_snapshot=body.query,
            )
        )
        return session.to_payload()

    @app.post("/events")
    def post_events(events: list[EventIn]):
        accepted = 0
        rejected = []
        for i, entry in enumerate(events):
            data = entry.model_dump()
            if not data.get("timestamp"):
                data["timestamp"] = _now()
            try:
                store.persist_event(ActionEvent.from_dict(data))
                accepted += 1
            except FormatError as exc:
                rejected.append({"index": i, "reason": str(exc)})
        return {"accepted": accepted, "rejected": rejected}

    @app.get("/exercises/{exercise_id}/graph.dot")
    def graph_dot(exercise_id: str):
        store.exercise(exercise_id)
        graph = store.get_mdp(exercise_id)
        return PlainTextResponse(to_dot(graph))

    return app

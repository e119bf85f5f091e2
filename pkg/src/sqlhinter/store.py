"""File-backed store: schemas, exercise bundles, attempts, events, MDP cache.

Everything persists as plain files under one data directory:

    data/
      schemas/<name>.json      typed tables with rows
      exercises/<id>.json      exercise bundles
      attempts.jsonl           one AttemptRecord per line, append-only
      events.jsonl             one ActionEvent per line, append-only

Attempt ingest deduplicates on a content hash so re-ingesting a file is a
no-op. Built MDPs live in an in-memory cache keyed by exercise id; each
entry carries a fingerprint of the contributing attempt hashes and ideal
texts, so any ingest touching an exercise invalidates exactly that entry.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

from .config import ServiceConfig
from .errors import (
    ExecError,
    FormatError,
    ParseError,
    SchemaError,
    UnknownExercise,
)
from .executor import ResultMatrix, Schema, execute, load_schema
from .mdp import MdpGraph, build_mdp, run_value_iteration
from .parse import parse
from .scoring import EvaluationRule, score
from .steps import incomplete_reason

DIFFICULTIES = ("easy", "moderate", "difficult")

EVENT_KINDS = {
    "edit",
    "execute",
    "hint_requested",
    "hint_employed",
    "focus_lost",
    "focus_gained",
    "submit",
}


@dataclass(frozen=True)
class AttemptRecord:
    query_text: str
    score: float
    user: str
    schema: str
    exercise_id: str
    timestamp: str

    def to_dict(self) -> dict:
        return {
            "query_text": self.query_text,
            "score": self.score,
            "user": self.user,
            "schema": self.schema,
            "exercise_id": self.exercise_id,
            "timestamp": self.timestamp,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "AttemptRecord":
        missing = [k for k in ("query_text", "score", "user", "schema", "exercise_id", "timestamp") if k not in data]
        if missing:
            raise FormatError("MissingField", ", ".join(missing))
        try:
            score_value = float(data["score"])
        except (TypeError, ValueError):
            raise FormatError("BadScore", repr(data["score"]))
        if not (0.0 <= score_value <= 100.0):
            raise FormatError("BadScore", f"{score_value} outside [0, 100]")
        return cls(
            query_text=str(data["query_text"]),
            score=score_value,
            user=str(data["user"]),
            schema=str(data["schema"]),
            exercise_id=str(data["exercise_id"]),
            timestamp=str(data["timestamp"]),
        )

    def content_hash(self) -> str:
        canonical = json.dumps(self.to_dict(), sort_keys=True)
        return hashlib.sha256(canonical.encode()).hexdigest()


@dataclass(frozen=True)
class ActionEvent:
    user: str
    exercise_id: str
    timestamp: str
    kind: str
    query_snapshot: str = ""

    def to_dict(self) -> dict:
        return {
            "user": self.user,
            "exercise_id": self.exercise_id,
            "timestamp": self.timestamp,
            "kind": self.kind,
            "query_snapshot": self.query_snapshot,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ActionEvent":
        missing = [k for k in ("user", "exercise_id", "timestamp", "kind") if k not in data]
        if missing:
            raise FormatError("MissingField", ", ".join(missing))
        kind = str(data["kind"])
        if kind not in EVENT_KINDS:
            raise FormatError("BadKind", kind)
        snapshot = str(data.get("query_snapshot", "") or "")
        if kind in ("execute", "hint_employed") and not snapshot:
            raise FormatError("MissingField", f"query_snapshot required for {kind}")
        return cls(
            user=str(data["user"]),
            exercise_id=str(data["exercise_id"]),
            timestamp=str(data["timestamp"]),
            kind=kind,
            query_snapshot=snapshot,
        )


@dataclass
class ExerciseBundle:
    id: str
    description: str
    difficulty: str
    schema: str
    schema_image: str
    ideal_solutions: list[str]
    evaluation_rule: EvaluationRule

    def summary(self) -> dict:
        return {
            "id": self.id,
            "description": self.description,
            "difficulty": self.difficulty,
            "schema": self.schema,
        }


def load_exercise_bundle(path: str | Path, schemas: dict[str, Schema]) -> ExerciseBundle:
    """Load and validate one exercise bundle.

    Validation includes the ideal self-test: every ideal solution must
    execute and score at least the pass threshold against every other
    ideal's result matrix.
    """
    data = json.loads(Path(path).read_text())
    missing = [k for k in ("id", "description", "difficulty", "schema", "ideal_solutions") if k not in data]
    if missing:
        raise SchemaError(f"bundle {path}: missing fields {missing}")
    if data["difficulty"] not in DIFFICULTIES:
        raise SchemaError(f"bundle {data['id']}: difficulty must be one of {DIFFICULTIES}")
    ideals = list(data["ideal_solutions"])
    if not ideals:
        raise SchemaError(f"bundle {data['id']}: at least one ideal solution is required")
    schema = schemas.get(str(data["schema"]).lower())
    if schema is None:
        raise SchemaError(f"bundle {data['id']}: unknown schema {data['schema']!r}")
    rule = EvaluationRule.from_dict(data.get("evaluation_rule", {}))

    matrices: list[ResultMatrix] = []
    for text in ideals:
        try:
            tree = parse(text)
        except ParseError as exc:
            raise SchemaError(f"bundle {data['id']}: ideal does not parse: {exc}")
        reason = incomplete_reason(tree)
        if reason is not None:
            raise SchemaError(f"bundle {data['id']}: ideal is incomplete: {reason}")
        try:
            matrices.append(execute(tree, schema))
        except ExecError as exc:
            raise SchemaError(f"bundle {data['id']}: ideal fails to execute: {exc}")
    for i, mine in enumerate(matrices):
        for j, other in enumerate(matrices):
            result = score(mine, other, rule)
            if result.percent < rule.pass_threshold:
                raise SchemaError(
                    f"bundle {data['id']}: IdealFailsSelfTest: ideal {i} scores "
                    f"{result.percent:.1f} against ideal {j}"
                )

    return ExerciseBundle(
        id=str(data["id"]),
        description=str(data["description"]),
        difficulty=str(data["difficulty"]),
        schema=str(data["schema"]).lower(),
        schema_image=str(data.get("schema_image", "")),
        ideal_solutions=ideals,
        evaluation_rule=rule,
    )


@dataclass
class IngestReport:
    accepted: int = 0
    duplicates: int = 0
    rejected: list[tuple[int, str]] = field(default_factory=list)


class Store:
    """Single-writer store over one data directory."""

    def __init__(self, root: str | Path, config: ServiceConfig | None = None):
        self.root = Path(root)
        self.config = config or ServiceConfig()
        self.schemas: dict[str, Schema] = {}
        self.exercises: dict[str, ExerciseBundle] = {}
        self.attempts: list[AttemptRecord] = []
        self._attempt_hashes: set[str] = set()
        self._cache: dict[str, tuple[str, MdpGraph]] = {}
        self.build_count = 0
        self._load()

    # -- loading -------------------------------------------------------------

    def _load(self) -> None:
        self.root.mkdir(parents=True, exist_ok=True)
        schema_dir = self.root / "schemas"
        if schema_dir.is_dir():
            for path in sorted(schema_dir.glob("*.json")):
                schema = load_schema(path)
                self.schemas[schema.name.lower()] = schema
        exercise_dir = self.root / "exercises"
        if exercise_dir.is_dir():
            for path in sorted(exercise_dir.glob("*.json")):
                bundle = load_exercise_bundle(path, self.schemas)
                self.exercises[bundle.id] = bundle
        attempts_file = self.root / "attempts.jsonl"
        if attempts_file.is_file():
            with attempts_file.open() as fh:
                for line in fh:
                    line = line.strip()
                    if not line:
                        continue
                    record = AttemptRecord.from_dict(json.loads(line))
                    self.attempts.append(record)
                    self._attempt_hashes.add(record.content_hash())

    # -- exercises -----------------------------------------------------------

    def exercise(self, exercise_id: str) -> ExerciseBundle:
        bundle = self.exercises.get(exercise_id)
        if bundle is None:
            raise UnknownExercise(exercise_id)
        return bundle

    def schema_for(self, bundle: ExerciseBundle) -> Schema:
        return self.schemas[bundle.schema]

    def ideal_matrix(self, bundle: ExerciseBundle) -> ResultMatrix:
        return execute(parse(bundle.ideal_solutions[0]), self.schema_for(bundle))

    # -- attempts ------------------------------------------------------------

    def ingest_attempts(self, source: str | Path, rescore: bool = False) -> IngestReport:
        """Ingest a line-delimited JSON attempt file.

        Malformed lines and unparseable queries are rejected per line with
        reasons; previously seen records (by content hash) are counted as
        duplicates. Cache entries of the touched exercises are invalidated.
        """
        report = IngestReport()
        touched: set[str] = set()
        accepted_records: list[AttemptRecord] = []
        with Path(source).open() as fh:
            for line_no, line in enumerate(fh, start=1):
                line = line.strip()
                if not line:
                    continue
                try:
                    data = json.loads(line)
                except json.JSONDecodeError as exc:
                    report.rejected.append((line_no, f"FormatError: {exc.msg}"))
                    continue
                try:
                    record = AttemptRecord.from_dict(data)
                except FormatError as exc:
                    report.rejected.append((line_no, str(exc)))
                    continue
                try:
                    tree = parse(record.query_text)
                except ParseError as exc:
                    report.rejected.append((line_no, f"ParseError: {exc}"))
                    continue
                if rescore:
                    record = self._rescored(record, tree)
                digest = record.content_hash()
                if digest in self._attempt_hashes:
                    report.duplicates += 1
                    continue
                self._attempt_hashes.add(digest)
                accepted_records.append(record)
                touched.add(record.exercise_id)
                report.accepted += 1
        if accepted_records:
            with (self.root / "attempts.jsonl").open("a") as fh:
                for record in accepted_records:
                    fh.write(json.dumps(record.to_dict()) + "\n")
            self.attempts.extend(accepted_records)
        for exercise_id in touched:
            self._cache.pop(exercise_id, None)
        return report

    def _rescored(self, record: AttemptRecord, tree) -> AttemptRecord:
        bundle = self.exercises.get(record.exercise_id)
        if bundle is None:
            return record
        try:
            matrix = execute(tree, self.schema_for(bundle))
            result = score(matrix, self.ideal_matrix(bundle), bundle.evaluation_rule)
        except ExecError:
            return record
        return AttemptRecord(
            query_text=record.query_text,
            score=result.percent,
            user=record.user,
            schema=record.schema,
            exercise_id=record.exercise_id,
            timestamp=record.timestamp,
        )

    def add_attempt(self, record: AttemptRecord) -> None:
        """Persist a submission (it feeds future MDP generations)."""
        digest = record.content_hash()
        if digest in self._attempt_hashes:
            return
        self._attempt_hashes.add(digest)
        self.attempts.append(record)
        with (self.root / "attempts.jsonl").open("a") as fh:
            fh.write(json.dumps(record.to_dict()) + "\n")
        self._cache.pop(record.exercise_id, None)

    def attempts_for(self, exercise_id: str) -> list[AttemptRecord]:
        return [a for a in self.attempts if a.exercise_id == exercise_id]

    # -- MDP cache -----------------------------------------------------------

    def _fingerprint(self, exercise_id: str) -> str:
        bundle = self.exercise(exercise_id)
        digest = hashlib.sha256()
        for record in self.attempts_for(exercise_id):
            digest.update(record.content_hash().encode())
        for ideal in bundle.ideal_solutions:
            digest.update(ideal.encode())
        digest.update(repr(self.config.reward_policy).encode())
        return digest.hexdigest()

    def get_mdp(self, exercise_id: str) -> MdpGraph:
        """Return the valued MDP for the exercise, building it on demand."""
        fingerprint = self._fingerprint(exercise_id)
        cached = self._cache.get(exercise_id)
        if cached is not None and cached[0] == fingerprint:
            return cached[1]
        bundle = self.exercise(exercise_id)
        ideals = [parse(text) for text in bundle.ideal_solutions]
        graph = build_mdp(
            self.attempts_for(exercise_id), ideals, self.config.reward_policy
        )
        run_value_iteration(graph, epsilon=self.config.epsilon, max_iter=self.config.max_iter)
        self.build_count += 1
        if len(self._cache) >= self.config.cache_size and exercise_id not in self._cache:
            self._cache.pop(next(iter(self._cache)))
        self._cache[exercise_id] = (fingerprint, graph)
        return graph

    # -- events ----------------------------------------------------------------

    def persist_event(self, event: ActionEvent) -> None:
        ActionEvent.from_dict(event.to_dict())  # validate invariants
        with (self.root / "events.jsonl").open("a") as fh:
            fh.write(json.dumps(event.to_dict()) + "\n")

    def read_events(self, user: str | None = None, exercise_id: str | None = None) -> list[ActionEvent]:
        """Events in timestamp order, optionally filtered."""
        path = self.root / "events.jsonl"
        if not path.is_file():
            return []
        events: list[ActionEvent] = []
        with path.open() as fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                event = ActionEvent.from_dict(json.loads(line))
                if user is not None and event.user != user:
                    continue
                if exercise_id is not None and event.exercise_id != exercise_id:
                    continue
                events.append(event)
        events.sort(key=lambda e: e.timestamp)
        return events

"""Persistence for human rationales and the two feedback forms.

Backed by a single-file SQLite store: append-only, no update or delete in
the API. Writes are serialized through one connection behind a lock;
exports read through a fresh connection and therefore see a consistent
snapshot even while writers are active (WAL mode).

Validation happens entirely in the record constructors, before any store
interaction, so a rejected write can never leave a partial row behind.
"""

from __future__ import annotations

import json
import sqlite3
import threading
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Iterable, Iterator, Mapping

FEEDBACK_KINDS = ("prediction", "explanation")
XAI_METHODS = ("lime", "kernel_shap")


class FeedbackError(ValueError):
    """A rationale or feedback record violates its invariants."""


def _now() -> str:
    return datetime.now(timezone.utc).isoformat()


@dataclass(frozen=True)
class RationaleAnnotation:
    """Human-highlighted character spans over the exact submitted text.

    ``text`` is carried along so span bounds are checkable at save time
    and the export is analyzable without a corpus join; ``sample_ref`` is
    an id or content hash linking back to the prediction request.
    """

    sample_ref: str
    text: str
    spans: tuple[tuple[int, int], ...]
    annotator_id: str
    created_at: str = field(default_factory=_now)

    def __post_init__(self):
        object.__setattr__(self, "spans", tuple((int(a), int(b)) for a, b in self.spans))
        for start, end in self.spans:
            if start < 0 or end > len(self.text):
                raise FeedbackError(f"span ({start}, {end}) outside text of length {len(self.text)}")
            if start >= end:
                raise FeedbackError(f"span ({start}, {end}) is empty or reversed")
        ordered = sorted(self.spans)
        for (_, prev_end), (next_start, _) in zip(ordered, ordered[1:]):
            if next_start < prev_end:
                raise FeedbackError("spans overlap after sorting")

    def to_dict(self) -> dict:
        return {
            "sample_ref": self.sample_ref,
            "text": self.text,
            "spans": [list(s) for s in self.spans],
            "annotator_id": self.annotator_id,
            "created_at": self.created_at,
        }


@dataclass(frozen=True)
class FeedbackRecord:
    kind: str
    sample_ref: str
    model_id: str
    answers: Mapping[str, int]
    xai_method: str | None = None
    free_text: str | None = None
    created_at: str = field(default_factory=_now)

    def __post_init__(self):
        if self.kind not in FEEDBACK_KINDS:
            raise FeedbackError(f"unknown feedback kind {self.kind!r}")
        if self.kind == "explanation":
            if self.xai_method not in XAI_METHODS:
                raise FeedbackError("explanation feedback requires xai_method (lime or kernel_shap)")
        for question, value in self.answers.items():
            if not isinstance(value, int) or isinstance(value, bool) or not 1 <= value <= 5:
                raise FeedbackError(f"answer {question!r}={value!r} is not a Likert value in 1..5")

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "sample_ref": self.sample_ref,
            "model_id": self.model_id,
            "answers": dict(self.answers),
            "xai_method": self.xai_method,
            "free_text": self.free_text,
            "created_at": self.created_at,
        }


def feedback_from_dict(payload: Mapping) -> FeedbackRecord:
    return FeedbackRecord(
        kind=payload["kind"],
        sample_ref=payload["sample_ref"],
        model_id=payload["model_id"],
        answers=dict(payload["answers"]),
        xai_method=payload.get("xai_method"),
        free_text=payload.get("free_text"),
        created_at=payload.get("created_at") or _now(),
    )


def rationale_from_dict(payload: Mapping) -> RationaleAnnotation:
    return RationaleAnnotation(
        sample_ref=payload["sample_ref"],
        text=payload["text"],
        spans=tuple((s[0], s[1]) for s in payload["spans"]),
        annotator_id=payload["annotator_id"],
        created_at=payload.get("created_at") or _now(),
    )


_SCHEMA = """
CREATE TABLE IF NOT EXISTS rationale (
    id INTEGER PRIMARY KEY AUTOINCREMENT,
    created_at TEXT NOT NULL,
    payload TEXT NOT NULL
);
CREATE TABLE IF NOT EXISTS feedback (
    id INTEGER PRIMARY KEY AUTOINCREMENT,
    kind TEXT NOT NULL,
    model_id TEXT NOT NULL,
    created_at TEXT NOT NULL,
    payload TEXT NOT NULL
);
"""


class FeedbackStore:
    def __init__(self, path):
        self.path = str(path)
        self._lock = threading.Lock()
        self._conn = sqlite3.connect(self.path, check_same_thread=False)
        with self._lock:
            self._conn.execute("PRAGMA journal_mode=WAL")
            self._conn.executescript(_SCHEMA)
            self._conn.commit()

    def close(self):
        self._conn.close()

    def save_rationale(self, annotation: RationaleAnnotation) -> int:
        payload = json.dumps(annotation.to_dict(), ensure_ascii=False)
        with self._lock:
            cursor = self._conn.execute(
                "INSERT INTO rationale (created_at, payload) VALUES (?, ?)",
                (annotation.created_at, payload),
            )
            self._conn.commit()
            return int(cursor.lastrowid)

    def save_feedback(self, record: FeedbackRecord) -> int:
        payload = json.dumps(record.to_dict(), ensure_ascii=False)
        with self._lock:
            cursor = self._conn.execute(
                "INSERT INTO feedback (kind, model_id, created_at, payload) VALUES (?, ?, ?, ?)",
                (record.kind, record.model_id, record.created_at, payload),
            )
            self._conn.commit()
            return int(cursor.lastrowid)

    def get_rationale(self, stored_id: int) -> RationaleAnnotation | None:
        row = self._read_conn().execute(
            "SELECT payload FROM rationale WHERE id = ?", (stored_id,)
        ).fetchone()
        return rationale_from_dict(json.loads(row[0])) if row else None

    def get_feedback(self, stored_id: int) -> FeedbackRecord | None:
        row = self._read_conn().execute(
            "SELECT payload FROM feedback WHERE id = ?", (stored_id,)
        ).fetchone()
        return feedback_from_dict(json.loads(row[0])) if row else None

    def _read_conn(self) -> sqlite3.Connection:
        # Fresh connection per reader: consistent snapshot under WAL.
        return sqlite3.connect(self.path, check_same_thread=False)

    def export_feedback(
        self,
        kind: str | None = None,
        model_id: str | None = None,
        since: str | None = None,
        until: str | None = None,
    ) -> Iterator[str]:
        """Stream matching feedback as JSON lines, ordered by created_at
        then stored id. An empty result is a valid (empty) stream."""
        clauses, params = [], []
        if kind is not None:
            clauses.append("kind = ?")
            params.append(kind)
        if model_id is not None:
            clauses.append("model_id = ?")
            params.append(model_id)
        if since is not None:
            clauses.append("created_at >= ?")
            params.append(since)
        if until is not None:
            clauses.append("created_at <= ?")
            params.append(until)
        where = f"WHERE {' AND '.join(clauses)}" if clauses else ""
        rows = self._read_conn().execute(
            f"SELECT id, payload FROM feedback {where} ORDER BY created_at, id", params
        )
        for stored_id, payload in rows:
            record = json.loads(payload)
            record["id"] = stored_id
            yield json.dumps(record, ensure_ascii=False)

    def export_rationales(self) -> Iterator[str]:
        rows = self._read_conn().execute(
            "SELECT id, payload FROM rationale ORDER BY created_at, id"
        )
        for stored_id, payload in rows:
            record = json.loads(payload)
            record["id"] = stored_id
            yield json.dumps(record, ensure_ascii=False)

    def import_feedback(self, lines: Iterable[str]) -> int:
        """Reload an export stream, preserving stored ids. Returns the
        number of records imported."""
        n = 0
        with self._lock:
            for line in lines:
                if not line.strip():
                    continue
                record = json.loads(line)
                stored_id = record.pop("id", None)
                parsed = feedback_from_dict(record)  # re-validate on the way in
                self._conn.execute(
                    "INSERT INTO feedback (id, kind, model_id, created_at, payload) VALUES (?, ?, ?, ?, ?)",
                    (
                        stored_id,
                        parsed.kind,
                        parsed.model_id,
                        parsed.created_at,
                        json.dumps(parsed.to_dict(), ensure_ascii=False),
                    ),
                )
                n += 1
            self._conn.commit()
        return n

    def counts(self) -> dict[str, int]:
        conn = self._read_conn()
        feedback = conn.execute("SELECT COUNT(*) FROM feedback").fetchone()[0]
        rationale = conn.execute("SELECT COUNT(*) FROM rationale").fetchone()[0]
        return {"feedback": feedback, "rationale": rationale}

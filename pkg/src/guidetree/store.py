"""Append-only session log on SQLite.

Only session metadata and navigation actions are stored, never patient
data: records arrive with a request, drive automatic navigation, and are
discarded with it. Sessions are rebuilt after a restart by replaying
their action log in order.
"""

from __future__ import annotations

import json
import sqlite3
import threading
from dataclasses import dataclass
from pathlib import Path

from .navigation import Action, ActionKind

_SCHEMA = """
CREATE TABLE IF NOT EXISTS sessions (
    id TEXT PRIMARY KEY,
    tree_id TEXT NOT NULL,
    created_at TEXT NOT NULL DEFAULT (datetime('now'))
);
CREATE TABLE IF NOT EXISTS actions (
    session_id TEXT NOT NULL REFERENCES sessions(id),
    seq INTEGER NOT NULL,
    kind TEXT NOT NULL,
    node TEXT,
    choices TEXT NOT NULL,
    PRIMARY KEY (session_id, seq)
);
"""


class StoreError(Exception):
    pass


class SessionExistsError(StoreError):
    pass


class UnknownSessionError(StoreError):
    pass


class SequenceConflictError(StoreError):
    """The expected append position is already taken or out of date."""

    def __init__(self, session_id: str, expected: int, actual: int):
        super().__init__(
            f"session {session_id!r}: expected to append at {expected}, log is at {actual}")
        self.expected = expected
        self.actual = actual


@dataclass(frozen=True)
class SessionRow:
    id: str
    tree_id: str


class ActionStore:
    """Thread-safe append-only store; one connection guarded by a lock."""

    def __init__(self, path: str | Path = ":memory:"):
        self._conn = sqlite3.connect(str(path), check_same_thread=False)
        self._conn.execute("PRAGMA foreign_keys = ON")
        self._lock = threading.Lock()
        with self._lock, self._conn:
            self._conn.executescript(_SCHEMA)

    def close(self) -> None:
        with self._lock:
            self._conn.close()

    def create_session(self, session_id: str, tree_id: str) -> None:
        with self._lock, self._conn:
            try:
                self._conn.execute(
                    "INSERT INTO sessions (id, tree_id) VALUES (?, ?)",
                    (session_id, tree_id))
            except sqlite3.IntegrityError:
                raise SessionExistsError(f"session {session_id!r} already exists") from None

    def get_session(self, session_id: str) -> SessionRow | None:
        with self._lock:
            row = self._conn.execute(
                "SELECT id, tree_id FROM sessions WHERE id = ?", (session_id,)).fetchone()
        return SessionRow(id=row[0], tree_id=row[1]) if row else None

    def list_sessions(self) -> list[SessionRow]:
        with self._lock:
            rows = self._conn.execute(
                "SELECT id, tree_id FROM sessions ORDER BY created_at, id").fetchall()
        return [SessionRow(id=r[0], tree_id=r[1]) for r in rows]

    def action_count(self, session_id: str) -> int:
        with self._lock:
            row = self._conn.execute(
                "SELECT COUNT(*) FROM actions WHERE session_id = ?", (session_id,)).fetchone()
        return int(row[0])

    def append_action(self, session_id: str, expected_seq: int, action: Action) -> int:
        """Append at position expected_seq (0-based); returns the new length."""
        if not isinstance(action, Action):
            raise TypeError(f"expected an Action, got {type(action).__name__}")
        with self._lock, self._conn:
            if self._conn.execute(
                    "SELECT 1 FROM sessions WHERE id = ?", (session_id,)).fetchone() is None:
                raise UnknownSessionError(f"unknown session {session_id!r}")
            count = int(self._conn.execute(
                "SELECT COUNT(*) FROM actions WHERE session_id = ?",
                (session_id,)).fetchone()[0])
            if count != expected_seq:
                raise SequenceConflictError(session_id, expected_seq, count)
            self._conn.execute(
                "INSERT INTO actions (session_id, seq, kind, node, choices) "
                "VALUES (?, ?, ?, ?, ?)",
                (session_id, expected_seq, action.kind.value, action.node,
                 json.dumps(list(action.choices))))
        return expected_seq + 1

    def actions(self, session_id: str) -> list[Action]:
        with self._lock:
            rows = self._conn.execute(
                "SELECT kind, node, choices FROM actions WHERE session_id = ? ORDER BY seq",
                (session_id,)).fetchall()
        return [
            Action(kind=ActionKind(kind), node=node, choices=tuple(json.loads(choices)))
            for kind, node, choices in rows]

"""HTTP service exposing trees, sessions and automatic navigation.

Sessions hold no secrets: their full state is the replay of an
append-only action log, so a restarted server reports byte-identical
session state. Patient records are never written anywhere by the
service; inline records live only for the duration of their request.

Concurrency contract: every state-changing request carries the revision
(action count) it was computed against and fails with 409 when the log
has moved on.
"""

from __future__ import annotations

import secrets
import threading
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping

from fastapi import Body, FastAPI, HTTPException
from fastapi.staticfiles import StaticFiles

from .autonav import AutoAdvanceResult, auto_advance
from .fileformat import FormatError, parse_patient, patient_to_dict, tree_to_dict
from .fisheye import layout_to_dict, layout_tree
from .model import TreeDef, UnknownNodeError
from .navigation import (
    Action,
    ActionKind,
    NavState,
    NavigationError,
    apply_action,
    initial_state,
)
from .predicates import PatientRecord, TypeMismatchError
from .store import ActionStore, SequenceConflictError


@dataclass
class SessionRuntime:
    tree_id: str
    state: NavState
    log: list[Action] = field(default_factory=list)
    lock: threading.Lock = field(default_factory=threading.Lock)

    @property
    def revision(self) -> int:
        return len(self.log)


def _action_to_dict(action: Action) -> dict[str, Any]:
    out: dict[str, Any] = {"kind": action.kind.value}
    if action.node is not None:
        out["node"] = action.node
    if action.choices:
        out["choices"] = list(action.choices)
    return out


def _parse_action(data: Any) -> Action:
    if not isinstance(data, dict):
        raise HTTPException(422, detail="action must be an object")
    unknown = sorted(set(data) - {"kind", "node", "choices"})
    if unknown:
        raise HTTPException(422, detail=f"action has unknown keys {unknown}")
    kind_token = data.get("kind")
    try:
        kind = ActionKind(kind_token)
    except ValueError:
        raise HTTPException(422, detail=f"unknown action kind {kind_token!r}") from None
    if kind is ActionKind.AUTO_ANSWER:
        raise HTTPException(
            422, detail="auto_answer is reserved for the automatic navigation endpoint")
    node = data.get("node")
    if node is not None and not isinstance(node, str):
        raise HTTPException(422, detail="action node must be a string")
    raw_choices = data.get("choices", [])
    if not isinstance(raw_choices, list) or any(not isinstance(c, str) for c in raw_choices):
        raise HTTPException(422, detail="action choices must be an array of strings")
    if kind is not ActionKind.RESET and node is None:
        raise HTTPException(422, detail=f"{kind.value} action requires a node")
    return Action(kind=kind, node=node, choices=tuple(raw_choices))


def _require_revision(data: Mapping[str, Any], runtime: SessionRuntime) -> None:
    revision = data.get("revision")
    if not isinstance(revision, int) or isinstance(revision, bool):
        raise HTTPException(422, detail="revision must be an integer")
    if revision != runtime.revision:
        raise HTTPException(
            409, detail=f"revision {revision} is stale, session is at {runtime.revision}")


def _state_payload(
    session_id: str,
    runtime: SessionRuntime,
    viewport: tuple[float, float] | None = None,
) -> dict[str, Any]:
    state = runtime.state
    tree = state.tree
    gray = state.grayed_nodes()
    answered = {
        n.id: list(state.selected_answers(n.id))
        for n in tree.nodes if state.answered(n.id)}
    current = state.current_recommendations()
    accessible = [
        n for n in state.reachable_recommendations() if n not in current]
    return {
        "session": session_id,
        "tree": runtime.tree_id,
        "revision": runtime.revision,
        "complete": state.is_complete(),
        "frontier": list(state.frontier_in_order()),
        "open_questions": list(state.open_questions()),
        "selected": [
            {"from": e.from_, "answer": e.answer, "to": e.to}
            for e in state.selected_edges()],
        "answered": answered,
        "grayed": [n.id for n in tree.nodes if n.id in gray],
        "recommendations": {
            "current": list(current),
            "accessible": accessible,
        },
        "layout": layout_to_dict(layout_tree(state, viewport=viewport)),
        "history": [_action_to_dict(a) for a in runtime.log],
    }


def _parse_viewport(viewport: str | None) -> tuple[float, float] | None:
    if viewport is None:
        return None
    width, sep, height = viewport.partition("x")
    try:
        if not sep:
            raise ValueError
        pair = (float(width), float(height))
    except ValueError:
        raise HTTPException(
            422, detail=f"viewport must look like 1280x800, got {viewport!r}") from None
    if pair[0] <= 0 or pair[1] <= 0:
        raise HTTPException(422, detail="viewport dimensions must be positive")
    return pair


def _auto_payload(result: AutoAdvanceResult) -> dict[str, Any]:
    stop: dict[str, Any] = {"reason": result.stop.reason.value}
    if result.stop.node is not None:
        stop["node"] = result.stop.node
    if result.stop.missing_fields:
        stop["missing_fields"] = list(result.stop.missing_fields)
    return {
        "steps": [
            {"node": s.node, "answer": s.answer, "verdict": s.verdict.value}
            for s in result.steps],
        "stop": stop,
    }


def create_app(
    trees: Mapping[str, TreeDef],
    store: ActionStore,
    patients: Mapping[str, PatientRecord] | None = None,
    static_dir: Path | str | None = None,
) -> FastAPI:
    """Assemble the application; sessions found in the store are replayed."""
    app = FastAPI(title="guidetree", docs_url=None, redoc_url=None)
    patients = dict(patients or {})
    sessions: dict[str, SessionRuntime] = {}
    registry_lock = threading.Lock()

    for row in store.list_sessions():
        tree = trees.get(row.tree_id)
        if tree is None:
            continue
        log = store.actions(row.id)
        state = initial_state(tree)
        for action in log:
            state = apply_action(state, action)
        sessions[row.id] = SessionRuntime(tree_id=row.tree_id, state=state, log=log)

    def get_runtime(session_id: str) -> SessionRuntime:
        runtime = sessions.get(session_id)
        if runtime is None:
            raise HTTPException(404, detail=f"unknown session {session_id!r}")
        return runtime

    @app.get("/api/trees")
    def list_trees() -> dict[str, Any]:
        return {
            "trees": [
                {
                    "id": tree.id,
                    "title": tree.title,
                    "root": tree.root,
                    "nodes": len(tree.nodes),
                }
                for _, tree in sorted(trees.items())
            ]
        }

    @app.get("/api/trees/{tree_id}")
    def get_tree(tree_id: str) -> dict[str, Any]:
        tree = trees.get(tree_id)
        if tree is None:
            raise HTTPException(404, detail=f"unknown tree {tree_id!r}")
        return tree_to_dict(tree)

    @app.get("/api/patients")
    def list_patients() -> dict[str, Any]:
        return {"patients": sorted(patients)}

    @app.get("/api/patients/{patient_id}")
    def get_patient(patient_id: str) -> dict[str, Any]:
        record = patients.get(patient_id)
        if record is None:
            raise HTTPException(404, detail=f"unknown patient {patient_id!r}")
        return patient_to_dict(record)

    @app.get("/api/sessions")
    def list_sessions() -> dict[str, Any]:
        return {
            "sessions": [
                {"id": sid, "tree": runtime.tree_id, "revision": runtime.revision}
                for sid, runtime in sorted(sessions.items())
            ]
        }

    @app.post("/api/sessions", status_code=201)
    def create_session(payload: dict = Body(...)) -> dict[str, Any]:
        unknown = sorted(set(payload) - {"tree_id"})
        if unknown:
            raise HTTPException(422, detail=f"unknown keys {unknown}")
        tree_id = payload.get("tree_id")
        if not isinstance(tree_id, str):
            raise HTTPException(422, detail="tree_id must be a string")
        tree = trees.get(tree_id)
        if tree is None:
            raise HTTPException(404, detail=f"unknown tree {tree_id!r}")
        session_id = secrets.token_urlsafe(16)
        store.create_session(session_id, tree_id)
        runtime = SessionRuntime(tree_id=tree_id, state=initial_state(tree))
        with registry_lock:
            sessions[session_id] = runtime
        return {"state": _state_payload(session_id, runtime)}

    @app.get("/api/sessions/{session_id}")
    def get_session(session_id: str) -> dict[str, Any]:
        runtime = get_runtime(session_id)
        with runtime.lock:
            return {"state": _state_payload(session_id, runtime)}

    @app.get("/api/sessions/{session_id}/state")
    def get_session_state(session_id: str, viewport: str | None = None) -> dict[str, Any]:
        runtime = get_runtime(session_id)
        pair = _parse_viewport(viewport)
        with runtime.lock:
            return {"state": _state_payload(session_id, runtime, viewport=pair)}

    @app.post("/api/sessions/{session_id}/actions")
    def post_action(session_id: str, payload: dict = Body(...)) -> dict[str, Any]:
        runtime = get_runtime(session_id)
        unknown = sorted(set(payload) - {"revision", "action"})
        if unknown:
            raise HTTPException(422, detail=f"unknown keys {unknown}")
        action = _parse_action(payload.get("action"))
        with runtime.lock:
            _require_revision(payload, runtime)
            try:
                new_state = apply_action(runtime.state, action)
            except (NavigationError, UnknownNodeError) as exc:
                raise HTTPException(422, detail=str(exc)) from None
            try:
                store.append_action(session_id, runtime.revision, action)
            except SequenceConflictError as exc:
                raise HTTPException(409, detail=str(exc)) from None
            runtime.state = new_state
            runtime.log.append(action)
            return {"state": _state_payload(session_id, runtime)}

    @app.post("/api/sessions/{session_id}/autonav")
    def post_autonav(session_id: str, payload: dict = Body(...)) -> dict[str, Any]:
        runtime = get_runtime(session_id)
        unknown = sorted(set(payload) - {"revision", "patient", "patient_id"})
        if unknown:
            raise HTTPException(422, detail=f"unknown keys {unknown}")
        if ("patient" in payload) == ("patient_id" in payload):
            raise HTTPException(422, detail="pass exactly one of patient, patient_id")
        if "patient" in payload:
            try:
                record = parse_patient(payload["patient"])
            except FormatError as exc:
                raise HTTPException(422, detail=str(exc)) from None
        else:
            patient_id = payload["patient_id"]
            if not isinstance(patient_id, str) or patient_id not in patients:
                raise HTTPException(404, detail=f"unknown patient {patient_id!r}")
            record = patients[patient_id]
        with runtime.lock:
            _require_revision(payload, runtime)
            try:
                result = auto_advance(runtime.state, record)
            except TypeMismatchError as exc:
                raise HTTPException(422, detail=str(exc)) from None
            revision = runtime.revision
            for step in result.steps:
                action = Action(
                    kind=ActionKind.AUTO_ANSWER, node=step.node, choices=(step.answer,))
                try:
                    revision = store.append_action(session_id, revision, action)
                except SequenceConflictError as exc:
                    raise HTTPException(409, detail=str(exc)) from None
                runtime.log.append(action)
            runtime.state = result.state
            return {
                "state": _state_payload(session_id, runtime),
                "auto": _auto_payload(result),
            }

    if static_dir is not None:
        app.mount("/", StaticFiles(directory=str(static_dir), html=True), name="static")

    return app

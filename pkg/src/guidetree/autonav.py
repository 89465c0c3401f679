"""Data-driven semi-automatic navigation.

Open single-choice questions whose predicate decides against the patient
record are answered automatically, one at a time in tree document order,
until only questions needing a human remain: multi-choice selections,
questions without a predicate, or predicates starved of data.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from .model import NodeKind, TreeDef, resolve_predicate_answers
from .navigation import NavState, Navigator, apply_answer
from .predicates import PatientRecord, Truth, eval_predicate


class StopReason(str, Enum):
    NO_OPEN_QUESTIONS = "no_open_questions"
    MISSING_DATA = "missing_data"
    NO_PREDICATE = "no_predicate"
    MULTI_CHOICE_STOP = "multi_choice_stop"


# When several open questions block for different reasons, report the one
# highest on this list; a data gap is actionable, the others need a human.
_PRIORITY = (StopReason.MISSING_DATA, StopReason.NO_PREDICATE, StopReason.MULTI_CHOICE_STOP)


@dataclass(frozen=True)
class AutoStep:
    node: str
    answer: str
    verdict: Truth


@dataclass(frozen=True)
class StopInfo:
    reason: StopReason
    node: str | None = None
    missing_fields: tuple[str, ...] = ()


@dataclass(frozen=True)
class AutoAdvanceResult:
    state: NavState
    steps: tuple[AutoStep, ...]
    stop: StopInfo


def _usable_answer(tree: TreeDef, node_id: str, verdict: Truth) -> str | None:
    node = tree.node(node_id)
    true_answer, false_answer = resolve_predicate_answers(tree, node)
    answer = true_answer if verdict is Truth.TRUE else false_answer
    if answer is None or tree.edge(node_id, answer) is None:
        return None
    return answer


def _missing_fields(tree: TreeDef, node_id: str, record: PatientRecord) -> tuple[str, ...]:
    predicate = tree.node(node_id).predicate
    assert predicate is not None
    seen: list[str] = []
    for name in predicate.expr.field_names():
        if record.get(name) is None and name not in seen:
            seen.append(name)
    return tuple(seen)


def auto_advance(state: NavState, record: PatientRecord) -> AutoAdvanceResult:
    """Run automatic navigation to a fixpoint; pure, the input is untouched.

    Type mismatches between a predicate and the record raise before any
    partial result escapes: callers keep their original state on failure.
    """
    tree = state.tree
    steps: list[AutoStep] = []
    while True:
        open_questions = state.open_questions()
        if not open_questions:
            return AutoAdvanceResult(
                state, tuple(steps), StopInfo(StopReason.NO_OPEN_QUESTIONS))
        blockers: list[tuple[StopReason, str]] = []
        answered_one = False
        for node_id in open_questions:
            node = tree.node(node_id)
            if node.kind is not NodeKind.SINGLE_CHOICE:
                blockers.append((StopReason.MULTI_CHOICE_STOP, node_id))
                continue
            if node.predicate is None:
                blockers.append((StopReason.NO_PREDICATE, node_id))
                continue
            verdict = eval_predicate(node.predicate, record, tree.fields)
            if verdict is Truth.UNKNOWN:
                blockers.append((StopReason.MISSING_DATA, node_id))
                continue
            answer = _usable_answer(tree, node_id, verdict)
            if answer is None:
                blockers.append((StopReason.NO_PREDICATE, node_id))
                continue
            state = apply_answer(state, node_id, (answer,))
            steps.append(AutoStep(node=node_id, answer=answer, verdict=verdict))
            answered_one = True
            break
        if answered_one:
            continue
        for reason in _PRIORITY:
            hits = [n for r, n in blockers if r is reason]
            if hits:
                missing = ()
                if reason is StopReason.MISSING_DATA:
                    missing = _missing_fields(tree, hits[0], record)
                stop = StopInfo(reason=reason, node=hits[0], missing_fields=missing)
                return AutoAdvanceResult(state, tuple(steps), stop)
        raise AssertionError("open questions without a blocker classification")


def advance_navigator(nav: Navigator, record: PatientRecord) -> AutoAdvanceResult:
    """Apply automatic navigation to a session, recording each answer."""
    result = auto_advance(nav.state, record)
    for step in result.steps:
        nav.answer(step.node, (step.answer,), auto=True)
    return result

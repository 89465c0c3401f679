"""Navigation state machine over a decision tree.

All state lives in the set of selected edges; the frontier, answered
flags and grayed-out set are pure functions of it. The selected set is
always closed under parents: an edge can only be selected if its source
is the root or itself the target of a selected edge.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Iterable, Sequence

from .model import Edge, NodeKind, TreeDef

EdgeKey = tuple[str, str]


class NavigationError(Exception):
    pass


class InvalidActionError(NavigationError):
    """The action is malformed or not applicable in the current state."""


class UnreachableError(NavigationError):
    """A goto target sits behind an already-answered diverging question."""

    def __init__(self, node_id: str, blocked_at: str):
        super().__init__(
            f"node {node_id!r} is unreachable: question {blocked_at!r} "
            f"was answered along a different branch")
        self.node_id = node_id
        self.blocked_at = blocked_at


class ReplayError(NavigationError):
    """An action in a recorded history failed to apply."""

    def __init__(self, index: int, action: "Action", cause: Exception):
        super().__init__(f"action {index} ({action.kind.value}) failed: {cause}")
        self.index = index
        self.action = action
        self.cause = cause


class ActionKind(str, Enum):
    ANSWER = "answer"
    AUTO_ANSWER = "auto_answer"
    GOTO = "goto"
    RESET = "reset"


@dataclass(frozen=True)
class Action:
    """One replayable step of a consultation."""

    kind: ActionKind
    node: str | None = None
    choices: tuple[str, ...] = ()


class GotoKind(str, Enum):
    NOOP = "noop"
    BACKWARD = "backward"
    FAST_FORWARD = "fast_forward"


@dataclass(frozen=True)
class NavState:
    """Immutable snapshot: the tree plus the selected edge set."""

    tree: TreeDef
    selected: frozenset[EdgeKey] = frozenset()

    frontier: frozenset[str] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        answered = {f for f, _ in self.selected}
        if self.selected:
            frontier = frozenset(
                self._edge(k).to for k in self.selected if self._edge(k).to not in answered)
        else:
            frontier = frozenset({self.tree.root})
        object.__setattr__(self, "frontier", frontier)

    def _edge(self, key: EdgeKey) -> Edge:
        edge = self.tree.edge(*key)
        if edge is None:
            raise InvalidActionError(f"selected set references unknown edge {key!r}")
        return edge

    def answered(self, node_id: str) -> bool:
        return any(f == node_id for f, _ in self.selected)

    def selected_answers(self, node_id: str) -> tuple[str, ...]:
        """Answers chosen at a node, in edge declaration order."""
        return tuple(
            e.answer for e in self.tree.outgoing(node_id) if e.key in self.selected)

    def selected_edges(self) -> tuple[Edge, ...]:
        """All selected edges, in tree declaration order."""
        return tuple(e for e in self.tree.edges if e.key in self.selected)

    def frontier_in_order(self) -> tuple[str, ...]:
        return tuple(n.id for n in self.tree.nodes if n.id in self.frontier)

    def active_nodes(self) -> frozenset[str]:
        """Frontier plus every endpoint of a selected edge."""
        active = set(self.frontier)
        for f, a in self.selected:
            active.add(f)
            active.add(self._edge((f, a)).to)
        return frozenset(active)

    def open_questions(self) -> tuple[str, ...]:
        """Unanswered frontier questions, in tree declaration order."""
        return tuple(
            n.id for n in self.tree.nodes
            if n.id in self.frontier and n.kind.is_question)

    def grayed_nodes(self) -> frozenset[str]:
        """Nodes no longer attainable without revisiting an answered question."""
        live = set(self.active_nodes())
        for q in self.open_questions():
            live.update(self.tree.subtree(q))
        return frozenset(n.id for n in self.tree.nodes) - live

    def current_recommendations(self) -> tuple[str, ...]:
        """Recommendations reached by the selected paths (in the frontier)."""
        return tuple(
            n.id for n in self.tree.nodes
            if n.id in self.frontier and n.kind is NodeKind.RECOMMENDATION)

    def reachable_recommendations(self) -> tuple[str, ...]:
        """Current recommendations plus those still attainable below open questions."""
        gray = self.grayed_nodes()
        return tuple(
            n.id for n in self.tree.nodes
            if n.kind is NodeKind.RECOMMENDATION and n.id not in gray)

    def is_complete(self) -> bool:
        return not self.open_questions()


def initial_state(tree: TreeDef) -> NavState:
    return NavState(tree=tree)


def apply_answer(state: NavState, node_id: str, choices: Sequence[str]) -> NavState:
    """Select the chosen outgoing edges of an open frontier question."""
    tree = state.tree
    node = tree.node(node_id)
    if not node.kind.is_question:
        raise InvalidActionError(f"node {node_id!r} is a recommendation, not a question")
    if node_id not in state.frontier:
        raise InvalidActionError(f"question {node_id!r} is not open")
    if not choices:
        raise InvalidActionError(f"no choices given for question {node_id!r}")
    if len(set(choices)) != len(choices):
        raise InvalidActionError(f"duplicate choices for question {node_id!r}")
    if node.kind is NodeKind.SINGLE_CHOICE and len(choices) != 1:
        raise InvalidActionError(
            f"question {node_id!r} takes exactly one choice, got {len(choices)}")
    keys: list[EdgeKey] = []
    for answer in choices:
        if tree.edge(node_id, answer) is None:
            raise InvalidActionError(f"question {node_id!r} has no choice {answer!r}")
        keys.append((node_id, answer))
    return replace(state, selected=state.selected | frozenset(keys))


def classify_goto(state: NavState, node_id: str) -> GotoKind:
    """Decide how a jump to node_id applies, raising when it cannot."""
    tree = state.tree
    tree.node(node_id)
    if state.answered(node_id):
        return GotoKind.BACKWARD
    if node_id in state.frontier:
        return GotoKind.NOOP
    for ancestor, _ in _chain_to_root(tree, node_id):
        if ancestor == node_id:
            continue
        if ancestor in state.frontier:
            return GotoKind.FAST_FORWARD
        if state.answered(ancestor):
            raise UnreachableError(node_id, blocked_at=ancestor)
    raise UnreachableError(node_id, blocked_at=tree.root)


def apply_goto(state: NavState, node_id: str) -> tuple[NavState, GotoKind]:
    kind = classify_goto(state, node_id)
    if kind is GotoKind.NOOP:
        return state, kind
    if kind is GotoKind.BACKWARD:
        sub = state.tree.subtree(node_id)
        kept = frozenset(k for k in state.selected if k[0] not in sub)
        return replace(state, selected=kept), kind
    for step_node, step_answer in _forward_path(state, node_id):
        state = apply_answer(state, step_node, (step_answer,))
    return state, kind


def apply_action(state: NavState, action: Action) -> NavState:
    if action.kind is ActionKind.RESET:
        return replace(state, selected=frozenset())
    if action.node is None:
        raise InvalidActionError(f"{action.kind.value} action requires a node")
    if action.kind is ActionKind.GOTO:
        return apply_goto(state, action.node)[0]
    return apply_answer(state, action.node, action.choices)


def _chain_to_root(tree: TreeDef, node_id: str) -> Iterable[tuple[str, str | None]]:
    """(node, answer-from-parent) pairs from node_id up to the root."""
    current: str | None = node_id
    while current is not None:
        parent = tree.parent(current)
        answer = None
        if parent is not None:
            for e in tree.outgoing(parent):
                if e.to == current:
                    answer = e.answer
                    break
        yield current, answer
        current = parent


def _forward_path(state: NavState, node_id: str) -> list[tuple[str, str]]:
    """Steps (question, answer) leading from the frontier down to node_id."""
    steps: list[tuple[str, str]] = []
    for ancestor, answer in _chain_to_root(state.tree, node_id):
        if ancestor == node_id and answer is None:
            break
        if ancestor in state.frontier:
            break
        parent = state.tree.parent(ancestor)
        assert parent is not None and answer is not None
        steps.append((parent, answer))
    steps.reverse()
    return steps


class Navigator:
    """Mutable session wrapper: a state plus the action history behind it.

    Replaying the recorded history from a fresh state always reproduces
    the current state; no-op jumps are therefore never recorded.
    """

    def __init__(self, tree: TreeDef):
        self.tree = tree
        self.state = initial_state(tree)
        self.history: list[Action] = []

    def answer(self, node_id: str, choices: Sequence[str], *, auto: bool = False) -> NavState:
        kind = ActionKind.AUTO_ANSWER if auto else ActionKind.ANSWER
        action = Action(kind=kind, node=node_id, choices=tuple(choices))
        self.state = apply_answer(self.state, node_id, choices)
        self.history.append(action)
        return self.state

    def goto(self, node_id: str) -> GotoKind:
        new_state, kind = apply_goto(self.state, node_id)
        if kind is not GotoKind.NOOP:
            self.state = new_state
            self.history.append(Action(kind=ActionKind.GOTO, node=node_id))
        return kind

    def reset(self) -> NavState:
        self.state = initial_state(self.tree)
        self.history.append(Action(kind=ActionKind.RESET))
        return self.state

    def apply(self, action: Action) -> NavState:
        """Apply one recorded action, goto no-ops included, recording it."""
        if action.kind is ActionKind.RESET:
            return self.reset()
        assert action.node is not None
        if action.kind is ActionKind.GOTO:
            new_state, kind = apply_goto(self.state, action.node)
            if kind is not GotoKind.NOOP:
                self.state = new_state
                self.history.append(action)
            return self.state
        return self.answer(action.node, action.choices, auto=action.kind is ActionKind.AUTO_ANSWER)

    @classmethod
    def replay(cls, tree: TreeDef, actions: Iterable[Action]) -> "Navigator":
        nav = cls(tree)
        for index, action in enumerate(actions):
            try:
                nav.apply(action)
            except NavigationError as exc:
                raise ReplayError(index, action, exc) from exc
        return nav


def reachable_states(tree: TreeDef, limit: int = 1_000_000) -> list[NavState]:
    """Every state reachable from the fresh tree, by breadth-first search.

    Intended for exhaustive checks on small trees; raises once limit
    distinct states have been found.
    """
    start = initial_state(tree)
    seen: dict[frozenset[EdgeKey], NavState] = {start.selected: start}
    queue: deque[NavState] = deque([start])
    out = [start]
    while queue:
        state = queue.popleft()
        for step in _successor_selections(state):
            if step in seen:
                continue
            if len(seen) >= limit:
                raise RuntimeError(f"state space exceeds {limit} states")
            nxt = NavState(tree=tree, selected=step)
            seen[step] = nxt
            out.append(nxt)
            queue.append(nxt)
    return out


def _successor_selections(state: NavState) -> list[frozenset[EdgeKey]]:
    succ: list[frozenset[EdgeKey]] = []
    for q in state.open_questions():
        edges = state.tree.outgoing(q)
        if state.tree.node(q).kind is NodeKind.SINGLE_CHOICE:
            groups: list[tuple[Edge, ...]] = [(e,) for e in edges]
        else:
            groups = list(_nonempty_subsets(edges))
        for group in groups:
            succ.append(state.selected | frozenset(e.key for e in group))
    for node in state.tree.nodes:
        if state.answered(node.id):
            sub = state.tree.subtree(node.id)
            succ.append(frozenset(k for k in state.selected if k[0] not in sub))
    return succ


def _nonempty_subsets(edges: tuple[Edge, ...]) -> Iterable[tuple[Edge, ...]]:
    n = len(edges)
    for mask in range(1, 1 << n):
        yield tuple(edges[i] for i in range(n) if mask >> i & 1)

"""Core data model for multi-path decision trees.

A tree is a strict rooted tree: question nodes (single- or multi-choice)
carry labeled outgoing edges, leaves are recommendation nodes. The
multi-path behavior lives in the navigation engine, not in the structure.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from enum import Enum
from typing import Mapping

from .predicates import DataPredicate, FieldDef

NODE_ID_RE = re.compile(r"[A-Za-z0-9_.-]+\Z")


class NodeKind(str, Enum):
    SINGLE_CHOICE = "single"
    MULTI_CHOICE = "multi"
    RECOMMENDATION = "recommendation"

    @property
    def is_question(self) -> bool:
        return self is not NodeKind.RECOMMENDATION


class EdgeSymbol(str, Enum):
    RADIO_CHECKED = "radio_checked"
    RADIO_UNCHECKED = "radio_unchecked"
    NONE = "none"


@dataclass(frozen=True)
class Node:
    id: str
    kind: NodeKind
    label: str
    predicate: DataPredicate | None = None
    detail: str | None = None


@dataclass(frozen=True)
class Edge:
    from_: str
    answer: str
    to: str
    symbol: EdgeSymbol = EdgeSymbol.NONE

    @property
    def key(self) -> tuple[str, str]:
        """Edge identity: (from, answer) pairs are unique per valid tree."""
        return (self.from_, self.answer)


@dataclass(frozen=True)
class TreeDef:
    """A decision tree definition.

    Node and edge order is significant and preserved: it drives rendering
    order and deterministic layout. Derived lookup tables are built eagerly;
    they are tolerant of invalid input so that validation stays total.
    """

    id: str
    title: str
    root: str
    nodes: tuple[Node, ...]
    edges: tuple[Edge, ...]
    fields: Mapping[str, FieldDef] = field(default_factory=dict)

    node_by_id: Mapping[str, Node] = field(init=False, repr=False, compare=False)
    _out: Mapping[str, tuple[Edge, ...]] = field(init=False, repr=False, compare=False)
    _parent: Mapping[str, str] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        by_id: dict[str, Node] = {}
        for node in self.nodes:
            by_id.setdefault(node.id, node)
        out: dict[str, list[Edge]] = {node.id: [] for node in self.nodes}
        parent: dict[str, str] = {}
        for edge in self.edges:
            out.setdefault(edge.from_, []).append(edge)
            parent.setdefault(edge.to, edge.from_)
        object.__setattr__(self, "node_by_id", by_id)
        object.__setattr__(self, "_out", {k: tuple(v) for k, v in out.items()})
        object.__setattr__(self, "_parent", parent)

    def node(self, node_id: str) -> Node:
        try:
            return self.node_by_id[node_id]
        except KeyError:
            raise UnknownNodeError(node_id) from None

    def has_node(self, node_id: str) -> bool:
        return node_id in self.node_by_id

    def outgoing(self, node_id: str) -> tuple[Edge, ...]:
        self.node(node_id)
        return self._out.get(node_id, ())

    def edge(self, from_: str, answer: str) -> Edge | None:
        for e in self._out.get(from_, ()):
            if e.answer == answer:
                return e
        return None

    def parent(self, node_id: str) -> str | None:
        """Parent node id, or None for the root (valid trees only)."""
        return self._parent.get(node_id)

    def subtree(self, node_id: str) -> frozenset[str]:
        """All node ids at or below node_id."""
        self.node(node_id)
        seen = {node_id}
        stack = [node_id]
        while stack:
            for e in self._out.get(stack.pop(), ()):
                if e.to not in seen:
                    seen.add(e.to)
                    stack.append(e.to)
        return frozenset(seen)


class UnknownNodeError(KeyError):
    def __init__(self, node_id: str):
        super().__init__(node_id)
        self.node_id = node_id

    def __str__(self) -> str:
        return f"unknown node id {self.node_id!r}"


@dataclass(frozen=True)
class ValidationIssue:
    """One violated structural invariant, addressable by node/edge."""

    code: str
    message: str
    node: str | None = None
    edge: tuple[str, str] | None = None


ValidationReport = tuple[ValidationIssue, ...]


def children(tree: TreeDef, node_id: str) -> list[tuple[str, str]]:
    """Outgoing (answer, child id) pairs in declaration order."""
    return [(e.answer, e.to) for e in tree.outgoing(node_id)]


def validate_tree(candidate: TreeDef) -> ValidationReport:
    """Check every structural invariant; report all violations.

    Validation is total: it never raises on malformed candidates, the
    issues are the payload. An empty report means the tree is valid.
    """
    issues: list[ValidationIssue] = []

    seen_ids: set[str] = set()
    for node in candidate.nodes:
        if not NODE_ID_RE.match(node.id):
            issues.append(ValidationIssue(
                "InvalidNodeId", f"node id {node.id!r} has characters outside [A-Za-z0-9_.-]",
                node=node.id))
        if node.id in seen_ids:
            issues.append(ValidationIssue(
                "DuplicateNodeId", f"node id {node.id!r} declared more than once", node=node.id))
        seen_ids.add(node.id)

    if candidate.root not in seen_ids:
        issues.append(ValidationIssue(
            "UnknownRoot", f"root {candidate.root!r} is not a declared node", node=candidate.root))

    incoming: dict[str, int] = {}
    seen_edge_keys: set[tuple[str, str]] = set()
    for edge in candidate.edges:
        if edge.from_ not in seen_ids:
            issues.append(ValidationIssue(
                "UnknownSource", f"edge source {edge.from_!r} is not a declared node",
                edge=edge.key))
        if edge.to not in seen_ids:
            issues.append(ValidationIssue(
                "UnknownTarget", f"edge target {edge.to!r} is not a declared node",
                edge=edge.key))
        if edge.key in seen_edge_keys:
            issues.append(ValidationIssue(
                "DuplicateAnswer",
                f"answer {edge.answer!r} declared more than once on node {edge.from_!r}",
                edge=edge.key))
        seen_edge_keys.add(edge.key)
        source = candidate.node_by_id.get(edge.from_)
        if source is not None and source.kind is NodeKind.RECOMMENDATION:
            issues.append(ValidationIssue(
                "EdgeFromRecommendation",
                f"recommendation node {edge.from_!r} must not have outgoing edges",
                edge=edge.key))
        incoming[edge.to] = incoming.get(edge.to, 0) + 1

    if incoming.get(candidate.root, 0) > 0:
        issues.append(ValidationIssue(
            "RootHasIncoming", f"root {candidate.root!r} must not have incoming edges",
            node=candidate.root))
    for node in candidate.nodes:
        if node.id == candidate.root:
            continue
        count = incoming.get(node.id, 0)
        if count > 1:
            issues.append(ValidationIssue(
                "MultipleParents",
                f"node {node.id!r} has {count} incoming edges; the structure must be a tree",
                node=node.id))

    # Reachability from root covers connectivity; with unique parents it
    # also rules out cycles (a cycle would have no path from the root).
    if candidate.root in candidate.node_by_id:
        reachable = _reachable_from(candidate, candidate.root)
        for node in candidate.nodes:
            if node.id not in reachable:
                issues.append(ValidationIssue(
                    "UnreachableNode", f"node {node.id!r} is not reachable from the root",
                    node=node.id))

    for node in candidate.nodes:
        out = candidate._out.get(node.id, ())
        if node.kind.is_question and len(out) < 2:
            issues.append(ValidationIssue(
                "QuestionWithoutChoices",
                f"question node {node.id!r} has {len(out)} outgoing edges, needs at least 2",
                node=node.id))
        if node.kind is NodeKind.RECOMMENDATION and node.predicate is not None:
            issues.append(ValidationIssue(
                "RecommendationWithPredicate",
                f"recommendation node {node.id!r} must not carry a predicate", node=node.id))
        if node.predicate is not None:
            issues.extend(_check_predicate(candidate, node))

    return tuple(issues)


def _reachable_from(tree: TreeDef, start: str) -> set[str]:
    seen = {start}
    stack = [start]
    while stack:
        for e in tree._out.get(stack.pop(), ()):
            if e.to not in seen:
                seen.add(e.to)
                stack.append(e.to)
    return seen


def _check_predicate(tree: TreeDef, node: Node) -> list[ValidationIssue]:
    pred = node.predicate
    assert pred is not None
    issues = []
    for name in pred.expr.field_names():
        if name not in tree.fields:
            issues.append(ValidationIssue(
                "PredicateUnknownField",
                f"predicate on node {node.id!r} references undeclared field {name!r}",
                node=node.id))
    if node.kind is NodeKind.SINGLE_CHOICE:
        answers = {e.answer for e in tree._out.get(node.id, ())}
        true_answer, false_answer = resolve_predicate_answers(tree, node)
        if true_answer not in answers:
            issues.append(ValidationIssue(
                "PredicateAnswerUnknown",
                f"predicate true answer {true_answer!r} matches no edge of node {node.id!r}",
                node=node.id))
        if false_answer is None or false_answer not in answers:
            issues.append(ValidationIssue(
                "PredicateAnswerUnknown",
                f"predicate false answer {false_answer!r} matches no edge of node {node.id!r}",
                node=node.id))
    return issues


def resolve_predicate_answers(tree: TreeDef, node: Node) -> tuple[str, str | None]:
    """Designated (true, false) answer labels for a node's predicate.

    Defaults: true binds to the edge labeled "Yes"; false to the explicit
    designation, the edge labeled "No", or the only other edge of a
    two-edge node. A None false answer is a validation issue.
    """
    pred = node.predicate
    assert pred is not None
    true_answer = pred.true_answer if pred.true_answer is not None else "Yes"
    if pred.false_answer is not None:
        return true_answer, pred.false_answer
    answers = [e.answer for e in tree._out.get(node.id, ())]
    if "No" in answers and true_answer != "No":
        return true_answer, "No"
    others = [a for a in answers if a != true_answer]
    if len(answers) == 2 and len(others) == 1:
        return true_answer, others[0]
    return true_answer, None

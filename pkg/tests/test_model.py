"""Structural model: lookups, tree helpers, and total validation."""

import pytest

from guidetree.model import (
    Edge,
    EdgeSymbol,
    Node,
    NodeKind,
    TreeDef,
    UnknownNodeError,
    children,
    resolve_predicate_answers,
    validate_tree,
)
from guidetree.predicates import (
    Comparison,
    ComparisonOp,
    DataPredicate,
    FieldDef,
    FieldType,
)
from treegen import t1


def codes(report):
    return sorted(issue.code for issue in report)


class TestTreeDef:
    def test_t1_is_valid(self):
        assert validate_tree(t1()) == ()
        assert validate_tree(t1(with_predicates=True)) == ()

    def test_node_lookup(self):
        tree = t1()
        assert tree.node("n0").label == "Severity?"
        assert tree.has_node("r2")
        assert not tree.has_node("zz")
        with pytest.raises(UnknownNodeError) as exc:
            tree.node("zz")
        assert exc.value.node_id == "zz"

    def test_outgoing_preserves_declaration_order(self):
        tree = t1()
        assert [e.answer for e in tree.outgoing("n0")] == ["mild", "severe"]
        assert children(tree, "n1") == [("diabetes", "r1"), ("obesity", "r2")]
        assert tree.outgoing("r1") == ()

    def test_edge_lookup(self):
        tree = t1()
        edge = tree.edge("n0", "severe")
        assert edge is not None and edge.to == "n2"
        assert edge.key == ("n0", "severe")
        assert tree.edge("n0", "unknown") is None

    def test_parent_and_subtree(self):
        tree = t1()
        assert tree.parent("n0") is None
        assert tree.parent("r1") == "n1"
        assert tree.subtree("n1") == frozenset({"n1", "r1", "r2"})
        assert tree.subtree("n0") == frozenset({"n0", "n1", "n2", "r1", "r2"})
        assert tree.subtree("r2") == frozenset({"r2"})

    def test_node_kind_is_question(self):
        assert NodeKind.SINGLE_CHOICE.is_question
        assert NodeKind.MULTI_CHOICE.is_question
        assert not NodeKind.RECOMMENDATION.is_question

    def test_edge_symbol_default(self):
        assert Edge("a", "x", "b").symbol is EdgeSymbol.NONE


def make_tree(nodes, edges, root="n0", fields=None):
    return TreeDef(id="x", title="x", root=root, nodes=tuple(nodes),
                   edges=tuple(edges), fields=fields or {})


REC = NodeKind.RECOMMENDATION
SINGLE = NodeKind.SINGLE_CHOICE
MULTI = NodeKind.MULTI_CHOICE


class TestValidation:
    def test_single_recommendation_root_is_valid(self):
        tree = make_tree([Node("n0", REC, "done")], [])
        assert validate_tree(tree) == ()

    def test_invalid_node_id(self):
        tree = make_tree([Node("bad id!", REC, "x")], [], root="bad id!")
        assert "InvalidNodeId" in codes(validate_tree(tree))

    def test_duplicate_node_id(self):
        tree = make_tree(
            [Node("n0", SINGLE, "q"), Node("a", REC, "x"), Node("a", REC, "y")],
            [Edge("n0", "l", "a"), Edge("n0", "r", "a")])
        assert "DuplicateNodeId" in codes(validate_tree(tree))

    def test_unknown_root(self):
        tree = make_tree([Node("n0", REC, "x")], [], root="ghost")
        assert "UnknownRoot" in codes(validate_tree(tree))

    def test_unknown_edge_endpoints(self):
        tree = make_tree(
            [Node("n0", SINGLE, "q"), Node("a", REC, "x"), Node("b", REC, "y")],
            [Edge("n0", "l", "a"), Edge("n0", "r", "b"),
             Edge("ghost", "l", "a"), Edge("n0", "z", "ghost2")])
        found = codes(validate_tree(tree))
        assert "UnknownSource" in found
        assert "UnknownTarget" in found

    def test_duplicate_answer_on_same_node(self):
        tree = make_tree(
            [Node("n0", SINGLE, "q"), Node("a", REC, "x"), Node("b", REC, "y")],
            [Edge("n0", "same", "a"), Edge("n0", "same", "b")])
        assert "DuplicateAnswer" in codes(validate_tree(tree))

    def test_edge_from_recommendation(self):
        tree = make_tree(
            [Node("n0", SINGLE, "q"), Node("a", REC, "x"), Node("b", REC, "y")],
            [Edge("n0", "l", "a"), Edge("n0", "r", "b"), Edge("a", "oops", "b")])
        found = codes(validate_tree(tree))
        assert "EdgeFromRecommendation" in found
        assert "MultipleParents" in found  # b gains two parents too

    def test_root_with_incoming_edge(self):
        tree = make_tree(
            [Node("n0", SINGLE, "q"), Node("a", SINGLE, "q2"),
             Node("b", REC, "x"), Node("c", REC, "y"), Node("d", REC, "z")],
            [Edge("n0", "l", "a"), Edge("n0", "r", "b"),
             Edge("a", "l", "c"), Edge("a", "r", "d"), Edge("a", "back", "n0")])
        assert "RootHasIncoming" in codes(validate_tree(tree))

    def test_multiple_parents(self):
        tree = make_tree(
            [Node("n0", SINGLE, "q"), Node("a", REC, "x"), Node("b", REC, "y")],
            [Edge("n0", "l", "a"), Edge("n0", "r", "b"), Edge("n0", "r2", "b")])
        assert "MultipleParents" in codes(validate_tree(tree))

    def test_unreachable_node(self):
        tree = make_tree(
            [Node("n0", REC, "x"), Node("island", REC, "y")], [])
        assert "UnreachableNode" in codes(validate_tree(tree))

    def test_question_with_too_few_answers(self):
        tree = make_tree(
            [Node("n0", SINGLE, "q"), Node("a", REC, "x")],
            [Edge("n0", "only", "a")])
        assert "QuestionWithoutChoices" in codes(validate_tree(tree))
        leafq = make_tree([Node("n0", MULTI, "q")], [])
        assert "QuestionWithoutChoices" in codes(validate_tree(leafq))

    def test_recommendation_with_predicate(self):
        pred = DataPredicate(Comparison("f", ComparisonOp.GT, 1.0))
        tree = make_tree(
            [Node("n0", SINGLE, "q"), Node("a", REC, "x", predicate=pred),
             Node("b", REC, "y")],
            [Edge("n0", "l", "a"), Edge("n0", "r", "b")],
            fields={"f": FieldDef("f", FieldType.NUMBER)})
        assert "RecommendationWithPredicate" in codes(validate_tree(tree))

    def test_predicate_referencing_undeclared_field(self):
        pred = DataPredicate(Comparison("ghost", ComparisonOp.GT, 1.0),
                             true_answer="l", false_answer="r")
        tree = make_tree(
            [Node("n0", SINGLE, "q", predicate=pred),
             Node("a", REC, "x"), Node("b", REC, "y")],
            [Edge("n0", "l", "a"), Edge("n0", "r", "b")])
        assert "PredicateUnknownField" in codes(validate_tree(tree))

    def test_predicate_answer_matching_no_edge(self):
        pred = DataPredicate(Comparison("f", ComparisonOp.GT, 1.0),
                             true_answer="ghost", false_answer="r")
        tree = make_tree(
            [Node("n0", SINGLE, "q", predicate=pred),
             Node("a", REC, "x"), Node("b", REC, "y")],
            [Edge("n0", "l", "a"), Edge("n0", "r", "b")],
            fields={"f": FieldDef("f", FieldType.NUMBER)})
        assert "PredicateAnswerUnknown" in codes(validate_tree(tree))

    def test_validation_reports_all_issues_at_once(self):
        tree = make_tree(
            [Node("n0", SINGLE, "q"), Node("n0", REC, "dup")],
            [Edge("ghost", "a", "ghost2")], root="missing")
        found = codes(validate_tree(tree))
        assert len(found) >= 4  # duplicate id, bad root, two bad endpoints


class TestPredicateAnswerResolution:
    def two_answer_node(self, answers, pred):
        tree = make_tree(
            [Node("n0", SINGLE, "q", predicate=pred),
             Node("a", REC, "x"), Node("b", REC, "y")],
            [Edge("n0", answers[0], "a"), Edge("n0", answers[1], "b")],
            fields={"f": FieldDef("f", FieldType.BOOLEAN)})
        return tree, tree.node("n0")

    def test_explicit_designations_win(self):
        pred = DataPredicate(Comparison("f", ComparisonOp.EQ, True),
                             true_answer="hi", false_answer="lo")
        tree, node = self.two_answer_node(["hi", "lo"], pred)
        assert resolve_predicate_answers(tree, node) == ("hi", "lo")

    def test_default_yes_no(self):
        pred = DataPredicate(Comparison("f", ComparisonOp.EQ, True))
        tree, node = self.two_answer_node(["Yes", "No"], pred)
        assert resolve_predicate_answers(tree, node) == ("Yes", "No")

    def test_false_defaults_to_only_other_edge(self):
        pred = DataPredicate(Comparison("f", ComparisonOp.EQ, True),
                             true_answer="present")
        tree, node = self.two_answer_node(["present", "absent"], pred)
        assert resolve_predicate_answers(tree, node) == ("present", "absent")

"""Semi-automatic navigation driven by patient data."""

import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from guidetree.autonav import (
    AutoStep,
    StopReason,
    advance_navigator,
    auto_advance,
)
from guidetree.model import Edge, Node, NodeKind, TreeDef, validate_tree
from guidetree.navigation import ActionKind, Navigator, apply_answer, initial_state
from guidetree.predicates import (
    BoolField,
    Comparison,
    ComparisonOp,
    DataPredicate,
    FieldDef,
    FieldType,
    PatientRecord,
    Quantity,
    Truth,
    TypeMismatchError,
)
from treegen import random_tree

REC = NodeKind.RECOMMENDATION
SINGLE = NodeKind.SINGLE_CHOICE
MULTI = NodeKind.MULTI_CHOICE

FIELDS = {
    "crp": FieldDef("crp", FieldType.NUMBER, unit="mg/L"),
    "fever": FieldDef("fever", FieldType.BOOLEAN),
}


def clinic_tree() -> TreeDef:
    """q0 (crp>10) -> high: q1 (fever) -> Yes: m0 {r_a, r_b} / No: r_nofever
                   -> low: r_low"""
    tree = TreeDef(
        id="clinic", title="worked autonav example", root="q0",
        nodes=(
            Node("q0", SINGLE, "CRP elevated?",
                 predicate=DataPredicate(Comparison("crp", ComparisonOp.GT, 10.0),
                                         true_answer="high", false_answer="low")),
            Node("q1", SINGLE, "Fever?",
                 predicate=DataPredicate(BoolField("fever"))),
            Node("m0", MULTI, "Supportive measures"),
            Node("r_low", REC, "Outpatient care"),
            Node("r_nofever", REC, "Watchful waiting"),
            Node("r_a", REC, "Oxygen"),
            Node("r_b", REC, "Fluids"),
        ),
        edges=(
            Edge("q0", "high", "q1"),
            Edge("q0", "low", "r_low"),
            Edge("q1", "Yes", "m0"),
            Edge("q1", "No", "r_nofever"),
            Edge("m0", "oxygen", "r_a"),
            Edge("m0", "fluids", "r_b"),
        ),
        fields=FIELDS,
    )
    assert validate_tree(tree) == ()
    return tree


def record(**values):
    return PatientRecord(values)


class TestAutoAdvance:
    def test_advances_until_multi_choice(self):
        result = auto_advance(
            initial_state(clinic_tree()),
            record(crp=Quantity(50.0, "mg/L"), fever=True))
        assert [(s.node, s.answer) for s in result.steps] == [
            ("q0", "high"), ("q1", "Yes")]
        assert result.steps[0].verdict is Truth.TRUE
        assert result.stop.reason is StopReason.MULTI_CHOICE_STOP
        assert result.stop.node == "m0"
        assert result.state.frontier == frozenset({"m0"})

    def test_false_verdict_takes_false_answer(self):
        result = auto_advance(initial_state(clinic_tree()),
                              record(crp=Quantity(3.0, "mg/L")))
        assert [(s.node, s.answer) for s in result.steps] == [("q0", "low")]
        assert result.steps[0].verdict is Truth.FALSE
        assert result.stop.reason is StopReason.NO_OPEN_QUESTIONS
        assert result.stop.node is None
        assert result.state.is_complete()

    def test_default_yes_no_binding(self):
        result = auto_advance(
            initial_state(clinic_tree()),
            record(crp=Quantity(50.0, "mg/L"), fever=False))
        assert [(s.node, s.answer) for s in result.steps] == [
            ("q0", "high"), ("q1", "No")]
        assert result.stop.reason is StopReason.NO_OPEN_QUESTIONS

    def test_missing_data_reports_starved_fields(self):
        result = auto_advance(initial_state(clinic_tree()), record())
        assert result.steps == ()
        assert result.stop.reason is StopReason.MISSING_DATA
        assert result.stop.node == "q0"
        assert result.stop.missing_fields == ("crp",)
        assert result.state.selected == frozenset()

    def test_unknown_mid_path_stops_there(self):
        result = auto_advance(initial_state(clinic_tree()),
                              record(crp=Quantity(50.0, "mg/L")))
        assert [(s.node, s.answer) for s in result.steps] == [("q0", "high")]
        assert result.stop.reason is StopReason.MISSING_DATA
        assert result.stop.node == "q1"
        assert result.stop.missing_fields == ("fever",)

    def test_input_state_is_never_mutated(self):
        state = initial_state(clinic_tree())
        auto_advance(state, record(crp=Quantity(50.0, "mg/L"), fever=True))
        assert state.selected == frozenset()


def priority_tree() -> TreeDef:
    """A multi root opening three branches that block differently."""
    tree = TreeDef(
        id="prio", title="blocker priority", root="m",
        nodes=(
            Node("m", MULTI, "Pick workstreams"),
            Node("q_data", SINGLE, "Needs data",
                 predicate=DataPredicate(BoolField("fever"))),
            Node("q_plain", SINGLE, "No predicate here"),
            Node("m_deep", MULTI, "More choices"),
            Node("r1", REC, "r1"), Node("r2", REC, "r2"),
            Node("r3", REC, "r3"), Node("r4", REC, "r4"),
            Node("r5", REC, "r5"), Node("r6", REC, "r6"),
        ),
        edges=(
            Edge("m", "a", "q_data"),
            Edge("m", "b", "q_plain"),
            Edge("m", "c", "m_deep"),
            Edge("q_data", "Yes", "r1"), Edge("q_data", "No", "r2"),
            Edge("q_plain", "x", "r3"), Edge("q_plain", "y", "r4"),
            Edge("m_deep", "u", "r5"), Edge("m_deep", "v", "r6"),
        ),
        fields=FIELDS,
    )
    assert validate_tree(tree) == ()
    return tree


class TestStopPriority:
    def open_all(self):
        return apply_answer(initial_state(priority_tree()), "m", ("a", "b", "c"))

    def test_missing_data_outranks_everything(self):
        result = auto_advance(self.open_all(), record())
        assert result.stop.reason is StopReason.MISSING_DATA
        assert result.stop.node == "q_data"

    def test_no_predicate_outranks_multi_choice(self):
        result = auto_advance(self.open_all(), record(fever=True))
        # q_data resolves automatically, leaving q_plain and m_deep
        assert [(s.node, s.answer) for s in result.steps] == [("q_data", "Yes")]
        assert result.stop.reason is StopReason.NO_PREDICATE
        assert result.stop.node == "q_plain"

    def test_multi_choice_is_the_weakest_blocker(self):
        state = apply_answer(initial_state(priority_tree()), "m", ("c",))
        result = auto_advance(state, record(fever=True))
        assert result.stop.reason is StopReason.MULTI_CHOICE_STOP
        assert result.stop.node == "m_deep"


class TestTypeMismatchAbort:
    def bad_record(self):
        # q0 decides, then q1's BoolField meets a number: abort mid-run
        return record(crp=Quantity(50.0, "mg/L"), fever="very")

    def test_auto_advance_discards_partial_trace(self):
        state = initial_state(clinic_tree())
        with pytest.raises(TypeMismatchError):
            auto_advance(state, self.bad_record())
        assert state.selected == frozenset()

    def test_advance_navigator_leaves_session_untouched(self):
        nav = Navigator(clinic_tree())
        with pytest.raises(TypeMismatchError):
            advance_navigator(nav, self.bad_record())
        assert nav.state.selected == frozenset()
        assert nav.history == []


class TestAdvanceNavigator:
    def test_steps_are_recorded_as_auto_answers(self):
        nav = Navigator(clinic_tree())
        result = advance_navigator(
            nav, record(crp=Quantity(50.0, "mg/L"), fever=True))
        assert nav.state.selected == result.state.selected
        assert [a.kind for a in nav.history] == [
            ActionKind.AUTO_ANSWER, ActionKind.AUTO_ANSWER]
        assert [a.node for a in nav.history] == ["q0", "q1"]

    def test_idempotent_on_same_record(self):
        nav = Navigator(clinic_tree())
        data = record(crp=Quantity(50.0, "mg/L"), fever=True)
        first = advance_navigator(nav, data)
        again = advance_navigator(nav, data)
        assert again.steps == ()
        assert again.stop == first.stop
        assert again.state.selected == first.state.selected


class TestDefensiveAnswerResolution:
    def test_predicate_bound_to_missing_edge_blocks_as_no_predicate(self):
        # Invalid by validation, but auto navigation must still not crash.
        tree = TreeDef(
            id="odd", title="odd", root="q",
            nodes=(
                Node("q", SINGLE, "q?",
                     predicate=DataPredicate(BoolField("fever"),
                                             true_answer="ghost",
                                             false_answer="also-ghost")),
                Node("a", REC, "a"), Node("b", REC, "b"),
            ),
            edges=(Edge("q", "left", "a"), Edge("q", "right", "b")),
            fields=FIELDS,
        )
        result = auto_advance(initial_state(tree), record(fever=True))
        assert result.steps == ()
        assert result.stop.reason is StopReason.NO_PREDICATE
        assert result.stop.node == "q"


# ---------------------------------------------------------------------------
# Property tests on random predicated trees.

def random_record_for(tree: TreeDef, rng: random.Random, coverage: float):
    values = {}
    for name in tree.fields:
        if rng.random() < coverage:
            unit = "mg" if rng.random() < 0.5 else None
            values[name] = Quantity(float(rng.randrange(10)), unit)
    return PatientRecord(values)


@given(st.integers(0, 2**31), st.integers(1, 50), st.floats(0.0, 1.0))
@settings(max_examples=80, deadline=None)
def test_auto_advance_is_idempotent(seed, n_nodes, coverage):
    rng = random.Random(seed)
    tree = random_tree(rng, n_nodes, with_fields=True)
    data = random_record_for(tree, rng, coverage)
    first = auto_advance(initial_state(tree), data)
    second = auto_advance(first.state, data)
    assert second.steps == ()
    assert second.state.selected == first.state.selected
    assert second.stop == first.stop


@given(st.integers(0, 2**31), st.integers(1, 50), st.floats(0.0, 0.8))
@settings(max_examples=80, deadline=None)
def test_more_data_only_refines_the_outcome(seed, n_nodes, coverage):
    """Extending the record can extend, never contradict, auto navigation."""
    rng = random.Random(seed)
    tree = random_tree(rng, n_nodes, with_fields=True)
    sparse = random_record_for(tree, rng, coverage)
    richer_values = dict(sparse.values)
    for name in tree.fields:
        if name not in richer_values and rng.random() < 0.7:
            richer_values[name] = Quantity(float(rng.randrange(10)), None)
    richer = PatientRecord(richer_values)
    a = auto_advance(initial_state(tree), sparse)
    b = auto_advance(initial_state(tree), richer)
    assert a.state.selected <= b.state.selected
    # every step taken under sparse data is also taken under richer data
    assert {(s.node, s.answer) for s in a.steps} <= {(s.node, s.answer) for s in b.steps}

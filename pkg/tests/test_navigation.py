"""Navigation engine: answers, jumps, rollback, history replay.

Worked examples use the five-node T1 tree; property tests compare the
production engine against the independent set-based interpreter in
treegen.Interp on random trees; a small exhaustive suite cross-checks
the full state space and every jump on all trees up to 9 nodes (the
12-node corpus runs in the acceptance suite).
"""

import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from guidetree.model import NodeKind, UnknownNodeError
from guidetree.navigation import (
    Action,
    ActionKind,
    GotoKind,
    InvalidActionError,
    NavState,
    Navigator,
    ReplayError,
    UnreachableError,
    apply_action,
    apply_answer,
    apply_goto,
    classify_goto,
    initial_state,
    reachable_states,
)
from treegen import Interp, canonical_shapes, random_tree, random_walk, shape_to_tree, t1


class TestFreshState:
    def test_frontier_is_root(self):
        state = initial_state(t1())
        assert state.frontier == frozenset({"n0"})
        assert state.frontier_in_order() == ("n0",)
        assert state.open_questions() == ("n0",)
        assert not state.is_complete()

    def test_nothing_is_grayed_before_interaction(self):
        state = initial_state(t1())
        assert state.grayed_nodes() == frozenset()

    def test_all_recommendations_reachable(self):
        state = initial_state(t1())
        assert state.current_recommendations() == ()
        assert set(state.reachable_recommendations()) == {"n2", "r1", "r2"}


class TestAnswer:
    def test_single_choice_answer(self):
        state = apply_answer(initial_state(t1()), "n0", ("severe",))
        assert state.selected == frozenset({("n0", "severe")})
        assert state.frontier == frozenset({"n2"})
        assert state.answered("n0")
        assert state.selected_answers("n0") == ("severe",)
        assert state.is_complete()
        assert state.current_recommendations() == ("n2",)
        assert state.reachable_recommendations() == ("n2",)
        assert state.grayed_nodes() == frozenset({"n1", "r1", "r2"})

    def test_multi_choice_selects_several_paths_at_once(self):
        state = apply_answer(initial_state(t1()), "n0", ("mild",))
        state = apply_answer(state, "n1", ("diabetes", "obesity"))
        assert state.frontier == frozenset({"r1", "r2"})
        assert state.current_recommendations() == ("r1", "r2")
        assert state.is_complete()
        assert state.grayed_nodes() == frozenset({"n2"})

    def test_multi_choice_partial_selection(self):
        state = apply_answer(initial_state(t1()), "n0", ("mild",))
        state = apply_answer(state, "n1", ("obesity",))
        assert state.frontier == frozenset({"r2"})
        assert state.grayed_nodes() == frozenset({"n2", "r1"})

    def test_answer_requires_frontier_membership(self):
        state = initial_state(t1())
        with pytest.raises(InvalidActionError):
            apply_answer(state, "n1", ("diabetes",))

    def test_answer_rejects_answered_node(self):
        state = apply_answer(initial_state(t1()), "n0", ("severe",))
        with pytest.raises(InvalidActionError):
            apply_answer(state, "n0", ("mild",))

    def test_answer_rejects_empty_and_duplicate_choices(self):
        state = initial_state(t1())
        with pytest.raises(InvalidActionError):
            apply_answer(state, "n0", ())
        mild = apply_answer(state, "n0", ("mild",))
        with pytest.raises(InvalidActionError):
            apply_answer(mild, "n1", ("diabetes", "diabetes"))

    def test_single_choice_takes_exactly_one(self):
        with pytest.raises(InvalidActionError):
            apply_answer(initial_state(t1()), "n0", ("mild", "severe"))

    def test_answer_rejects_unknown_answer_label(self):
        with pytest.raises(InvalidActionError):
            apply_answer(initial_state(t1()), "n0", ("critical",))

    def test_answer_rejects_recommendation_node(self):
        state = apply_answer(initial_state(t1()), "n0", ("severe",))
        with pytest.raises(InvalidActionError):
            apply_answer(state, "n2", ("x",))

    def test_unknown_node_raises(self):
        with pytest.raises(UnknownNodeError):
            apply_answer(initial_state(t1()), "ghost", ("x",))


class TestGoto:
    def test_goto_frontier_node_is_noop(self):
        state = initial_state(t1())
        assert classify_goto(state, "n0") is GotoKind.NOOP
        new, kind = apply_goto(state, "n0")
        assert kind is GotoKind.NOOP
        assert new.selected == state.selected

    def test_goto_answered_node_rolls_back_its_subtree(self):
        state = apply_answer(initial_state(t1()), "n0", ("mild",))
        state = apply_answer(state, "n1", ("diabetes",))
        assert classify_goto(state, "n1") is GotoKind.BACKWARD
        new, kind = apply_goto(state, "n1")
        assert kind is GotoKind.BACKWARD
        assert new.selected == frozenset({("n0", "mild")})
        assert new.frontier == frozenset({"n1"})

    def test_goto_root_resets_everything(self):
        state = apply_answer(initial_state(t1()), "n0", ("mild",))
        state = apply_answer(state, "n1", ("diabetes", "obesity"))
        new, kind = apply_goto(state, "n0")
        assert kind is GotoKind.BACKWARD
        assert new.selected == frozenset()

    def test_goto_deep_unvisited_node_fast_forwards(self):
        state = initial_state(t1())
        assert classify_goto(state, "r1") is GotoKind.FAST_FORWARD
        new, kind = apply_goto(state, "r1")
        assert kind is GotoKind.FAST_FORWARD
        assert new.selected == frozenset({("n0", "mild"), ("n1", "diabetes")})
        assert new.frontier == frozenset({"r1"})

    def test_fast_forward_gives_multi_choice_only_the_path_edge(self):
        state = apply_answer(initial_state(t1()), "n0", ("mild",))
        new, kind = apply_goto(state, "r2")
        assert kind is GotoKind.FAST_FORWARD
        assert new.selected_answers("n1") == ("obesity",)

    def test_goto_node_cut_off_by_answered_ancestor_raises(self):
        state = apply_answer(initial_state(t1()), "n0", ("severe",))
        with pytest.raises(UnreachableError) as exc:
            classify_goto(state, "r1")
        assert exc.value.node_id == "r1"
        assert exc.value.blocked_at == "n0"
        with pytest.raises(UnreachableError):
            apply_goto(state, "r1")

    def test_goto_unselected_sibling_of_multi_answer_raises(self):
        state = apply_answer(initial_state(t1()), "n0", ("mild",))
        state = apply_answer(state, "n1", ("diabetes",))
        with pytest.raises(UnreachableError) as exc:
            apply_goto(state, "r2")
        assert exc.value.blocked_at == "n1"


class TestNavigator:
    def test_history_records_answers_and_jumps(self):
        nav = Navigator(t1())
        nav.answer("n0", ("mild",))
        nav.answer("n1", ("obesity",))
        nav.goto("n0")
        assert [a.kind for a in nav.history] == [
            ActionKind.ANSWER, ActionKind.ANSWER, ActionKind.GOTO]
        assert nav.state.selected == frozenset()

    def test_noop_goto_is_not_recorded(self):
        nav = Navigator(t1())
        assert nav.goto("n0") is GotoKind.NOOP
        assert nav.history == []

    def test_auto_answers_are_marked(self):
        nav = Navigator(t1())
        nav.answer("n0", ("severe",), auto=True)
        assert nav.history[0].kind is ActionKind.AUTO_ANSWER

    def test_reset(self):
        nav = Navigator(t1())
        nav.answer("n0", ("severe",))
        nav.reset()
        assert nav.state.selected == frozenset()
        assert nav.history[-1].kind is ActionKind.RESET

    def test_replay_reproduces_state(self):
        nav = Navigator(t1())
        nav.answer("n0", ("mild",))
        nav.answer("n1", ("diabetes", "obesity"))
        nav.goto("n1")
        nav.answer("n1", ("obesity",))
        twin = Navigator.replay(t1(), list(nav.history))
        assert twin.state.selected == nav.state.selected
        assert twin.history == nav.history

    def test_replay_wraps_failures_with_position(self):
        bad = [Action(ActionKind.ANSWER, "n0", ("severe",)),
               Action(ActionKind.ANSWER, "n1", ("diabetes",))]
        with pytest.raises(ReplayError) as exc:
            Navigator.replay(t1(), bad)
        assert exc.value.index == 1
        assert exc.value.action == bad[1]
        assert isinstance(exc.value.cause, InvalidActionError)

    def test_apply_action_dispatch(self):
        state = initial_state(t1())
        state = apply_action(state, Action(ActionKind.ANSWER, "n0", ("mild",)))
        state = apply_action(state, Action(ActionKind.GOTO, "n0"))
        assert state.selected == frozenset()
        state = apply_action(state, Action(ActionKind.RESET))
        assert state.selected == frozenset()


class TestStateEnumeration:
    def test_t1_has_exactly_six_states(self):
        states = reachable_states(t1())
        selections = {s.selected for s in states}
        assert len(selections) == 6
        assert frozenset() in selections
        assert frozenset({("n0", "mild"), ("n1", "diabetes"), ("n1", "obesity")}) \
            in selections

    def test_limit_guard(self):
        rng = random.Random(7)
        tree = random_tree(rng, 40)
        with pytest.raises(RuntimeError):
            reachable_states(tree, limit=3)


# ---------------------------------------------------------------------------
# Property tests against the independent interpreter.

@st.composite
def tree_and_walk(draw):
    seed = draw(st.integers(0, 2**31))
    n_nodes = draw(st.integers(1, 40))
    steps = draw(st.integers(0, 25))
    return seed, n_nodes, steps


@given(tree_and_walk())
@settings(max_examples=120, deadline=None)
def test_engine_agrees_with_reference_interpreter(params):
    seed, n_nodes, steps = params
    rng = random.Random(seed)
    tree = random_tree(rng, n_nodes)
    interp = Interp(tree)
    nav = Navigator(tree)
    for move, node, choices in random_walk(rng, interp, steps):
        if move == "answer":
            nav.answer(node, choices)
        elif move == "goto":
            assert nav.goto(node) is GotoKind.BACKWARD
        else:
            nav.reset()
        # full state agreement after every step
        sel = nav.state.selected
        assert nav.state.frontier == interp.frontier(sel)
        # path closure: every selected edge source is the root or itself
        # the target of a selected edge
        answered = interp.answered(sel)
        targets = {interp.edge_to[k] for k in sel}
        for frm, _ans in sel:
            assert frm == tree.root or frm in targets
        # frontier soundness: frontier nodes are unanswered edge targets
        for node_id in nav.state.frontier:
            assert node_id not in answered
            assert node_id == tree.root or node_id in targets


@given(tree_and_walk())
@settings(max_examples=60, deadline=None)
def test_replay_reproduces_random_walks(params):
    seed, n_nodes, steps = params
    rng = random.Random(seed)
    tree = random_tree(rng, n_nodes)
    interp = Interp(tree)
    nav = Navigator(tree)
    for move, node, choices in random_walk(rng, interp, steps):
        if move == "answer":
            nav.answer(node, choices)
        elif move == "goto":
            nav.goto(node)
        else:
            nav.reset()
    twin = Navigator.replay(tree, list(nav.history))
    assert twin.state.selected == nav.state.selected


@given(st.integers(0, 2**31), st.integers(1, 30), st.integers(0, 15))
@settings(max_examples=60, deadline=None)
def test_navigation_is_invariant_under_sibling_permutation(seed, n_nodes, steps):
    """Supports the isomorphism dedup in the exhaustive acceptance corpus."""
    rng = random.Random(seed)
    tree = random_tree(rng, n_nodes)
    shuffled_edges = list(tree.edges)
    rng.shuffle(shuffled_edges)
    twin = NavState(
        tree=type(tree)(id=tree.id, title=tree.title, root=tree.root,
                        nodes=tree.nodes, edges=tuple(shuffled_edges),
                        fields=tree.fields),
        selected=frozenset())
    interp = Interp(tree)
    nav = Navigator(tree)
    twin_nav = Navigator(twin.tree)
    for move, node, choices in random_walk(rng, interp, steps):
        if move == "answer":
            nav.answer(node, choices)
            twin_nav.answer(node, choices)
        elif move == "goto":
            nav.goto(node)
            twin_nav.goto(node)
        else:
            nav.reset()
            twin_nav.reset()
        assert nav.state.selected == twin_nav.state.selected
        assert nav.state.frontier == twin_nav.state.frontier
        assert nav.state.grayed_nodes() == twin_nav.state.grayed_nodes()


# ---------------------------------------------------------------------------
# Exhaustive oracle on small trees (the 12-node corpus runs in acceptance).

KINDS = {GotoKind.NOOP: "noop", GotoKind.BACKWARD: "backward",
         GotoKind.FAST_FORWARD: "fast_forward"}


def oracle_check_tree(tree):
    """Cross-check classification and both jump semantics on every state."""
    interp = Interp(tree)
    table = interp.enumerate_states()

    # production state enumeration sees exactly the same state space
    produced = {s.selected for s in reachable_states(tree)}
    assert produced == set(table)

    node_ids = [n.id for n in tree.nodes]
    for sel, seq in table.items():
        state = NavState(tree=tree, selected=sel)
        for nid in node_ids:
            expect = interp.classify_goto(sel, nid)
            try:
                got = KINDS[classify_goto(state, nid)]
            except UnreachableError:
                got = "unreachable"
            assert got == expect, (tree.id, sel, nid, got, expect)
            if expect == "backward":
                new, _ = apply_goto(state, nid)
                assert new.selected == interp.goto_backward(seq, nid)
            elif expect == "fast_forward":
                new, _ = apply_goto(state, nid)
                assert new.selected == interp.goto_fast_forward(sel, nid)


def test_exhaustive_goto_oracle_small_trees():
    for i, shape in enumerate(canonical_shapes(9)):
        oracle_check_tree(shape_to_tree(shape, tree_id=f"s{i}"))

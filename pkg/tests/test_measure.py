from __future__ import annotations

import pytest
from hypothesis import given, settings, strategies as st

from lsta_verify.errors import IndexOutOfRange
from lsta_verify.gates import apply_circuit, cx, gate
from lsta_verify.lsta import enumerate_language, lsta_from_trees, validate
from lsta_verify.measure import measure, measure_not
from lsta_verify.oracle import random_lsta, zero_out
from lsta_verify.qtree import PerfectTree, tree_from_state

from conftest import A0, A1, half


@pytest.fixture
def after_h_cx(init_lsta):
    return apply_circuit(init_lsta, [gate("H", 1), cx(1, 2)])


def test_keep_zero_branch(after_h_cx):
    want = tree_from_state(2, {"00": half(A0), "01": half(A1)})
    assert enumerate_language(measure(after_h_cx, 1, 0)) == {want}


def test_keep_one_branch(after_h_cx):
    want = tree_from_state(2, {"10": -half(A1), "11": -half(A0)})
    assert enumerate_language(measure(after_h_cx, 1, 1)) == {want}


def test_no_mass_gives_zero_tree(init_lsta):
    assert enumerate_language(measure(init_lsta, 1, 0)) == {PerfectTree.zero(2)}


def test_measure_not(after_h_cx):
    assert enumerate_language(measure_not(after_h_cx, 1, 0)) == enumerate_language(measure(after_h_cx, 1, 1))


def test_out_of_range(init_lsta):
    with pytest.raises(IndexOutOfRange):
        measure(init_lsta, 3, 0)


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 100_000), st.integers(1, 3), st.integers(0, 1), st.data())
def test_matches_zero_out(seed, n, bit, data):
    qubit = data.draw(st.integers(1, n))
    a = random_lsta(seed, n, variables=("a",))
    m = measure(a, qubit, bit)
    validate(m)
    assert enumerate_language(m) == {zero_out(t, qubit, 1 - bit) for t in enumerate_language(a)}
    assert enumerate_language(measure(m, qubit, bit)) == enumerate_language(m)


def test_primed_states_do_not_collide():
    # an automaton whose state names look like the tags used internally
    t = PerfectTree.of([1, 2])
    a = lsta_from_trees([t])
    m = measure(measure(a, 1, 0), 1, 0)
    validate(m)
    assert enumerate_language(m) == {PerfectTree.of([1, 0])}

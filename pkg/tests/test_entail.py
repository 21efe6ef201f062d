from __future__ import annotations

import random
import sys

import pytest
from hypothesis import given, settings, strategies as st

from lsta_verify.amplitude import INV_SQRT2, LinearTerm, ONE
from lsta_verify.entail import (
    MappingPair, check_entailment, entails_up_to_scaling, feasible_trans, find_all_mappings, terminal_check,
)
from lsta_verify.gates import apply_circuit, cx, gate
from lsta_verify.lsta import Lsta, Transition, add_zero_tree, enumerate_language, lsta_from_trees, union
from lsta_verify.measure import measure
from lsta_verify.oracle import OracleVerdict, oracle_entails, random_lsta
from lsta_verify.qtree import PerfectTree, tree_from_state
from lsta_verify import smt

from conftest import A0, A1, half


@pytest.fixture
def if_post():
    return lsta_from_trees([tree_from_state(2, {"10": A0, "11": A1}), tree_from_state(2, {"10": -A1, "11": -A0})])


class TestFeasibleTrans:
    def test_bell_level_two(self, bell):
        sets = feasible_trans(bell, {"q+", "q+-"})
        assert len(sets) == 2
        assert {frozenset.intersection(*(t.choices for t in g)) for g in sets} == {frozenset({1}), frozenset({2})}

    def test_single_transition(self, bell):
        assert feasible_trans(bell, {"p"}) == [bell.transitions_of("p")]

    def test_disjoint(self):
        a = Lsta(1, {"p"}, [Transition.leaf("x", 0, {1}), Transition.leaf("y", 0, {2})])
        assert feasible_trans(a, {"x", "y"}) == []

    def test_empty_domain(self, bell):
        assert feasible_trans(bell, set()) == []


class TestFindAllMappings:
    def test_self_first_step(self, init_lsta):
        (root,) = init_lsta.roots
        (delta,) = init_lsta.transitions_of(root)
        (m,) = find_all_mappings(init_lsta, [delta], {root: (root,)})
        assert m.f_dict() == {delta.left: (delta.left,), delta.right: (delta.right,)}

    def test_leaf_terms_collected(self, init_lsta, if_post):
        measured = apply_circuit(init_lsta, [gate("H", 1), cx(1, 2)])
        a = apply_circuit(lsta_from_trees(enumerate_language(measure(measured, 1, 0))), [gate("X", 1)])
        maps = [p.g_dict() for p in _leaf_maps(a, if_post)]
        want = {half(A0): (A0,), half(A1): (A1,), LinearTerm.const(0): (LinearTerm.const(0),)}
        assert want in maps
        assert len(maps) == 2

    def test_kind_mismatch(self):
        a = lsta_from_trees([PerfectTree.of([1, 0])])
        b = Lsta(1, {"r"}, [Transition.leaf("r", 1, {1})])
        (root,) = a.roots
        assert find_all_mappings(b, a.transitions_of(root), {root: ("r",)}) == []


def _leaf_maps(a, b):
    F = {MappingPair.of({r: (rb,)}) for r in a.roots for rb in b.roots}
    D = set(a.roots)
    while D:
        (gamma,) = feasible_trans(a, D)
        nxt = set()
        for pair in F:
            for m in find_all_mappings(b, gamma, pair.f_dict()):
                nxt.add(MappingPair(m.f, pair.merge_g(m.g)))
        F = nxt
        D = {c for t in gamma for c in t.children}
    return F


class TestTerminalCheck:
    def test_rational_ratio(self):
        assert terminal_check([MappingPair.of({}, {LinearTerm.const(1): [LinearTerm.const(2)]})])

    def test_symbolic_ratio(self):
        g = {half(A0): [A0], half(A1): [A1], LinearTerm.const(0): [LinearTerm.const(0)]}
        assert terminal_check([MappingPair.of({}, g)])

    def test_empty(self):
        assert terminal_check([]) is False


class TestEntailment:
    def test_reflexive(self, bell):
        assert entails_up_to_scaling(bell, bell)

    def test_if_program_branches(self, init_lsta, if_post):
        p1 = apply_circuit(init_lsta, [gate("H", 1), cx(1, 2)])
        p2 = apply_circuit(measure(p1, 1, 0), [gate("X", 1)])
        p3 = measure(p1, 1, 1)
        assert entails_up_to_scaling(union(p2, p3), add_zero_tree(if_post))

    def test_different_trees(self):
        a = lsta_from_trees([PerfectTree.of([1, 0])])
        b = lsta_from_trees([PerfectTree.of([0, 1])])
        assert not entails_up_to_scaling(a, b)
        assert entails_up_to_scaling(a, lsta_from_trees([PerfectTree.of([2, 0])]))

    def test_zero_tree_needs_augmentation(self, init_lsta):
        z = measure(init_lsta, 1, 0)
        post = lsta_from_trees([tree_from_state(2, {"10": 1})])
        assert not entails_up_to_scaling(z, post)
        assert entails_up_to_scaling(z, add_zero_tree(post))

    def test_existential_right_variables_absorb_zero(self, init_lsta, if_post):
        # the zero tree is matched by a0 = a1 = 0 of the right-hand side
        assert entails_up_to_scaling(measure(init_lsta, 1, 0), if_post)

    def test_constraint_on_left(self):
        a = lsta_from_trees([PerfectTree.of([LinearTerm.var("a"), 0])])
        b = lsta_from_trees([PerfectTree.of([1, 0])])
        assert not entails_up_to_scaling(a, add_zero_tree(b))
        real_nonzero = smt.and_(smt.eq(smt.Var("a_im"), smt.num(0)))
        assert entails_up_to_scaling(a.replace(constraint=real_nonzero), add_zero_tree(b))

    def test_unknown_surfaces(self):
        a = lsta_from_trees([PerfectTree.of([LinearTerm.var("a"), 0])])
        b = lsta_from_trees([PerfectTree.of([LinearTerm.var("b"), 0])])
        solver = smt.Solver([sys.executable, "-c", "print('unknown')"])
        assert check_entailment(a, b, solver).holds is None

    def test_mutated_symbolic_post(self, init_lsta):
        inv = lsta_from_trees([PerfectTree.of([half(A0), half(A1), -half(A1), -half(A0)])])
        good = lsta_from_trees([tree_from_state(2, {"10": -A1, "11": -A0})])
        bad = lsta_from_trees([tree_from_state(2, {"10": -A1, "11": A0})])
        exit_state = measure(inv, 1, 1)
        assert entails_up_to_scaling(exit_state, add_zero_tree(good))
        assert not entails_up_to_scaling(exit_state, add_zero_tree(bad))

    @settings(max_examples=40, deadline=None)
    @given(st.integers(0, 100_000))
    def test_order_independent(self, seed):
        rng = random.Random(seed)
        n = rng.randint(1, 3)
        a = random_lsta(seed, n, variables=("a",))
        b = random_lsta(seed + 1, n, variables=rng.choice([(), ("a",), ("b",)]))
        fifo = check_entailment(a, b, order="fifo")
        lifo = check_entailment(a, b, order="lifo")
        assert fifo.holds == lifo.holds

    @settings(max_examples=40, deadline=None)
    @given(st.integers(0, 100_000))
    def test_monotone_in_left_language(self, seed):
        rng = random.Random(seed)
        n = rng.randint(1, 2)
        b = random_lsta(seed, n)
        big = random_lsta(seed + 7, n)
        trees = sorted(enumerate_language(big), key=PerfectTree.sort_key)
        small = lsta_from_trees(trees[: max(1, len(trees) // 2)])
        if entails_up_to_scaling(big, b):
            assert entails_up_to_scaling(small, b)

    @settings(max_examples=40, deadline=None)
    @given(st.integers(0, 100_000))
    def test_terminates_within_domain_bound(self, seed):
        rng = random.Random(seed)
        n = rng.randint(1, 3)
        a, b = random_lsta(seed, n), random_lsta(seed + 3, n)
        res = check_entailment(a, b)
        assert res.stats.domains <= 2 ** len(a.states)

    @settings(max_examples=60, deadline=None)
    @given(st.integers(0, 100_000))
    def test_agrees_with_oracle(self, seed):
        rng = random.Random(seed)
        n = rng.randint(1, 3)
        b = random_lsta(seed, n, variables=rng.choice([(), ("a",), ("b",)]))
        if rng.random() < 0.6:
            trees = sorted(enumerate_language(b), key=PerfectTree.sort_key)
            factor = rng.choice([ONE, INV_SQRT2, -ONE * 2])
            a = lsta_from_trees([t.scale(factor) for t in rng.sample(trees, rng.randint(1, len(trees)))])
        else:
            a = random_lsta(seed + 11, n, variables=rng.choice([(), ("a",)]))
        verdict = oracle_entails(a, b)
        if verdict.conclusive:
            assert entails_up_to_scaling(a, b) == (verdict is OracleVerdict.CONFIRMED)

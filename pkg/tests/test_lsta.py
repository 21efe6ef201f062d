from __future__ import annotations

import itertools

import pytest
from hypothesis import given, settings, strategies as st

from lsta_verify.amplitude import INV_SQRT2, LinearTerm
from lsta_verify.errors import ArityMismatch, ChoiceOverlap, LevelMismatch, LimitExceeded
from lsta_verify.lsta import (
    Lsta, Transition, accepts, add_zero_tree, empty_lsta, enumerate_language, iter_language, _build_tree,
    lsta_from_trees, prime_variables, reduce, union, validate, zero_lsta, _selections,
)
from lsta_verify.oracle import random_lsta
from lsta_verify.qtree import PerfectTree, tree_from_state
from lsta_verify import smt

from conftest import A0, A1, half

c = INV_SQRT2
BELL_TREES = {
    PerfectTree.of([c, 0, 0, c]), PerfectTree.of([c, 0, 0, -c]),
    PerfectTree.of([0, c, c, 0]), PerfectTree.of([0, c, -c, 0]),
}

seeds = st.integers(min_value=0, max_value=10_000)
heights = st.integers(min_value=1, max_value=3)


def rand(seed, n, variables=("a", "b")):
    return random_lsta(seed, n, variables=variables)


class TestValidate:
    def test_bell_is_valid(self, bell):
        validate(bell)
        assert len(bell.transitions) == 9
        assert len(bell.states) == 6

    def test_choice_overlap(self):
        a = Lsta(1, {"r"}, [Transition.internal("r", 1, {2}, "x", "x"),
                            Transition.internal("r", 1, {1, 2}, "x", "x"),
                            Transition.leaf("x", 0, {1})])
        with pytest.raises(ChoiceOverlap) as info:
            validate(a)
        assert info.value.choice == 2

    def test_root_with_wrong_symbol(self):
        a = Lsta(2, {"p"}, [Transition.internal("p", 2, {1}, "q", "q"),
                            Transition.internal("q", 2, {1}, "l", "l"), Transition.leaf("l", 0, {1})])
        with pytest.raises(LevelMismatch):
            validate(a)

    def test_leaf_too_early(self):
        a = Lsta(2, {"p"}, [Transition.internal("p", 1, {1}, "l", "l"), Transition.leaf("l", 0, {1})])
        with pytest.raises(LevelMismatch):
            validate(a)


class TestAccepts:
    def test_bell_member(self, bell):
        assert accepts(bell, PerfectTree.of([c, 0, 0, c]))

    def test_unintended_trees_rejected(self, bell):
        # |00> + |10> needs choice 1 under q+ and choice 2 under q+-
        assert not accepts(bell, PerfectTree.of([c, 0, c, 0]))
        assert not accepts(bell, PerfectTree.of([0, c, 0, c]))

    def test_wrong_height(self, bell):
        assert not accepts(bell, PerfectTree.of([c, c]))


class TestEnumerate:
    def test_bell_language(self, bell):
        assert enumerate_language(bell) == BELL_TREES

    def test_singleton(self, init_lsta, init_tree):
        assert enumerate_language(init_lsta) == {init_tree}

    def test_unreachable_root(self):
        a = Lsta(1, {"p"}, [Transition.leaf("q", 0, {1})])
        assert enumerate_language(a) == set()

    def test_limit(self, bell):
        with pytest.raises(LimitExceeded):
            enumerate_language(bell, limit=3)

    @settings(max_examples=60, deadline=None)
    @given(seeds, heights)
    def test_agrees_with_accepts(self, seed, n):
        a = rand(seed, n)
        lang = enumerate_language(a)
        for t in lang:
            assert accepts(a, t)
        # perturb a member; membership must match language
        for t in list(lang)[:3]:
            other = PerfectTree(t.n, (t.leaves[0] + LinearTerm.const(1),) + t.leaves[1:])
            assert accepts(a, other) == (other in lang)

    @settings(max_examples=40, deadline=None)
    @given(seeds, heights)
    def test_brute_force_runs(self, seed, n):
        """Compare with enumerating every choice sequence and every transition pick."""
        a = rand(seed, n, variables=())
        universe = sorted({ch for t in a.transitions for ch in t.choices})
        expected = set()
        for seq in itertools.product(universe, repeat=n + 1):
            for r in a.roots:
                tree = _deterministic(a, r, 0, seq)
                if tree is not None:
                    expected.add(PerfectTree(n, tree))
        assert enumerate_language(a) == expected

    @settings(max_examples=40, deadline=None)
    @given(seeds, heights)
    def test_same_state_same_subtree(self, seed, n):
        a = rand(seed, n)
        for r in a.roots:
            for path in _selections(a, r):
                tree = _build_tree(a, r, path)
                seen = {}
                frontier = [(r, 0)]
                for d in range(n + 1):
                    width = 1 << (n - d)
                    for q, idx in frontier:
                        sub = tree.leaves[idx * width:(idx + 1) * width]
                        assert seen.setdefault((d, q), sub) == sub
                    if d < n:
                        frontier = [(k, 2 * idx + side) for q, idx in frontier
                                    for side, k in enumerate(path[d][q].children)]


def _deterministic(a, q, d, seq):
    ts = [t for t in a.transitions_of(q) if seq[d] in t.choices]
    if not ts:
        return None
    t = ts[0]
    if d == a.n:
        return (t.symbol,) if t.is_leaf else None
    if t.is_leaf:
        return None
    left = _deterministic(a, t.left, d + 1, seq)
    right = _deterministic(a, t.right, d + 1, seq)
    if left is None or right is None:
        return None
    return left + right


class TestConstructions:
    def test_union_with_self(self, bell):
        assert enumerate_language(union(bell, bell)) == BELL_TREES

    def test_union_of_two_singletons(self, init_tree):
        t1 = tree_from_state(2, {"00": half(A0), "01": half(A1)})
        t2 = tree_from_state(2, {"10": -half(A1), "11": -half(A0)})
        u = union(lsta_from_trees([t1]), lsta_from_trees([t2]))
        assert enumerate_language(u) == {t1, t2}

    def test_union_with_empty(self, bell):
        assert enumerate_language(union(bell, empty_lsta(2))) == BELL_TREES

    def test_union_arity(self, bell):
        with pytest.raises(ArityMismatch):
            union(bell, zero_lsta(3))

    def test_union_conjoins_constraints(self, bell):
        phi = smt.eq(smt.Var("a_im"), smt.num(0))
        u = union(bell.replace(constraint=phi), bell)
        assert u.constraint == phi
        psi = smt.eq(smt.Var("b_im"), smt.num(0))
        assert union(bell.replace(constraint=phi), bell.replace(constraint=psi)).constraint == smt.and_(phi, psi)

    def test_add_zero_tree(self, bell):
        z = PerfectTree.zero(2)
        assert accepts(add_zero_tree(bell), z)
        assert enumerate_language(add_zero_tree(bell)) == BELL_TREES | {z}
        assert enumerate_language(add_zero_tree(empty_lsta(3))) == {PerfectTree.zero(3)}

    def test_prime_variables(self, init_lsta):
        p = prime_variables(init_lsta)
        assert p.variables == {"a0'", "a1'"}
        (t,) = enumerate_language(p)
        assert t["10"] == LinearTerm.var("a0'")
        pp = prime_variables(p)
        assert pp.all_vars() == {"a0''", "a1''"}
        assert not (p.all_vars() & init_lsta.all_vars())

    def test_prime_renames_constraint(self, init_lsta):
        phi = smt.eq(smt.Var("a0_im"), smt.num(0))
        p = prime_variables(init_lsta.replace(constraint=phi))
        assert smt.free_vars(p.constraint) == {"a0'_im"}

    def test_prime_term(self):
        t = tree_from_state(1, {"1": -half(A1)})
        (out,) = enumerate_language(prime_variables(lsta_from_trees([t])))
        assert out["1"] == -half(LinearTerm.var("a1'"))

    @settings(max_examples=30, deadline=None)
    @given(seeds, seeds, heights)
    def test_constructions_preserve_validity(self, s1, s2, n):
        a, b = rand(s1, n), rand(s2, n)
        for out in (union(a, b), add_zero_tree(a), prime_variables(a), reduce(a)):
            validate(out)
        assert enumerate_language(union(a, b)) == enumerate_language(a) | enumerate_language(b)
        assert enumerate_language(reduce(a)) == enumerate_language(a)

    def test_from_trees(self):
        trees = {PerfectTree.of([1, 0, 0, 1]), PerfectTree.of([0, 1, 1, 0]), PerfectTree.of([1, 1, 1, 1])}
        a = lsta_from_trees(trees)
        validate(a)
        assert enumerate_language(a) == trees

    def test_iteration_is_deterministic(self, bell):
        assert list(iter_language(bell)) == list(iter_language(bell))

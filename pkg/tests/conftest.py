from __future__ import annotations

import pytest

from lsta_verify.amplitude import INV_SQRT2, LinearTerm
from lsta_verify.frontend.lsta_format import parse_lsta
from lsta_verify.lsta import lsta_from_trees
from lsta_verify.qtree import PerfectTree, tree_from_state

BELL_TEXT = """\
Constants
c+ := 1 / sqrt2
c0 := 0
c- := -1 / sqrt2
Root States p
Transitions
[1,{1}](q+, q+-) -> p
[2,{1}](r+, r0) -> q+
[2,{2}](r0, r+) -> q+
[2,{1}](r0, r+-) -> q+-
[2,{2}](r+-, r0) -> q+-
[c+,{1,2}] -> r+
[c0,{1,2}] -> r0
[c+,{1}] -> r+-
[c-,{2}] -> r+-
"""

A0, A1 = LinearTerm.var("a0"), LinearTerm.var("a1")


def v(name: str) -> LinearTerm:
    return LinearTerm.var(name)


def half(t: LinearTerm) -> LinearTerm:
    return t.scale(INV_SQRT2)


@pytest.fixture
def bell():
    return parse_lsta(BELL_TEXT)


@pytest.fixture
def state_q():
    """The generic two-qubit state a1|00> + a2|01> + a3|10> + a4|11>."""
    return PerfectTree.of([v("a1"), v("a2"), v("a3"), v("a4")])


@pytest.fixture
def init_tree():
    """a0|10> + a1|11>."""
    return tree_from_state(2, {"10": A0, "11": A1})


@pytest.fixture
def init_lsta(init_tree):
    return lsta_from_trees([init_tree])

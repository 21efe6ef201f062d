"""Level-synchronized tree automata over perfect binary trees.

States are arbitrary hashable values (strings from parsed files, tuples from
constructions, ints after :func:`renumber`).  A run picks, at every depth, a
single choice ``c`` shared by all transitions used at that depth.  Because the
choice sets of one state are disjoint, fixing ``c`` per depth fixes the
transition of every state at that depth; enumeration and membership both
explore those per-depth selections.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Hashable, Iterable, Iterator, Mapping, Sequence

from .amplitude import LinearTerm, ZERO
from .errors import ArityMismatch, ChoiceOverlap, LevelMismatch, LimitExceeded
from .qtree import PerfectTree
from . import smt

State = Hashable


def state_key(s: State) -> tuple:
    """Total order on heterogeneous state values that does not depend on hashing."""
    if isinstance(s, int):
        return (0, s, "")
    if isinstance(s, str):
        return (1, 0, s)
    return (2, 0, repr(s))


@dataclass(frozen=True)
class Transition:
    top: State
    symbol: int | LinearTerm
    choices: frozenset[int]
    children: tuple[State, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "choices", frozenset(self.choices))
        object.__setattr__(self, "children", tuple(self.children))
        if isinstance(self.symbol, LinearTerm):
            if self.children:
                raise ValueError("leaf transitions have no children")
        elif len(self.children) != 2:
            raise ValueError("internal transitions have exactly two children")

    @classmethod
    def internal(cls, top: State, qubit: int, choices: Iterable[int], left: State, right: State) -> Transition:
        return cls(top, qubit, frozenset(choices), (left, right))

    @classmethod
    def leaf(cls, top: State, term, choices: Iterable[int]) -> Transition:
        return cls(top, LinearTerm.coerce(term), frozenset(choices), ())

    @property
    def is_leaf(self) -> bool:
        return isinstance(self.symbol, LinearTerm)

    @property
    def left(self) -> State:
        return self.children[0]

    @property
    def right(self) -> State:
        return self.children[1]

    def sort_key(self) -> tuple:
        sym = (1, self.symbol.sort_key()) if self.is_leaf else (0, self.symbol)
        return (state_key(self.top), sym, tuple(sorted(self.choices)),
                tuple(state_key(c) for c in self.children))

    def map_states(self, f: Callable[[State], State]) -> Transition:
        return Transition(f(self.top), self.symbol, self.choices, tuple(f(c) for c in self.children))


def _sorted_transitions(ts: Iterable[Transition]) -> tuple[Transition, ...]:
    return tuple(sorted(set(ts), key=Transition.sort_key))


@dataclass(frozen=True)
class Lsta:
    n: int
    roots: frozenset
    transitions: tuple[Transition, ...]
    constraint: smt.Formula = smt.TRUE
    variables: frozenset[str] = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "roots", frozenset(self.roots))
        object.__setattr__(self, "transitions", _sorted_transitions(self.transitions))
        object.__setattr__(self, "variables", frozenset(self.variables))

    @cached_property
    def states(self) -> frozenset:
        out = set(self.roots)
        for t in self.transitions:
            out.add(t.top)
            out.update(t.children)
        return frozenset(out)

    @cached_property
    def by_top(self) -> Mapping[State, tuple[Transition, ...]]:
        idx: dict[State, list[Transition]] = {}
        for t in self.transitions:
            idx.setdefault(t.top, []).append(t)
        return {k: tuple(v) for k, v in idx.items()}

    def transitions_of(self, q: State) -> tuple[Transition, ...]:
        return self.by_top.get(q, ())

    @cached_property
    def levels(self) -> Mapping[State, int]:
        """Depth of each state reachable from a root (first depth found)."""
        depth: dict[State, int] = {}
        frontier = sorted(self.roots, key=state_key)
        for r in frontier:
            depth[r] = 0
        d = 0
        while frontier:
            nxt = []
            for q in frontier:
                for t in self.transitions_of(q):
                    for c in t.children:
                        if c not in depth:
                            depth[c] = d + 1
                            nxt.append(c)
            frontier = nxt
            d += 1
        return depth

    def term_vars(self) -> frozenset[str]:
        out: set[str] = set()
        for t in self.transitions:
            if t.is_leaf:
                out |= t.symbol.vars()
        return frozenset(out)

    def all_vars(self) -> frozenset[str]:
        return self.variables | self.term_vars()

    def replace(self, **kw) -> Lsta:
        fields_ = dict(n=self.n, roots=self.roots, transitions=self.transitions,
                       constraint=self.constraint, variables=self.variables)
        fields_.update(kw)
        return Lsta(**fields_)

    def __str__(self):
        from .frontend.lsta_format import format_lsta
        return format_lsta(self)


# -- validation -----------------------------------------------------------

def validate(a: Lsta) -> None:
    for q, ts in a.by_top.items():
        seen: dict[int, Transition] = {}
        for t in ts:
            for c in sorted(t.choices):
                if c in seen:
                    raise ChoiceOverlap(q, c)
                seen[c] = t
    # every reachable state must sit at exactly one depth matching its symbols
    depth: dict[State, int] = {}
    frontier = sorted(a.roots, key=state_key)
    for r in frontier:
        depth[r] = 0
    d = 0
    while frontier:
        nxt = []
        for q in frontier:
            for t in a.transitions_of(q):
                if d < a.n:
                    if t.is_leaf or t.symbol != d + 1:
                        raise LevelMismatch(q, f"depth {d} expects symbol x{d + 1}")
                elif not t.is_leaf:
                    raise LevelMismatch(q, f"depth {d} expects leaf transitions")
                for c in t.children:
                    if c in depth:
                        if depth[c] != d + 1 and a.transitions_of(c):
                            raise LevelMismatch(c, f"reachable at depths {depth[c]} and {d + 1}")
                    else:
                        depth[c] = d + 1
                        nxt.append(c)
        frontier = nxt
        d += 1


def is_valid(a: Lsta) -> bool:
    try:
        validate(a)
    except (ChoiceOverlap, LevelMismatch):
        return False
    return True


# -- run semantics ----------------------------------------------------------

def _fits(a: Lsta, t: Transition, d: int) -> bool:
    return t.is_leaf if d == a.n else (not t.is_leaf and t.symbol == d + 1)


def _choice_classes(a: Lsta, d: int, states: Iterable[State]) -> list[dict[State, Transition]]:
    """Distinct transition selections for ``states`` at depth ``d``.

    Each entry maps every state to the transition it takes under some common
    choice; selections where any state has no transition are dropped.
    """
    states = sorted(set(states), key=state_key)
    universe: set[int] = set()
    for q in states:
        for t in a.transitions_of(q):
            if _fits(a, t, d):
                universe |= t.choices
    out: list[dict[State, Transition]] = []
    seen: set[tuple] = set()
    for c in sorted(universe):
        sel = {}
        for q in states:
            pick = None
            for t in a.transitions_of(q):
                if c in t.choices and _fits(a, t, d):
                    pick = t
                    break
            if pick is None:
                break
            sel[q] = pick
        else:
            key = tuple(sel[q].sort_key() for q in states)
            if key not in seen:
                seen.add(key)
                out.append(sel)
    return out


def _selections(a: Lsta, root: State) -> Iterator[list[dict[State, Transition]]]:
    """All live per-depth transition selections of runs starting at ``root``."""
    dead: set[tuple[int, frozenset]] = set()
    path: list[dict[State, Transition]] = []

    def go(d: int, states: frozenset) -> Iterator[list[dict[State, Transition]]]:
        if (d, states) in dead:
            return
        found = False
        for sel in _choice_classes(a, d, states):
            path.append(sel)
            if d == a.n:
                found = True
                yield list(path)
            else:
                nxt = frozenset(c for t in sel.values() for c in t.children)
                for res in go(d + 1, nxt):
                    found = True
                    yield res
            path.pop()
        if not found:
            dead.add((d, states))

    yield from go(0, frozenset((root,)))


def _build_tree(a: Lsta, root: State, path: Sequence[Mapping[State, Transition]]) -> PerfectTree:
    memo: dict[tuple[State, int], tuple[LinearTerm, ...]] = {}

    def leaves(q: State, d: int) -> tuple[LinearTerm, ...]:
        key = (q, d)
        if key not in memo:
            t = path[d][q]
            memo[key] = (t.symbol,) if t.is_leaf else leaves(t.left, d + 1) + leaves(t.right, d + 1)
        return memo[key]

    return PerfectTree(a.n, leaves(root, 0))


def iter_language(a: Lsta) -> Iterator[PerfectTree]:
    """Trees of L(a), possibly with repetitions."""
    for r in sorted(a.roots, key=state_key):
        for path in _selections(a, r):
            yield _build_tree(a, r, path)


def enumerate_language(a: Lsta, limit: int = 10_000) -> set[PerfectTree]:
    out: set[PerfectTree] = set()
    for tree in iter_language(a):
        out.add(tree)
        if len(out) > limit:
            raise LimitExceeded(f"language has more than {limit} trees")
    return out


def sorted_language(a: Lsta, limit: int = 10_000) -> list[PerfectTree]:
    return sorted(enumerate_language(a, limit), key=PerfectTree.sort_key)


def accepts(a: Lsta, tree: PerfectTree) -> bool:
    if tree.n != a.n:
        return False
    dead: set[tuple[int, frozenset]] = set()

    # frontier: pairs (state, node index within depth d)
    def go(d: int, pairs: frozenset) -> bool:
        if (d, pairs) in dead:
            return False
        for sel in _choice_classes(a, d, (q for q, _ in pairs)):
            if d == a.n:
                if all(sel[q].symbol == tree.leaves[i] for q, i in pairs):
                    return True
                continue
            nxt = frozenset(
                p for q, i in pairs
                for p in ((sel[q].left, 2 * i), (sel[q].right, 2 * i + 1))
            )
            if go(d + 1, nxt):
                return True
        dead.add((d, pairs))
        return False

    return any(go(0, frozenset(((r, 0),))) for r in sorted(a.roots, key=state_key))


def is_empty(a: Lsta) -> bool:
    return next(iter_language(a), None) is None


# -- constructions -----------------------------------------------------------

def relabel(a: Lsta, f: Callable[[State], State]) -> Lsta:
    return a.replace(roots=frozenset(f(r) for r in a.roots),
                     transitions=tuple(t.map_states(f) for t in a.transitions))


def union(a: Lsta, b: Lsta) -> Lsta:
    if a.n != b.n:
        raise ArityMismatch(f"cannot unite automata over {a.n} and {b.n} qubits")
    ra = relabel(a, lambda s: (0, s))
    rb = relabel(b, lambda s: (1, s))
    out = Lsta(
        n=a.n,
        roots=ra.roots | rb.roots,
        transitions=ra.transitions + rb.transitions,
        constraint=smt.and_(a.constraint, b.constraint) if a.constraint != b.constraint else a.constraint,
        variables=a.variables | b.variables,
    )
    return renumber(out)


def zero_lsta(n: int) -> Lsta:
    """Automaton accepting only the all-zero tree of height ``n``."""
    ts = [Transition.internal(("z", d), d + 1, {1}, ("z", d + 1), ("z", d + 1)) for d in range(n)]
    ts.append(Transition.leaf(("z", n), ZERO, {1}))
    return Lsta(n, frozenset({("z", 0)}), tuple(ts))


def empty_lsta(n: int) -> Lsta:
    return Lsta(n, frozenset(), ())


def add_zero_tree(a: Lsta) -> Lsta:
    z = zero_lsta(a.n).replace(constraint=a.constraint, variables=a.variables)
    return union(a, z)


def prime_name(v: str) -> str:
    return v + "'"


def prime_variables(a: Lsta) -> Lsta:
    names = a.all_vars()
    mapping = {v: prime_name(v) for v in names}
    real_map = {}
    for v in names:
        for part, primed in zip(smt.complex_var_names(v), smt.complex_var_names(prime_name(v))):
            real_map[part] = primed
    ts = tuple(
        Transition(t.top, t.symbol.rename(mapping), t.choices) if t.is_leaf else t
        for t in a.transitions
    )
    return a.replace(
        transitions=ts,
        variables=frozenset(mapping[v] for v in a.variables),
        constraint=smt.rename(a.constraint, real_map),
    )


def lsta_from_trees(trees: Iterable[PerfectTree], constraint: smt.Formula = smt.TRUE,
                    variables: Iterable[str] | None = None) -> Lsta:
    """Automaton whose language is exactly ``trees`` (a finite set)."""
    trees = list(trees)
    if not trees:
        raise ValueError("need at least one tree to fix the height")
    n = trees[0].n
    ts: set[Transition] = set()
    roots = set()

    def build(leaves: tuple[LinearTerm, ...], d: int) -> State:
        q = (d, leaves)
        if d == n:
            ts.add(Transition.leaf(q, leaves[0], {1}))
        else:
            half = len(leaves) // 2
            ts.add(Transition.internal(q, d + 1, {1}, build(leaves[:half], d + 1), build(leaves[half:], d + 1)))
        return q

    for tree in trees:
        if tree.n != n:
            raise ArityMismatch("all trees must have the same height")
        roots.add(build(tree.leaves, 0))
    if variables is None:
        variables = set().union(*(t.vars() for t in trees))
    return reduce(Lsta(n, frozenset(roots), tuple(ts), constraint, frozenset(variables)))


# -- clean-up ---------------------------------------------------------------

def trim(a: Lsta) -> Lsta:
    """Drop unreachable states and states that generate no finite tree."""
    productive: set[State] = set()
    changed = True
    while changed:
        changed = False
        for t in a.transitions:
            if t.top not in productive and all(c in productive for c in t.children):
                productive.add(t.top)
                changed = True
    live = [t for t in a.transitions if t.top in productive and all(c in productive for c in t.children)]
    roots = frozenset(r for r in a.roots if r in productive)
    by_top: dict[State, list[Transition]] = {}
    for t in live:
        by_top.setdefault(t.top, []).append(t)
    reach = set(roots)
    stack = sorted(roots, key=state_key)
    while stack:
        q = stack.pop()
        for t in by_top.get(q, ()):
            for c in t.children:
                if c not in reach:
                    reach.add(c)
                    stack.append(c)
    return a.replace(roots=roots, transitions=tuple(t for t in live if t.top in reach))


def merge_equivalent(a: Lsta) -> Lsta:
    """Identify states with identical outgoing transitions, bottom-up."""
    rep: dict[State, State] = {}
    transitions = list(a.transitions)
    while True:
        sig: dict[State, list] = {}
        for t in transitions:
            body = (t.symbol.sort_key() if t.is_leaf else t.symbol, tuple(sorted(t.choices)),
                    tuple(state_key(c) for c in t.children))
            sig.setdefault(t.top, []).append(body)
        groups: dict[tuple, list[State]] = {}
        for q, bodies in sig.items():
            groups.setdefault(tuple(sorted(bodies)), []).append(q)
        step: dict[State, State] = {}
        for members in groups.values():
            if len(members) > 1:
                members.sort(key=state_key)
                for m in members[1:]:
                    step[m] = members[0]
        if not step:
            break
        rep.update(step)
        transitions = list({t.map_states(lambda s: step.get(s, s)) for t in transitions})
    if not rep:
        return a

    def find(s: State) -> State:
        while s in rep:
            s = rep[s]
        return s

    return a.replace(roots=frozenset(find(r) for r in a.roots),
                     transitions=tuple(t.map_states(find) for t in a.transitions))


def renumber(a: Lsta) -> Lsta:
    """Rename states to ``0..k-1`` in breadth-first order from the roots.

    The order is derived from the automaton's structure, so two runs on
    equal inputs produce identical output.
    """
    ids: dict[State, int] = {}
    queue = sorted(a.roots, key=state_key)
    for r in queue:
        ids.setdefault(r, len(ids))
    i = 0
    while i < len(queue):
        q = queue[i]
        i += 1
        for t in sorted(a.transitions_of(q), key=lambda t: t.sort_key()[1:3]):
            for c in t.children:
                if c not in ids:
                    ids[c] = len(ids)
                    queue.append(c)
    for t in a.transitions:
        for s in (t.top, *t.children):
            if s not in ids:
                ids[s] = len(ids)
    return relabel(a, ids.__getitem__)


def reduce(a: Lsta) -> Lsta:
    return renumber(merge_equivalent(trim(a)))

"""Entailment up to scaling between two automata.

``A`` entails ``B`` up to scaling when for every assignment satisfying
``A``'s constraint and every tree ``T`` in ``L(A)`` there is an assignment of
``B``'s remaining variables satisfying its constraint, a tree ``T'`` in
``L(B)`` and a real ``r != 0`` with ``T = r * T'``.

The search walks both automata top-down in lockstep.  A vertex ``(D, F)``
holds the set ``D`` of ``A``-states at the current depth and a set ``F`` of
candidate simulations: ``f`` sends each ``A``-state to the ``B``-states it must
be matched against and ``g`` records which ``B`` leaf terms each ``A`` leaf term
has been paired with so far.  At the leaves, the pairs of each candidate are
handed to :mod:`.smt` as one scaling obligation.
"""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .amplitude import LinearTerm
from .errors import ArityMismatch, SolverUnknown
from .lsta import Lsta, State, Transition, state_key
from . import smt

# f: sorted tuple of (A-state, sorted tuple of B-states)
FMap = tuple[tuple[State, tuple[State, ...]], ...]
# g: sorted tuple of (A-term, sorted tuple of B-terms)
GMap = tuple[tuple[LinearTerm, tuple[LinearTerm, ...]], ...]


def _freeze_f(f: Mapping[State, Iterable[State]]) -> FMap:
    return tuple(sorted(((q, tuple(sorted(set(v), key=state_key))) for q, v in f.items()),
                        key=lambda kv: state_key(kv[0])))


def _freeze_g(g: Mapping[LinearTerm, Iterable[LinearTerm]]) -> GMap:
    return tuple(sorted(((u, tuple(sorted(set(v), key=LinearTerm.sort_key))) for u, v in g.items()),
                        key=lambda kv: kv[0].sort_key()))


@dataclass(frozen=True)
class MappingPair:
    f: FMap
    g: GMap

    @classmethod
    def of(cls, f: Mapping[State, Iterable[State]], g: Mapping[LinearTerm, Iterable[LinearTerm]] = {}) -> MappingPair:
        return cls(_freeze_f(f), _freeze_g(g))

    def f_dict(self) -> dict[State, tuple[State, ...]]:
        return dict(self.f)

    def g_dict(self) -> dict[LinearTerm, tuple[LinearTerm, ...]]:
        return dict(self.g)

    def merge_g(self, other: GMap) -> GMap:
        acc: dict[LinearTerm, set[LinearTerm]] = {u: set(v) for u, v in self.g}
        for u, v in other:
            acc.setdefault(u, set()).update(v)
        return _freeze_g(acc)

    def pairs(self) -> tuple[tuple[LinearTerm, LinearTerm], ...]:
        return tuple((u1, u2) for u1, us in self.g for u2 in us)

    def sort_key(self) -> tuple:
        return (tuple((state_key(q), tuple(state_key(s) for s in v)) for q, v in self.f),
                tuple((u.sort_key(), tuple(w.sort_key() for w in v)) for u, v in self.g))


@dataclass(frozen=True)
class Vertex:
    D: frozenset
    F: frozenset

    def sort_key(self) -> tuple:
        return (tuple(sorted(state_key(q) for q in self.D)),
                tuple(sorted(p.sort_key() for p in self.F)))


def feasible_trans(a: Lsta, states: Iterable[State]) -> list[tuple[Transition, ...]]:
    """One transition per state (in sorted state order) with a common choice."""
    states = sorted(set(states), key=state_key)
    if not states:
        return []
    out: list[tuple[Transition, ...]] = []

    def go(i: int, common: frozenset, picked: list[Transition]) -> None:
        if i == len(states):
            out.append(tuple(picked))
            return
        for t in a.transitions_of(states[i]):
            inter = t.choices if common is None else common & t.choices
            if inter:
                picked.append(t)
                go(i + 1, inter, picked)
                picked.pop()

    go(0, None, [])
    return out


def find_all_mappings(b: Lsta, gamma_a: Sequence[Transition],
                      f: Mapping[State, Iterable[State]]) -> list[MappingPair]:
    targets = set()
    for t in gamma_a:
        targets.update(f[t.top])
    out: list[MappingPair] = []
    for gamma_b in feasible_trans(b, targets):
        by_top = {t.top: t for t in gamma_b}
        assert len(by_top) == len(gamma_b)
        f2: dict[State, set[State]] = {}
        g2: dict[LinearTerm, set[LinearTerm]] = {}
        ok = True
        for ta in gamma_a:
            for q in f[ta.top]:
                tb = by_top[q]
                if ta.is_leaf and tb.is_leaf:
                    g2.setdefault(ta.symbol, set()).add(tb.symbol)
                elif not ta.is_leaf and not tb.is_leaf and ta.symbol == tb.symbol:
                    f2.setdefault(ta.left, set()).add(tb.left)
                    f2.setdefault(ta.right, set()).add(tb.right)
                else:
                    ok = False
                    break
            if not ok:
                break
        if ok:
            out.append(MappingPair.of(f2, g2))
    return out


def _real_vars(terms: Iterable[LinearTerm]) -> set[str]:
    names: set[str] = set()
    for t in terms:
        names |= t.vars()
    return set(smt.real_vars_of_complex(names))


def terminal_query(F: Iterable[MappingPair], phi_a: smt.Formula = smt.TRUE,
                   phi_b: smt.Formula = smt.TRUE) -> smt.TerminalQuery:
    F = sorted(F, key=MappingPair.sort_key)
    lhs = [u for p in F for u, _ in p.g]
    rhs = [w for p in F for _, ws in p.g for w in ws]
    y = (_real_vars(lhs) | smt.free_vars(phi_a)) - {smt.SQRT2_NAME}
    z = (_real_vars(rhs) | smt.free_vars(phi_b)) - y - {smt.SQRT2_NAME}
    return smt.TerminalQuery(
        disjuncts=tuple(p.pairs() for p in F),
        phi_a=phi_a, phi_b=phi_b,
        y_vars=frozenset(y), z_vars=frozenset(z),
    )


@dataclass
class EntailStats:
    vertices: int = 0
    terminal_checks: int = 0
    fast_path: int = 0
    solver_queries: int = 0
    domains: int = 0  # distinct sets D of A-states seen


def terminal_check(F: Iterable[MappingPair], phi_a: smt.Formula = smt.TRUE,
                   phi_b: smt.Formula = smt.TRUE, solver: smt.Solver | None = None,
                   stats: EntailStats | None = None) -> bool:
    """Truth of the scaling obligation; raises :class:`SolverUnknown` if undecided."""
    F = list(F)
    if not F:
        return False
    query = terminal_query(F, phi_a, phi_b)
    quick = smt.fast_path(query)
    if quick is not None:
        if stats:
            stats.fast_path += 1
        return quick
    if stats:
        stats.solver_queries += 1
    solver = solver or smt.Solver()
    verdict = solver.check_valid(query.to_formula())
    if verdict is smt.Validity.UNKNOWN:
        raise SolverUnknown("solver could not decide a terminal scaling obligation")
    return verdict is smt.Validity.VALID


@dataclass
class EntailResult:
    holds: bool | None  # None: some obligation undecided, none failed
    stats: EntailStats = field(default_factory=EntailStats)
    failing: Vertex | None = None


def check_entailment(a: Lsta, b: Lsta, solver: smt.Solver | None = None,
                     order: str = "fifo") -> EntailResult:
    """Run the worklist search; stops at the first failed terminal obligation."""
    if a.n != b.n:
        raise ArityMismatch(f"cannot compare automata over {a.n} and {b.n} qubits")
    if order not in ("fifo", "lifo"):
        raise ValueError("order must be 'fifo' or 'lifo'")
    solver = solver or smt.Solver()
    stats = EntailStats()
    b_roots = sorted(b.roots, key=state_key)
    work: deque[Vertex] = deque()
    known: set[Vertex] = set()

    def push(v: Vertex) -> None:
        if v not in known:
            known.add(v)
            work.append(v)

    for q in sorted(a.roots, key=state_key):
        push(Vertex(frozenset((q,)), frozenset(MappingPair.of({q: (r,)}) for r in b_roots)))

    undecided = False
    domains: set[frozenset] = set()
    while work:
        v = work.popleft() if order == "fifo" else work.pop()
        stats.vertices += 1
        domains.add(v.D)
        stats.domains = len(domains)
        if not v.D:
            stats.terminal_checks += 1
            try:
                ok = terminal_check(v.F, a.constraint, b.constraint, solver, stats)
            except SolverUnknown:
                undecided = True
                continue
            if not ok:
                return EntailResult(False, stats, v)
            continue
        for gamma_a in feasible_trans(a, v.D):
            d2 = frozenset(c for t in gamma_a for c in t.children)
            f2 = set()
            for pair in sorted(v.F, key=MappingPair.sort_key):
                f = pair.f_dict()
                for m in find_all_mappings(b, gamma_a, f):
                    f2.add(MappingPair(m.f, pair.merge_g(m.g)))
            push(Vertex(d2, frozenset(f2)))
    return EntailResult(None if undecided else True, stats)


def entails_up_to_scaling(a: Lsta, b: Lsta, solver: smt.Solver | None = None,
                          order: str = "fifo") -> bool:
    res = check_entailment(a, b, solver, order)
    if res.holds is None:
        raise SolverUnknown("entailment undecided: the solver returned unknown")
    return res.holds

"""Quantum gates on concrete trees and on automata.

``tree_apply_gate`` is the reference semantics.  ``lsta_apply_gate`` builds an
automaton for the image language: above the target qubit it tracks whether
all controls seen so far are 1; at the target it replaces the two children by
linear-combination states that walk both subtrees in lockstep.  Each such
state also carries a *fallback* combination (the untouched subtree), which is
used when a control below the target turns out to be 0.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .amplitude import AlgebraicComplex, I, INV_SQRT2, LinearTerm, OMEGA, ONE, ZERO
from .errors import IndexOutOfRange
from .lsta import Lsta, State, Transition, reduce, state_key
from .qtree import PerfectTree

K_A = Fraction(21, 221)
K_B = Fraction(220, 221)

Matrix = tuple[tuple[AlgebraicComplex, AlgebraicComplex], tuple[AlgebraicComplex, AlgebraicComplex]]


def _m(u00, u01, u10, u11) -> Matrix:
    c = AlgebraicComplex.coerce
    return ((c(u00), c(u01)), (c(u10), c(u11)))


MATRICES: dict[str, Matrix] = {
    "X": _m(0, 1, 1, 0),
    "Y": _m(0, -I, I, 0),
    "Z": _m(1, 0, 0, -1),
    "H": _m(INV_SQRT2, INV_SQRT2, INV_SQRT2, -INV_SQRT2),
    "S": _m(1, 0, 0, I),
    "SDG": _m(1, 0, 0, -I),
    "T": _m(1, 0, 0, OMEGA),
    "TDG": _m(1, 0, 0, OMEGA.conj()),
    "K": _m(K_B, -K_A, K_A, K_B),
}

KINDS = frozenset(MATRICES) | {"SWAP"}


@dataclass(frozen=True)
class Gate:
    kind: str
    targets: tuple[int, ...]
    controls: tuple[int, ...] = ()

    def __post_init__(self):
        kind = self.kind.upper()
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "targets", tuple(self.targets))
        object.__setattr__(self, "controls", tuple(self.controls))
        if kind not in KINDS:
            raise ValueError(f"unknown gate {self.kind!r}")
        want = 2 if kind == "SWAP" else 1
        if len(self.targets) != want:
            raise ValueError(f"{kind} takes {want} target qubit(s)")
        qubits = self.qubits
        if len(set(qubits)) != len(qubits):
            raise ValueError(f"gate {self} uses a qubit twice")
        if any(q < 1 for q in qubits):
            raise IndexOutOfRange(f"qubit indices start at 1: {self}")

    @property
    def target(self) -> int:
        return self.targets[0]

    @property
    def qubits(self) -> tuple[int, ...]:
        return self.controls + self.targets

    def check(self, n: int) -> None:
        if any(q > n for q in self.qubits):
            raise IndexOutOfRange(f"{self} does not fit on {n} qubits")

    def __str__(self):
        prefix = "C" * len(self.controls)
        args = ",".join(str(q) for q in self.qubits)
        return f"{prefix}{self.kind}({args})"


def gate(kind: str, *targets: int, controls: Iterable[int] = ()) -> Gate:
    return Gate(kind, tuple(targets), tuple(controls))


def cx(control: int, target: int) -> Gate:
    return Gate("X", (target,), (control,))


def mcx(controls: Iterable[int], target: int) -> Gate:
    return Gate("X", (target,), tuple(controls))


def mcz(controls: Iterable[int], target: int) -> Gate:
    return Gate("Z", (target,), tuple(controls))


@dataclass(frozen=True)
class Circuit:
    gates: tuple[Gate, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "gates", tuple(self.gates))

    def __iter__(self):
        return iter(self.gates)

    def __len__(self):
        return len(self.gates)


def swap_decomposition(g: Gate) -> list[Gate]:
    """Controlled SWAP as three (multi-)controlled X gates."""
    i, j = g.targets
    return [cx(j, i), Gate("X", (j,), g.controls + (i,)), cx(j, i)]


# -- reference semantics ---------------------------------------------------------

def tree_apply_gate(tree: PerfectTree, g: Gate) -> PerfectTree:
    n = tree.n
    g.check(n)
    ctrl_mask = 0
    for c in g.controls:
        ctrl_mask |= 1 << (n - c)
    leaves = list(tree.leaves)
    if g.kind == "SWAP":
        i, j = g.targets
        mi, mj = 1 << (n - i), 1 << (n - j)
        out = list(leaves)
        for idx in range(1 << n):
            if idx & ctrl_mask != ctrl_mask:
                continue
            bi, bj = bool(idx & mi), bool(idx & mj)
            if bi != bj:
                out[idx ^ mi ^ mj] = leaves[idx]
        return PerfectTree(n, tuple(out))
    (u00, u01), (u10, u11) = MATRICES[g.kind]
    mt = 1 << (n - g.target)
    out = list(leaves)
    for idx in range(1 << n):
        if idx & mt or idx & ctrl_mask != ctrl_mask:
            continue
        x0, x1 = leaves[idx], leaves[idx | mt]
        out[idx] = x0.scale(u00) + x1.scale(u01)
        out[idx | mt] = x0.scale(u10) + x1.scale(u11)
    return PerfectTree(n, tuple(out))


def tree_apply_circuit(tree: PerfectTree, circuit: Iterable[Gate]) -> PerfectTree:
    for g in circuit:
        tree = tree_apply_gate(tree, g)
    return tree


# -- automaton construction ------------------------------------------------------

Combo = tuple[tuple[State, AlgebraicComplex], ...]


def _combo(pairs: Iterable[tuple[State, AlgebraicComplex]]) -> Combo:
    acc: dict[State, AlgebraicComplex] = {}
    for q, c in pairs:
        acc[q] = acc.get(q, ZERO) + c
    return tuple(sorted(((q, c) for q, c in acc.items() if not c.is_zero()),
                        key=lambda qc: state_key(qc[0])))


def _lc(combo: Iterable, fallback: Iterable) -> State:
    combo, fallback = _combo(combo), _combo(fallback)
    if combo == fallback and len(combo) == 1 and combo[0][1] == ONE:
        return ("o", combo[0][0])
    return ("lc", combo, fallback)


def lsta_apply_gate(a: Lsta, g: Gate) -> Lsta:
    g.check(a.n)
    if g.kind == "SWAP":
        for part in swap_decomposition(g):
            a = lsta_apply_gate(a, part)
        return a
    (u00, u01), (u10, u11) = MATRICES[g.kind]
    target = g.target
    controls = set(g.controls)

    transitions: list[Transition] = []
    seen: set[State] = set()
    todo: list[State] = []

    def visit(s: State) -> State:
        if s not in seen:
            seen.add(s)
            todo.append(s)
        return s

    def expand(s: State) -> None:
        kind = s[0]
        if kind == "o":
            for t in a.transitions_of(s[1]):
                transitions.append(Transition(s, t.symbol, t.choices,
                                              tuple(visit(("o", c)) for c in t.children)))
        elif kind == "a":
            for t in a.transitions_of(s[1]):
                if t.is_leaf:
                    continue
                l, r = t.children
                if t.symbol < target:
                    left = ("o", l) if t.symbol in controls else ("a", l)
                    kids = (left, ("a", r))
                elif t.symbol == target:
                    kids = (_lc([(l, u00), (r, u01)], [(l, ONE)]),
                            _lc([(l, u10), (r, u11)], [(r, ONE)]))
                else:
                    continue
                transitions.append(Transition(s, t.symbol, t.choices, tuple(visit(k) for k in kids)))
        else:
            _, combo, fallback = s
            base = sorted({q for q, _ in combo + fallback}, key=state_key)
            for pick in itertools.product(*(a.transitions_of(q) for q in base)):
                choices = frozenset.intersection(*(t.choices for t in pick))
                if not choices:
                    continue
                sel = dict(zip(base, pick))
                first = pick[0]
                if first.is_leaf:
                    if not all(t.is_leaf for t in pick):
                        continue
                    term = LinearTerm.const(ZERO)
                    for q, c in combo:
                        term = term + sel[q].symbol.scale(c)
                    transitions.append(Transition(s, term, choices))
                    continue
                if any(t.is_leaf or t.symbol != first.symbol for t in pick):
                    continue
                cl = [(sel[q].left, c) for q, c in combo]
                cr = [(sel[q].right, c) for q, c in combo]
                fl = [(sel[q].left, c) for q, c in fallback]
                fr = [(sel[q].right, c) for q, c in fallback]
                if first.symbol in controls:
                    kids = (_lc(fl, fl), _lc(cr, fr))
                else:
                    kids = (_lc(cl, fl), _lc(cr, fr))
                transitions.append(Transition(s, first.symbol, choices, tuple(visit(k) for k in kids)))

    roots = frozenset(visit(("a", r)) for r in a.roots)
    while todo:
        expand(todo.pop())
    return reduce(a.replace(roots=roots, transitions=tuple(transitions)))


def apply_circuit(a: Lsta, circuit: Iterable[Gate]) -> Lsta:
    for g in circuit:
        a = lsta_apply_gate(a, g)
    return a

"""Measurement of one qubit on an automaton, keeping the unnormalized branch."""

from __future__ import annotations

from .amplitude import ZERO, LinearTerm
from .errors import IndexOutOfRange
from .lsta import Lsta, Transition


def _orig(q):
    return (0, q)


def _primed(q):
    return (1, q)


def measure(a: Lsta, qubit: int, bit: int) -> Lsta:
    """Keep the ``x_qubit = bit`` branch and zero every leaf of the other one.

    Primed copies of all states generate the same shapes as the originals
    with every leaf replaced by 0; the ``x_qubit`` transitions redirect the
    discarded child into the primed copy.  Nothing is renormalized.
    """
    if not 1 <= qubit <= a.n:
        raise IndexOutOfRange(f"cannot measure qubit {qubit} of {a.n}")
    if bit not in (0, 1):
        raise ValueError("measurement outcome must be 0 or 1")
    zero = LinearTerm.const(ZERO)
    out: list[Transition] = []
    for t in a.transitions:
        if t.is_leaf:
            out.append(Transition(_primed(t.top), zero, t.choices))
            out.append(t.map_states(_orig))
            continue
        out.append(t.map_states(_primed))
        if t.symbol != qubit:
            out.append(t.map_states(_orig))
        elif bit == 0:
            out.append(Transition(_orig(t.top), t.symbol, t.choices, (_orig(t.left), _primed(t.right))))
        else:
            out.append(Transition(_orig(t.top), t.symbol, t.choices, (_primed(t.left), _orig(t.right))))
    return a.replace(roots=frozenset(_orig(r) for r in a.roots), transitions=tuple(out))


def measure_not(a: Lsta, qubit: int, bit: int) -> Lsta:
    """The branch where ``x_qubit`` differs from ``bit``."""
    return measure(a, qubit, 1 - bit)

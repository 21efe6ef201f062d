"""Reading and writing the line-oriented ``.lsta`` text format.

Example::

    Constants
    c+ := 1 / sqrt2
    Root States p
    Transitions
    [1,{1}](q, q) -> p
    [c+,{1}] -> q
"""

from __future__ import annotations

import re
from typing import Iterable

from ..amplitude import LinearTerm, format_term, parse_term
from ..errors import ParseError, UndefinedConstant
from ..lsta import Lsta, Transition, renumber, validate
from .. import smt

_SECTIONS = ("Constants", "Variables", "Root States", "Transitions")
_STATE = re.compile(r"[^\s,()\[\]{}]+")
_TRANSITION = re.compile(
    r"^\[(?P<sym>.*),\s*\{(?P<choices>[^{}]*)\}\s*\]\s*(?:\((?P<kids>[^()]*)\))?\s*->\s*(?P<top>\S+)$"
)


def _strip_comment(line: str) -> str:
    idx = line.find("//")
    return (line[:idx] if idx >= 0 else line).strip()


def _state(name: str, lineno: int) -> str:
    if not _STATE.fullmatch(name):
        raise ParseError(f"bad state name {name!r}", lineno)
    return name


def _choices(text: str, lineno: int) -> frozenset[int]:
    items = [p.strip() for p in text.split(",") if p.strip()]
    if not items:
        raise ParseError("empty choice set", lineno)
    try:
        return frozenset(int(p) for p in items)
    except ValueError:
        raise ParseError(f"choices must be natural numbers: {{{text}}}", lineno) from None


def parse_lsta(text: str, constraint: smt.Formula = smt.TRUE, check: bool = True) -> Lsta:
    constants: dict[str, LinearTerm] = {}
    variables: list[str] = []
    roots: list[str] = []
    transitions: list[Transition] = []
    section = None
    saw_roots = False
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = _strip_comment(raw)
        if not line:
            continue
        if line.startswith("Root States"):
            section = "Root States"
            saw_roots = True
            roots.extend(_state(s, lineno) for s in re.split(r"[\s,]+", line[len("Root States"):].strip()) if s)
            continue
        if line in ("Constants", "Variables", "Transitions"):
            section = line
            continue
        if line.startswith("Variables"):
            section = "Variables"
            line = line[len("Variables"):].strip()
        if section == "Constants":
            if ":=" not in line:
                raise ParseError("expected 'name := expression'", lineno)
            name, expr = (p.strip() for p in line.split(":=", 1))
            if not re.fullmatch(r"[A-Za-z_][A-Za-z0-9_']*[+-]*", name):
                raise ParseError(f"bad constant name {name!r}", lineno)
            try:
                value = parse_term(expr, constants)
            except UndefinedConstant as exc:
                raise UndefinedConstant(str(exc), lineno) from None
            except ParseError as exc:
                raise ParseError(str(exc), lineno) from None
            constants[name] = value
        elif section == "Variables":
            variables.extend(v for v in re.split(r"[\s,]+", line) if v)
        elif section == "Root States":
            roots.extend(_state(s, lineno) for s in re.split(r"[\s,]+", line) if s)
        elif section == "Transitions":
            transitions.append(_transition(line, lineno, constants, variables))
        else:
            raise ParseError(f"text outside any section: {line!r}", lineno)
    if not saw_roots:
        raise ParseError("missing 'Root States' line")
    internal = [t.symbol for t in transitions if not t.is_leaf]
    n = max(internal, default=0)
    declared = frozenset(variables)
    a = Lsta(n, frozenset(roots), tuple(transitions), constraint, declared)
    if check:
        validate(a)
    return a


def _transition(line: str, lineno: int, constants, variables) -> Transition:
    m = _TRANSITION.match(line)
    if not m:
        raise ParseError(f"malformed transition {line!r}", lineno)
    top = _state(m.group("top"), lineno)
    choices = _choices(m.group("choices"), lineno)
    sym = m.group("sym").strip()
    kids = m.group("kids")
    if kids is not None:
        names = [k.strip() for k in kids.split(",")]
        if len(names) != 2:
            raise ParseError("internal transitions need exactly two children", lineno)
        if not sym.isdigit() or int(sym) < 1:
            raise ParseError(f"internal symbol must be a qubit index, got {sym!r}", lineno)
        return Transition(top, int(sym), choices, tuple(_state(k, lineno) for k in names))
    try:
        term = parse_term(sym, constants, variables)
    except UndefinedConstant as exc:
        raise UndefinedConstant(str(exc), lineno) from None
    except ParseError as exc:
        raise ParseError(str(exc), lineno) from None
    return Transition(top, term, choices)


def _name(s) -> str:
    return f"q{s}" if isinstance(s, int) else str(s)


def format_lsta(a: Lsta) -> str:
    """Text that :func:`parse_lsta` reads back to the same automaton."""
    if not all(isinstance(s, str) and _STATE.fullmatch(s) for s in a.states):
        a = renumber(a)
    names = {s: _name(s) for s in a.states}
    lines = []
    variables = sorted(a.all_vars())
    if variables:
        lines.append("Variables")
        lines.append(" ".join(variables))
    lines.append("Root States " + " ".join(sorted(names[r] for r in a.roots)))
    lines.append("Transitions")
    for t in a.transitions:
        choices = ",".join(str(c) for c in sorted(t.choices))
        if t.is_leaf:
            lines.append(f"[{format_term(t.symbol)},{{{choices}}}] -> {names[t.top]}")
        else:
            lines.append(f"[{t.symbol},{{{choices}}}]({names[t.left]}, {names[t.right]}) -> {names[t.top]}")
    return "\n".join(lines) + "\n"

"""Brute-force reference implementations for testing.

Everything here works on explicit sets of concrete trees, never on automaton
structure, so it can be used to cross-check the symbolic algorithms.
"""

from __future__ import annotations

import enum
import itertools
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .amplitude import AlgebraicComplex, I, INV_SQRT2, LinearTerm, ONE, OMEGA, SQRT2, ZERO
from .errors import LimitExceeded, UnexpectedLoop
from .gates import tree_apply_gate
from .lsta import Lsta, Transition, enumerate_language, is_valid
from .qtree import PerfectTree, tree_equal_up_to_scale
from .verifier import GateStmt, If, Program, Statement, While
from . import smt

GRID: tuple[AlgebraicComplex, ...] = (ZERO, ONE, -ONE, I, INV_SQRT2 * (ONE + I))


def zero_out(tree: PerfectTree, qubit: int, bit: int) -> PerfectTree:
    """Replace every leaf whose ``qubit`` equals ``bit`` by 0."""
    zero = LinearTerm.const(ZERO)
    return PerfectTree(tree.n, tuple(
        zero if tree.bit(idx, qubit) == bit else leaf for idx, leaf in enumerate(tree.leaves)
    ))


def oracle_exec(trees: Iterable[PerfectTree], program: Program | Sequence[Statement]) -> set[PerfectTree]:
    stmts = program.statements if isinstance(program, Program) else program
    current = set(trees)
    for stmt in stmts:
        if isinstance(stmt, GateStmt):
            current = {tree_apply_gate(t, stmt.gate) for t in current}
        elif isinstance(stmt, If):
            taken = oracle_exec({zero_out(t, stmt.qubit, 1 - stmt.bit) for t in current}, stmt.then)
            other = oracle_exec({zero_out(t, stmt.qubit, stmt.bit) for t in current}, stmt.orelse)
            current = taken | other
        elif isinstance(stmt, While):
            raise UnexpectedLoop("the oracle only executes loop-free code")
        else:
            raise TypeError(stmt)
    return current


# -- entailment by probing ------------------------------------------------------

class OracleVerdict(enum.Enum):
    REFUTED = "refuted"  # a concrete counterexample was found
    CONFIRMED = "confirmed"  # exhaustive: ground left side, every tree matched exactly
    PROBES_PASS = "probes-pass"  # no counterexample among the probes

    @property
    def conclusive(self) -> bool:
        return self is not OracleVerdict.PROBES_PASS


def _complex_names_of(phi: smt.Formula) -> set[str]:
    out = set()
    for name in smt.free_vars(phi):
        for suffix in ("_re", "_im"):
            if name.endswith(suffix):
                out.add(name[: -len(suffix)])
    return out


def _holds(phi: smt.Formula, sigma: Mapping[str, AlgebraicComplex]) -> bool | None:
    """Truth of ``phi`` under ``sigma``; ``None`` if some variable is unassigned."""
    if phi == smt.TRUE:
        return True
    try:
        return bool(smt.evaluate(phi, smt.complex_env(sigma)))
    except KeyError:
        return None


def _solve(rows: list[list[AlgebraicComplex]], nvars: int):
    """Row-reduce ``rows`` (each ``nvars`` coefficients plus a right-hand side).

    Returns ``None`` when inconsistent, else ``(pivots, reduced_rows)``.
    """
    rows = [list(r) for r in rows]
    pivots: list[int] = []
    rank = 0
    for col in range(nvars):
        pr = next((i for i in range(rank, len(rows)) if not rows[i][col].is_zero()), None)
        if pr is None:
            continue
        rows[rank], rows[pr] = rows[pr], rows[rank]
        inv = rows[rank][col].inverse()
        rows[rank] = [x * inv for x in rows[rank]]
        for i in range(len(rows)):
            if i != rank and not rows[i][col].is_zero():
                f = rows[i][col]
                rows[i] = [x - f * y for x, y in zip(rows[i], rows[rank])]
        pivots.append(col)
        rank += 1
    for r in rows[rank:]:
        if not r[-1].is_zero():
            return None
    return pivots, rows[:rank]


def _match(target: PerfectTree, candidate: PerfectTree, sigma: Mapping[str, AlgebraicComplex],
           phi_b: smt.Formula, fixed: frozenset[str]) -> bool | None:
    """Can ``candidate`` be instantiated to ``target / r`` for a real ``r != 0``?

    Variables in ``fixed`` take their value from ``sigma``; the others are
    solved for.  ``None`` means "possibly", when the remaining constraint
    could not be settled.
    """
    phi_names = _complex_names_of(phi_b)
    free = sorted((candidate.vars() | phi_names) - fixed)
    part = {v: sigma[v] for v in fixed if v in sigma}
    leaves = [leaf.partial_substitute(part) for leaf in candidate.leaves]
    goal = target.values()
    if not free:
        cand = PerfectTree(candidate.n, tuple(leaves))
        if tree_equal_up_to_scale(target, cand) is None:
            return False
        return _holds(phi_b, part)
    # unknowns: r, then (re, im) of u_k = r * w_k; one real equation per leaf part
    index = {v: k for k, v in enumerate(free)}
    nvars = 1 + 2 * len(free)
    rows = []
    for leaf, g in zip(leaves, goal):
        for part_of in ("re", "im"):
            row = [ZERO] * (nvars + 1)
            c = leaf.constant
            row[0] = c.real_part() if part_of == "re" else c.imag_part()
            for name, alpha in leaf.coeffs:
                k = index[name]
                ar, ai = alpha.real_part(), alpha.imag_part()
                # alpha * (ur + i ui)
                if part_of == "re":
                    row[1 + 2 * k] += ar
                    row[2 + 2 * k] -= ai
                else:
                    row[1 + 2 * k] += ai
                    row[2 + 2 * k] += ar
            row[-1] = g.real_part() if part_of == "re" else g.imag_part()
            rows.append(row)
    solved = _solve(rows, nvars)
    if solved is None:
        return False
    pivots, red = solved
    if 0 in pivots:
        r_row = red[pivots.index(0)]
        forced = all(r_row[j].is_zero() for j in range(1, nvars))
        if forced and r_row[-1].is_zero():
            return False
    if phi_b == smt.TRUE or not (phi_names - fixed):
        if phi_b == smt.TRUE:
            return True
        return _holds(phi_b, part)
    # try the particular solution with free columns set to 0, or r = 1 if r is free
    values = [ZERO] * nvars
    if 0 not in pivots:
        values[0] = ONE
    for p, row in zip(pivots, red):
        val = row[-1]
        if p != 0 and 0 not in pivots:
            val = val - row[0] * values[0]
        values[p] = val
    r = values[0]
    if r.is_zero():
        return None
    ext = dict(part)
    for v, k in index.items():
        ext[v] = (values[1 + 2 * k] + values[2 + 2 * k] * I) / r
    return True if _holds(phi_b, ext) else None


def _probe_values(rng: random.Random) -> AlgebraicComplex:
    def q():
        return Fraction(rng.randint(-9, 9), rng.randint(1, 7))
    return AlgebraicComplex.from_real_q2(q(), q()) + AlgebraicComplex.from_real_q2(q(), q()) * I


def probe_assignments(names: Iterable[str], extra: int = 8, seed: int = 0,
                      max_grid: int = 125) -> list[dict[str, AlgebraicComplex]]:
    names = sorted(names)
    if not names:
        return [{}]
    rng = random.Random(seed)
    grid = list(itertools.product(GRID, repeat=len(names)))
    if len(grid) > max_grid:
        grid = rng.sample(grid, max_grid)
    out = [dict(zip(names, combo)) for combo in grid]
    out += [{v: _probe_values(rng) for v in names} for _ in range(extra)]
    return out


def oracle_entails(a: Lsta, b: Lsta, probes: Sequence[Mapping[str, AlgebraicComplex]] | None = None,
                   limit: int = 64) -> OracleVerdict:
    """Check entailment up to scaling by enumeration and probing.

    For each tree ``T`` of ``A`` the universally quantified variables are
    those of ``T`` and of ``A``'s constraint; the remaining variables of each
    candidate tree of ``B`` are solved for exactly.
    """
    la = sorted(enumerate_language(a, limit), key=PerfectTree.sort_key)
    lb = sorted(enumerate_language(b, limit), key=PerfectTree.sort_key)
    phi_a_names = _complex_names_of(a.constraint)
    names = set(phi_a_names)
    for t in la:
        names |= t.vars()
    if probes is None:
        probes = probe_assignments(names)
    exhaustive = not names
    undecided = False
    for sigma in probes:
        ok = _holds(a.constraint, sigma)
        if ok is None:
            exhaustive = False
            continue
        if not ok:
            continue
        for ta in la:
            fixed = frozenset(ta.vars() | phi_a_names)
            if not fixed <= set(sigma):
                exhaustive = False
                continue
            target = PerfectTree(ta.n, tuple(LinearTerm.const(leaf.substitute(sigma)) for leaf in ta.leaves))
            verdicts = [_match(target, tb, sigma, b.constraint, fixed) for tb in lb]
            if True in verdicts:
                continue
            if None in verdicts:
                undecided = True
                continue
            return OracleVerdict.REFUTED
    if exhaustive and not undecided:
        return OracleVerdict.CONFIRMED
    return OracleVerdict.PROBES_PASS


# -- random automata --------------------------------------------------------------

CONSTANT_POOL: tuple[AlgebraicComplex, ...] = (
    ZERO, ONE, -ONE, I, INV_SQRT2, -INV_SQRT2, OMEGA, ONE + I, AlgebraicComplex(2), SQRT2,
)


def random_term(rng: random.Random, variables: Sequence[str]) -> LinearTerm:
    roll = rng.random()
    if not variables or roll < 0.55:
        return LinearTerm.const(rng.choice(CONSTANT_POOL))
    term = LinearTerm.var(rng.choice(variables), rng.choice(CONSTANT_POOL[1:]))
    if roll > 0.9:
        term = term + LinearTerm.const(rng.choice(CONSTANT_POOL))
    return term


def random_lsta(seed: int, n: int = 2, max_states: int = 2, max_transitions: int = 12,
                variables: Sequence[str] = (), max_language: int = 12,
                pool: Sequence[LinearTerm] | None = None) -> Lsta:
    """Deterministic pseudo-random valid automaton with a nonempty language."""
    rng = random.Random(seed)
    while True:
        levels = [[f"s{d}_{k}" for k in range(rng.randint(1, max_states))] for d in range(n + 1)]
        levels[0] = levels[0][:1]
        ts: list[Transition] = []
        for d in range(n + 1):
            for q in levels[d]:
                k = rng.choice((1, 1, 2))
                choices = list(range(1, 4))
                rng.shuffle(choices)
                for j in range(k):
                    if k == 1:
                        cs = set(rng.sample(range(1, 4), rng.randint(1, 3)))
                    else:
                        cs = {choices[j]} | ({choices[2]} if j == 0 and rng.random() < 0.3 else set())
                    if d == n:
                        term = rng.choice(pool) if pool else random_term(rng, variables)
                        ts.append(Transition.leaf(q, term, cs))
                    else:
                        ts.append(Transition.internal(q, d + 1, cs, rng.choice(levels[d + 1]),
                                                      rng.choice(levels[d + 1])))
        if len(ts) > max_transitions:
            continue
        a = Lsta(n, frozenset(levels[0]), tuple(ts), variables=frozenset())
        if not is_valid(a):
            continue
        try:
            lang = enumerate_language(a, max_language)
        except LimitExceeded:
            continue
        if lang:
            return a

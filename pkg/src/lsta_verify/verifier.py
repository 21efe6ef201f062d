"""Programs over automata and the Hoare-triple checker.

Straight-line code and branches are executed symbolically on automata.  A
loop is summarized by its annotated invariant, which produces two
obligations (entry and inductiveness); the triple itself adds a final
postcondition obligation.  Every obligation is an entailment up to scaling
whose right-hand side is extended with the all-zero tree, so branches of
probability zero never cause spurious failures.
"""

from __future__ import annotations

import enum
import json
import time
from dataclasses import dataclass, field
from typing import Sequence, Union

from .entail import check_entailment
from .errors import DimensionMismatch, SolverUnknown, UnexpectedLoop
from .gates import Gate, lsta_apply_gate
from .lsta import Lsta, add_zero_tree, prime_variables, reduce, trim, union
from .measure import measure
from . import smt


@dataclass(frozen=True)
class GateStmt:
    gate: Gate
    line: int | None = None


@dataclass(frozen=True)
class If:
    qubit: int
    bit: int
    then: tuple[Statement, ...]
    orelse: tuple[Statement, ...] = ()
    line: int | None = None


@dataclass(frozen=True)
class While:
    qubit: int
    bit: int
    invariant: Lsta
    body: tuple[Statement, ...]
    line: int | None = None


Statement = Union[GateStmt, If, While]


@dataclass(frozen=True)
class Program:
    n: int
    statements: tuple[Statement, ...]

    def __post_init__(self):
        object.__setattr__(self, "statements", tuple(self.statements))

    def __len__(self):
        return len(self.statements)


@dataclass(frozen=True)
class VerificationTask:
    pre: Lsta
    post: Lsta
    program: Program

    def __post_init__(self):
        if not (self.pre.n == self.post.n == self.program.n):
            raise DimensionMismatch(
                f"qubit counts differ: pre {self.pre.n}, post {self.post.n}, program {self.program.n}"
            )


def _statements(p: Program | Sequence[Statement]) -> Sequence[Statement]:
    return p.statements if isinstance(p, Program) else p


def exec_program(a: Lsta, program: Program | Sequence[Statement]) -> Lsta:
    """Symbolic execution of loop-free code."""
    for stmt in _statements(program):
        if isinstance(stmt, GateStmt):
            a = lsta_apply_gate(a, stmt.gate)
        elif isinstance(stmt, If):
            taken = exec_program(reduce(measure(a, stmt.qubit, stmt.bit)), stmt.then)
            other = exec_program(reduce(measure(a, stmt.qubit, 1 - stmt.bit)), stmt.orelse)
            a = reduce(union(taken, other))
        elif isinstance(stmt, While):
            raise UnexpectedLoop("loops can only be handled through their invariant")
        else:
            raise TypeError(f"not a statement: {stmt!r}")
    return a


class Verdict(enum.Enum):
    VERIFIED = "Verified"
    FAILED = "Failed"
    UNKNOWN = "Unknown"

    @property
    def exit_code(self) -> int:
        return {Verdict.VERIFIED: 0, Verdict.FAILED: 1, Verdict.UNKNOWN: 2}[self]


@dataclass
class Obligation:
    kind: str  # loop-entry | loop-inductive | postcondition
    statement: int | None  # index of the loop statement; None for the postcondition
    line: int | None
    verdict: Verdict
    seconds: float = 0.0
    vertices: int = 0
    terminal_checks: int = 0
    solver_queries: int = 0

    def to_dict(self, timing: bool = True) -> dict:
        d = {
            "kind": self.kind,
            "statement": self.statement,
            "line": self.line,
            "verdict": self.verdict.value,
            "vertices": self.vertices,
            "terminal_checks": self.terminal_checks,
            "solver_queries": self.solver_queries,
        }
        if timing:
            d["seconds"] = round(self.seconds, 6)
        return d


@dataclass
class VerificationResult:
    verdict: Verdict
    obligations: list[Obligation] = field(default_factory=list)

    @property
    def site(self) -> Obligation | None:
        """First obligation responsible for a non-verified verdict."""
        for wanted in (Verdict.FAILED, Verdict.UNKNOWN):
            if self.verdict is wanted:
                return next(o for o in self.obligations if o.verdict is wanted)
        return None

    def to_dict(self, timing: bool = True) -> dict:
        site = self.site
        return {
            "verdict": self.verdict.value,
            "site": None if site is None else {"kind": site.kind, "statement": site.statement, "line": site.line},
            "obligations": [o.to_dict(timing) for o in self.obligations],
        }

    def to_json(self, timing: bool = True) -> str:
        return json.dumps(self.to_dict(timing), indent=2, sort_keys=True)

    def summary(self) -> str:
        lines = [self.verdict.value]
        for o in self.obligations:
            where = "end" if o.statement is None else f"statement {o.statement}"
            if o.line is not None:
                where += f" (line {o.line})"
            lines.append(f"  {o.kind:<15} {where:<26} {o.verdict.value}")
        return "\n".join(lines)


def _combine(verdicts: Sequence[Verdict]) -> Verdict:
    if Verdict.FAILED in verdicts:
        return Verdict.FAILED
    if Verdict.UNKNOWN in verdicts:
        return Verdict.UNKNOWN
    return Verdict.VERIFIED


class _Checker:
    def __init__(self, solver: smt.Solver | None, order: str):
        self.solver = solver or smt.Solver()
        self.order = order
        self.obligations: list[Obligation] = []

    def entail(self, kind: str, idx: int | None, line: int | None, a: Lsta, b: Lsta) -> None:
        start = time.perf_counter()
        try:
            res = check_entailment(trim(a), add_zero_tree(b), self.solver, self.order)
        except SolverUnknown:
            res = None
        elapsed = time.perf_counter() - start
        if res is None or res.holds is None:
            verdict = Verdict.UNKNOWN
        else:
            verdict = Verdict.VERIFIED if res.holds else Verdict.FAILED
        ob = Obligation(kind, idx, line, verdict, elapsed)
        if res is not None:
            ob.vertices = res.stats.vertices
            ob.terminal_checks = res.stats.terminal_checks
            ob.solver_queries = res.stats.solver_queries
        self.obligations.append(ob)


def verify(task: VerificationTask, solver: smt.Solver | None = None,
           order: str = "fifo") -> VerificationResult:
    """Check ``{pre} program {post}``; all obligations are attempted."""
    checker = _Checker(solver, order)
    a = task.pre
    pending: list[Statement] = []

    def flush() -> None:
        nonlocal a
        if pending:
            a = exec_program(a, pending)
            pending.clear()

    for idx, stmt in enumerate(task.program.statements):
        if not isinstance(stmt, While):
            pending.append(stmt)
            continue
        flush()
        inv = stmt.invariant
        if inv.n != task.program.n:
            raise DimensionMismatch(f"invariant at statement {idx} has {inv.n} qubits, program has {task.program.n}")
        checker.entail("loop-entry", idx, stmt.line, a, inv)
        after_body = exec_program(reduce(measure(inv, stmt.qubit, stmt.bit)), stmt.body)
        checker.entail("loop-inductive", idx, stmt.line, after_body, prime_variables(inv))
        a = reduce(measure(inv, stmt.qubit, 1 - stmt.bit))
    flush()
    checker.entail("postcondition", None, None, a, task.post)
    return VerificationResult(_combine([o.verdict for o in checker.obligations]), checker.obligations)

"""Real-arithmetic formulas, SMT-LIB v2 text, and the external solver bridge.

Complex program variables ``v`` are represented by two real symbols
``v_re`` and ``v_im``.  The irrational constant sqrt(2) is the free symbol
``sqrt2``; every solver query is prefixed with ``sqrt2*sqrt2 = 2`` and
``sqrt2 > 0`` so the logic stays polynomial.
"""

from __future__ import annotations

import enum
import os
import re
import shlex
import subprocess
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .amplitude import AlgebraicComplex, LinearTerm, SQRT2
from .errors import ParseError, SolverError, SolverUnknown, UnsupportedTerm

SQRT2_NAME = "sqrt2"
SOLVER_ENV = "LSTA_VERIFY_SMT_SOLVER"
DEFAULT_SOLVER = "z3 -in"
DEFAULT_TIMEOUT = 10.0


# -- AST ---------------------------------------------------------------------

class Formula:
    """Base class of formula and arithmetic-term nodes."""

    __slots__ = ()

    def __and__(self, other: Formula) -> Formula:
        return and_(self, other)

    def __or__(self, other: Formula) -> Formula:
        return or_(self, other)

    def __invert__(self) -> Formula:
        return not_(self)

    def __str__(self):
        return to_smtlib(self)


@dataclass(frozen=True, eq=True)
class Var(Formula):
    name: str


@dataclass(frozen=True, eq=True)
class Num(Formula):
    value: Fraction


@dataclass(frozen=True, eq=True)
class BoolConst(Formula):
    value: bool


@dataclass(frozen=True, eq=True)
class App(Formula):
    op: str
    args: tuple[Formula, ...]


@dataclass(frozen=True, eq=True)
class Quant(Formula):
    kind: str  # "forall" | "exists"
    names: tuple[str, ...]
    body: Formula


TRUE = BoolConst(True)
FALSE = BoolConst(False)
SQRT2_VAR = Var(SQRT2_NAME)

_ARITH = {"+", "-", "*", "/"}
_COMPARE = {"=", "<", "<=", ">", ">=", "distinct"}
_BOOL = {"and", "or", "not", "=>"}


def num(value) -> Num:
    return Num(Fraction(value))


def add(*args: Formula) -> Formula:
    args = tuple(a for a in args if not (isinstance(a, Num) and a.value == 0))
    if not args:
        return Num(Fraction(0))
    if len(args) == 1:
        return args[0]
    return App("+", args)


def mul(*args: Formula) -> Formula:
    if any(isinstance(a, Num) and a.value == 0 for a in args):
        return Num(Fraction(0))
    args = tuple(a for a in args if not (isinstance(a, Num) and a.value == 1))
    if not args:
        return Num(Fraction(1))
    if len(args) == 1:
        return args[0]
    return App("*", args)


def neg(a: Formula) -> Formula:
    if isinstance(a, Num):
        return Num(-a.value)
    return App("-", (a,))


def sub(a: Formula, b: Formula) -> Formula:
    return App("-", (a, b))


def eq(a: Formula, b: Formula) -> Formula:
    return App("=", (a, b))


def ne(a: Formula, b: Formula) -> Formula:
    return not_(eq(a, b))


def and_(*args: Formula) -> Formula:
    flat: list[Formula] = []
    for a in args:
        if a == FALSE:
            return FALSE
        if a == TRUE:
            continue
        if isinstance(a, App) and a.op == "and":
            flat.extend(a.args)
        else:
            flat.append(a)
    if not flat:
        return TRUE
    if len(flat) == 1:
        return flat[0]
    return App("and", tuple(flat))


def or_(*args: Formula) -> Formula:
    flat: list[Formula] = []
    for a in args:
        if a == TRUE:
            return TRUE
        if a == FALSE:
            continue
        if isinstance(a, App) and a.op == "or":
            flat.extend(a.args)
        else:
            flat.append(a)
    if not flat:
        return FALSE
    if len(flat) == 1:
        return flat[0]
    return App("or", tuple(flat))


def not_(a: Formula) -> Formula:
    if isinstance(a, BoolConst):
        return BoolConst(not a.value)
    return App("not", (a,))


def implies(a: Formula, b: Formula) -> Formula:
    if a == TRUE:
        return b
    if a == FALSE or b == TRUE:
        return TRUE
    return App("=>", (a, b))


def forall(names: Iterable[str], body: Formula) -> Formula:
    names = tuple(sorted(set(names)))
    if not names or isinstance(body, BoolConst):
        return body
    return Quant("forall", names, body)


def exists(names: Iterable[str], body: Formula) -> Formula:
    names = tuple(sorted(set(names)))
    if not names or isinstance(body, BoolConst):
        return body
    return Quant("exists", names, body)


def free_vars(f: Formula) -> frozenset[str]:
    if isinstance(f, Var):
        return frozenset((f.name,))
    if isinstance(f, (Num, BoolConst)):
        return frozenset()
    if isinstance(f, App):
        out: frozenset[str] = frozenset()
        for a in f.args:
            out |= free_vars(a)
        return out
    if isinstance(f, Quant):
        return free_vars(f.body) - set(f.names)
    raise TypeError(f)


def rename(f: Formula, mapping: Mapping[str, str]) -> Formula:
    """Rename free variables."""
    if isinstance(f, Var):
        return Var(mapping.get(f.name, f.name))
    if isinstance(f, (Num, BoolConst)):
        return f
    if isinstance(f, App):
        return App(f.op, tuple(rename(a, mapping) for a in f.args))
    if isinstance(f, Quant):
        inner = {k: v for k, v in mapping.items() if k not in f.names}
        return Quant(f.kind, f.names, rename(f.body, inner))
    raise TypeError(f)


def complex_var_names(name: str) -> tuple[str, str]:
    return f"{name}_re", f"{name}_im"


def real_vars_of_complex(names: Iterable[str]) -> frozenset[str]:
    out = set()
    for n in names:
        out.update(complex_var_names(n))
    return frozenset(out)


# -- exact evaluation of quantifier-free formulas ---------------------------

def evaluate(f: Formula, env: Mapping[str, AlgebraicComplex]):
    """Evaluate a quantifier-free formula; numbers come back as real amplitudes."""
    if isinstance(f, Var):
        if f.name in env:
            return AlgebraicComplex.coerce(env[f.name])
        if f.name == SQRT2_NAME:
            return SQRT2
        raise KeyError(f.name)
    if isinstance(f, Num):
        return AlgebraicComplex.coerce(f.value)
    if isinstance(f, BoolConst):
        return f.value
    if isinstance(f, Quant):
        raise ValueError("cannot evaluate quantified formulas")
    op = f.op
    if op == "and":
        return all(evaluate(a, env) for a in f.args)
    if op == "or":
        return any(evaluate(a, env) for a in f.args)
    if op == "not":
        return not evaluate(f.args[0], env)
    if op == "=>":
        return (not evaluate(f.args[0], env)) or evaluate(f.args[1], env)
    vals = [evaluate(a, env) for a in f.args]
    if op == "+":
        total = AlgebraicComplex.coerce(0)
        for v in vals:
            total = total + v
        return total
    if op == "*":
        total = AlgebraicComplex.coerce(1)
        for v in vals:
            total = total * v
        return total
    if op == "-":
        if len(vals) == 1:
            return -vals[0]
        total = vals[0]
        for v in vals[1:]:
            total = total - v
        return total
    if op == "/":
        total = vals[0]
        for v in vals[1:]:
            total = total / v
        return total
    if op == "distinct":
        return len(set(vals)) == len(vals)
    signs = [(b - a).real_sign() for a, b in zip(vals, vals[1:])]
    if op == "=":
        return all(s == 0 for s in signs)
    if op == "<":
        return all(s > 0 for s in signs)
    if op == "<=":
        return all(s >= 0 for s in signs)
    if op == ">":
        return all(s < 0 for s in signs)
    if op == ">=":
        return all(s <= 0 for s in signs)
    raise ValueError(f"unknown operator {op!r}")


def complex_env(sigma: Mapping[str, AlgebraicComplex]) -> dict[str, AlgebraicComplex]:
    """Real-valued environment ``v_re, v_im`` for a complex assignment."""
    env = {}
    for name, value in sigma.items():
        value = AlgebraicComplex.coerce(value)
        re_name, im_name = complex_var_names(name)
        env[re_name] = value.real_part()
        env[im_name] = value.imag_part()
    return env


# -- SMT-LIB printing --------------------------------------------------------

_SIMPLE_SYMBOL = re.compile(r"[A-Za-z~!@$%^&*_+=<>.?/\-][A-Za-z0-9~!@$%^&*_+=<>.?/\-]*")


def _symbol(name: str) -> str:
    if _SIMPLE_SYMBOL.fullmatch(name):
        return name
    return f"|{name}|"


def _decimal(n: int) -> str:
    return f"{n}.0"


def _num_text(x: Fraction) -> str:
    mag = abs(x)
    if mag.denominator == 1:
        text = _decimal(mag.numerator)
    else:
        text = f"(/ {_decimal(mag.numerator)} {_decimal(mag.denominator)})"
    return f"(- {text})" if x < 0 else text


def to_smtlib(f: Formula) -> str:
    if isinstance(f, Var):
        return _symbol(f.name)
    if isinstance(f, Num):
        return _num_text(f.value)
    if isinstance(f, BoolConst):
        return "true" if f.value else "false"
    if isinstance(f, App):
        return f"({f.op} {' '.join(to_smtlib(a) for a in f.args)})"
    if isinstance(f, Quant):
        binders = " ".join(f"({_symbol(n)} Real)" for n in f.names)
        return f"({f.kind} ({binders}) {to_smtlib(f.body)})"
    raise TypeError(f)


def validity_script(f: Formula) -> str:
    """Script whose answer is ``unsat`` exactly when ``f`` is valid."""
    decls = sorted(free_vars(f) | {SQRT2_NAME})
    lines = ["(set-logic ALL)"]
    lines += [f"(declare-const {_symbol(n)} Real)" for n in decls]
    lines.append(f"(assert (= (* {SQRT2_NAME} {SQRT2_NAME}) 2.0))")
    lines.append(f"(assert (> {SQRT2_NAME} 0.0))")
    lines.append(f"(assert {to_smtlib(not_(f))})")
    lines.append("(check-sat)")
    return "\n".join(lines) + "\n"


# -- SMT-LIB parsing ---------------------------------------------------------

_TOKEN = re.compile(r"\s+|;[^\n]*|\(|\)|\|[^|]*\||\"(?:[^\"]|\"\")*\"|[^\s()|;\"]+")


def _sexprs(text: str) -> list:
    stack: list[list] = [[]]
    line = 1
    for m in _TOKEN.finditer(text):
        tok = m.group()
        line_here = line
        line += tok.count("\n")
        if tok.isspace() or tok.startswith(";"):
            continue
        if tok == "(":
            stack.append([])
        elif tok == ")":
            if len(stack) == 1:
                raise ParseError("unbalanced ')'", line_here)
            done = stack.pop()
            stack[-1].append(done)
        else:
            stack[-1].append(_Atom(tok, line_here))
    if len(stack) != 1:
        raise ParseError("unbalanced '(' at end of input", line)
    covered = "".join(m.group() for m in _TOKEN.finditer(text))
    if covered != text:
        raise ParseError("unrecognized characters in SMT-LIB input")
    return stack[0]


@dataclass(frozen=True)
class _Atom:
    text: str
    line: int


_NUMERAL = re.compile(r"\d+")
_DECIMAL = re.compile(r"\d+\.\d+")


def _atom_name(a: _Atom) -> str:
    t = a.text
    if t.startswith("|") and t.endswith("|"):
        return t[1:-1]
    return t


def _line_of(sx) -> int | None:
    if isinstance(sx, _Atom):
        return sx.line
    for item in sx:
        ln = _line_of(item)
        if ln is not None:
            return ln
    return None


def _term(sx) -> Formula:
    if isinstance(sx, _Atom):
        t = sx.text
        if _NUMERAL.fullmatch(t) or _DECIMAL.fullmatch(t):
            return Num(Fraction(t))
        if t == "true":
            return TRUE
        if t == "false":
            return FALSE
        return Var(_atom_name(sx))
    if not sx:
        raise ParseError("empty application", None)
    head = sx[0]
    if not isinstance(head, _Atom):
        raise ParseError("application head must be a symbol", _line_of(sx))
    op = head.text
    if op in ("forall", "exists"):
        if len(sx) != 3 or isinstance(sx[1], _Atom):
            raise ParseError(f"malformed {op}", head.line)
        names = []
        for binder in sx[1]:
            if isinstance(binder, _Atom) or len(binder) != 2:
                raise ParseError("malformed binder", head.line)
            names.append(_atom_name(binder[0]))
        return Quant(op, tuple(names), _term(sx[2]))
    args = tuple(_term(a) for a in sx[1:])
    if op in _ARITH | _COMPARE | _BOOL:
        if op in ("not",) and len(args) != 1:
            raise ParseError("'not' takes one argument", head.line)
        if op in _COMPARE | {"=>", "/"} and len(args) < 2:
            raise ParseError(f"{op!r} needs at least two arguments", head.line)
        if op == "-" and len(args) == 1 and isinstance(args[0], Num):
            return Num(-args[0].value)
        if op == "/" and all(isinstance(x, Num) for x in args) and all(x.value for x in args[1:]):
            value = args[0].value
            for x in args[1:]:
                value /= x.value
            return Num(value)
        return App(op, args)
    raise ParseError(f"unsupported operator {op!r}", head.line)


_IGNORED_COMMANDS = {"set-logic", "set-option", "set-info", "check-sat", "exit", "get-model"}


def parse_assertions(text: str) -> tuple[list[Formula], list[str]]:
    """Assertions and declared symbol names of an SMT-LIB script."""
    assertions: list[Formula] = []
    declared: list[str] = []
    for cmd in _sexprs(text):
        if isinstance(cmd, _Atom) or not cmd or not isinstance(cmd[0], _Atom):
            raise ParseError("expected a command", _line_of(cmd) if cmd else None)
        name = cmd[0].text
        if name == "assert":
            if len(cmd) != 2:
                raise ParseError("assert takes one term", cmd[0].line)
            assertions.append(_term(cmd[1]))
        elif name in ("declare-const", "declare-fun"):
            if len(cmd) < 3 or not isinstance(cmd[1], _Atom):
                raise ParseError(f"malformed {name}", cmd[0].line)
            declared.append(_atom_name(cmd[1]))
        elif name in _IGNORED_COMMANDS:
            continue
        else:
            raise ParseError(f"unsupported command {name!r}", cmd[0].line)
    return assertions, declared


def parse_formula(text: str) -> Formula:
    """Parse one SMT-LIB term (used for round-trip checks)."""
    items = _sexprs(text)
    if len(items) != 1:
        raise ParseError("expected exactly one term")
    return _term(items[0])


# -- encoding of leaf terms and the terminal check --------------------------

def _q2(p: Fraction, q: Fraction) -> Formula:
    return add(Num(p) if p else Num(Fraction(0)), mul(Num(q), SQRT2_VAR) if q else Num(Fraction(0)))


def _scaled(coef: tuple[Fraction, Fraction], v: Formula) -> Formula | None:
    p, q = coef
    parts = []
    if p:
        parts.append(mul(Num(p), v))
    if q:
        parts.append(mul(Num(q), SQRT2_VAR, v))
    if not parts:
        return None
    return add(*parts)


def encode_term(t: LinearTerm) -> tuple[Formula, Formula]:
    """Real and imaginary parts of a linear term as real-arithmetic terms."""
    if not isinstance(t, LinearTerm):
        raise UnsupportedTerm(f"only linear leaf terms are supported, got {t!r}")
    re_parts = [_q2(*t.constant.real_q2())]
    im_parts = [_q2(*t.constant.imag_q2())]
    for name, c in t.coeffs:
        vre, vim = (Var(n) for n in complex_var_names(name))
        cre, cim = c.real_q2(), c.imag_q2()
        # (cre + i cim)(vre + i vim)
        for target, piece in (
            (re_parts, _scaled(cre, vre)),
            (re_parts, _scaled((-cim[0], -cim[1]), vim)),
            (im_parts, _scaled(cim, vre)),
            (im_parts, _scaled(cre, vim)),
        ):
            if piece is not None:
                target.append(piece)
    return add(*re_parts), add(*im_parts)


def _fresh(base: str, taken: Iterable[str]) -> str:
    taken = set(taken)
    name = base
    idx = 0
    while name in taken:
        idx += 1
        name = f"{base}{idx}"
    return name


@dataclass(frozen=True)
class TerminalQuery:
    """The scaling obligation of one terminal vertex.

    Valid iff for all ``y_vars`` satisfying ``phi_a`` there are ``z_vars``
    satisfying ``phi_b`` and, for some disjunct, a real ``r != 0`` with
    ``u1 = r * u2`` for every pair of the disjunct.
    """

    disjuncts: tuple[tuple[tuple[LinearTerm, LinearTerm], ...], ...]
    phi_a: Formula = TRUE
    phi_b: Formula = TRUE
    y_vars: frozenset[str] = frozenset()
    z_vars: frozenset[str] = frozenset()

    def to_formula(self) -> Formula:
        taken = set(self.y_vars) | set(self.z_vars) | {SQRT2_NAME}
        for d in self.disjuncts:
            for u1, u2 in d:
                taken |= real_vars_of_complex(u1.vars() | u2.vars())
        r = _fresh("r", taken)
        rv = Var(r)
        options = []
        for d in self.disjuncts:
            conj = [ne(rv, Num(Fraction(0)))]
            for u1, u2 in d:
                l_re, l_im = encode_term(u1)
                r_re, r_im = encode_term(u2)
                conj.append(eq(l_re, mul(rv, r_re)))
                conj.append(eq(l_im, mul(rv, r_im)))
            options.append(exists([r], and_(*conj)))
        matched = and_(self.phi_b, or_(*options))
        return forall(self.y_vars, implies(self.phi_a, exists(self.z_vars, matched)))

    def is_ground(self) -> bool:
        if self.phi_a != TRUE or self.phi_b != TRUE:
            return False
        return all(u1.is_constant() and u2.is_constant() for d in self.disjuncts for u1, u2 in d)


def encode_terminal(query: TerminalQuery) -> Formula:
    return query.to_formula()


def common_real_ratio(pairs: Sequence[tuple[AlgebraicComplex, AlgebraicComplex]]) -> AlgebraicComplex | None:
    """A real ``r != 0`` with ``u1 = r*u2`` for all pairs, if one exists."""
    ratio = None
    for u1, u2 in pairs:
        if u2.is_zero():
            if not u1.is_zero():
                return None
            continue
        cand = u1 / u2
        if cand.is_zero() or not cand.is_real():
            return None
        if ratio is None:
            ratio = cand
        elif cand != ratio:
            return None
    return ratio if ratio is not None else AlgebraicComplex.coerce(1)


def _coefficient_pairs(u1: LinearTerm, u2: LinearTerm) -> list[tuple[AlgebraicComplex, AlgebraicComplex]]:
    names = sorted(u1.vars() | u2.vars())
    return [(u1.constant, u2.constant)] + [(u1.coefficient(x), u2.coefficient(x)) for x in names]


def fast_path(query: TerminalQuery) -> bool | None:
    """Decide ``query`` without a solver when that is easy, else ``None``.

    Ground queries are decided exactly.  A symbolic query is accepted when
    ``phi_b`` is trivial and some disjunct matches term by term with one
    real ratio as linear forms, which makes it valid for every assignment.
    """
    if query.is_ground():
        for d in query.disjuncts:
            if common_real_ratio([(u1.constant, u2.constant) for u1, u2 in d]) is not None:
                return True
        return False
    if query.phi_b != TRUE:
        return None
    for d in query.disjuncts:
        pairs = [p for u1, u2 in d for p in _coefficient_pairs(u1, u2)]
        if common_real_ratio(pairs) is not None:
            return True
    return None


# -- external solver ----------------------------------------------------------

class Validity(enum.Enum):
    VALID = "valid"
    INVALID = "invalid"
    UNKNOWN = "unknown"


@dataclass
class Solver:
    """Runs one fresh solver process per query over stdin/stdout."""

    command: Sequence[str] | None = None
    timeout: float = DEFAULT_TIMEOUT
    calls: int = 0
    seconds: float = 0.0
    _cache: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if self.command is None:
            self.command = shlex.split(os.environ.get(SOLVER_ENV, DEFAULT_SOLVER))
        elif isinstance(self.command, str):
            self.command = shlex.split(self.command)
        self.command = list(self.command)

    def check_valid(self, f: Formula) -> Validity:
        script = validity_script(f)
        if script in self._cache:
            return self._cache[script]
        answer = self._run(script)
        verdict = {"unsat": Validity.VALID, "sat": Validity.INVALID}.get(answer, Validity.UNKNOWN)
        self._cache[script] = verdict
        return verdict

    def check_valid_or_raise(self, f: Formula) -> bool:
        verdict = self.check_valid(f)
        if verdict is Validity.UNKNOWN:
            raise SolverUnknown(f"solver returned unknown for {to_smtlib(f)[:200]}")
        return verdict is Validity.VALID

    def _run(self, script: str) -> str:
        self.calls += 1
        start = time.perf_counter()
        try:
            proc = subprocess.run(
                self.command, input=script, capture_output=True, text=True,
                timeout=self.timeout,
            )
        except subprocess.TimeoutExpired:
            return "unknown"
        except OSError as exc:
            raise SolverError(f"cannot run solver {self.command!r}: {exc}") from exc
        finally:
            self.seconds += time.perf_counter() - start
        lines = [ln.strip() for ln in proc.stdout.splitlines() if ln.strip()]
        if not lines:
            raise SolverError(
                f"solver {self.command!r} produced no answer (exit {proc.returncode}): {proc.stderr.strip()[:200]}"
            )
        answer = lines[-1]
        if answer not in ("sat", "unsat", "unknown", "timeout"):
            raise SolverError(f"unexpected solver output: {proc.stdout.strip()[:200]}")
        return answer


def check_valid(f: Formula, solver: Solver | None = None) -> Validity:
    return (solver or Solver()).check_valid(f)

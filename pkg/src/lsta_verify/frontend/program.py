"""A small OpenQASM 3 subset with measurement-guarded branches and loops.

Loops carry their invariant in a comment placed right before them::

    // inv: inv.lsta ; inv.smt
    while (measure q[0] == 0) { x q[0]; }

Source qubit ``q[k]`` is qubit ``k+1`` of the tree (the most significant bit
of the basis index is ``q[0]``).
"""

from __future__ import annotations

import os
import re
from dataclasses import dataclass
from typing import Callable

from ..errors import MissingInvariant, NestedControlFlow, ParseError
from ..gates import Gate
from ..verifier import GateStmt, If, Program, While
from .constraint import parse_constraint
from .lsta_format import parse_lsta

# name -> (kind, number of controls or None for "all but the last", number of targets)
GATES: dict[str, tuple[str, int | None, int]] = {
    "x": ("X", 0, 1), "y": ("Y", 0, 1), "z": ("Z", 0, 1), "h": ("H", 0, 1),
    "s": ("S", 0, 1), "t": ("T", 0, 1), "sdg": ("SDG", 0, 1), "tdg": ("TDG", 0, 1),
    "k": ("K", 0, 1),
    "cx": ("X", 1, 1), "cy": ("Y", 1, 1), "cz": ("Z", 1, 1), "ck": ("K", 1, 1),
    "ccx": ("X", 2, 1), "ccz": ("Z", 2, 1),
    "mcx": ("X", None, 1), "mcz": ("Z", None, 1),
    "swap": ("SWAP", 0, 2), "cswap": ("SWAP", 1, 2),
}

_TOKEN = re.compile(
    r"(?P<ws>\s+)|(?P<comment>//[^\n]*)|(?P<block>/\*.*?\*/)|(?P<string>\"[^\"\n]*\")"
    r"|(?P<num>\d+(?:\.\d+)?)|(?P<ident>[A-Za-z_][A-Za-z0-9_]*)|(?P<op>==|[\[\](){};,])",
    re.S,
)
_INV = re.compile(r"//\s*inv\s*:\s*(?P<lsta>[^;]+?)\s*(?:;\s*(?P<smt>\S.*?))?\s*$")


@dataclass(frozen=True)
class _Tok:
    kind: str
    text: str
    line: int


def _lex(text: str) -> list[_Tok]:
    out: list[_Tok] = []
    pos, line = 0, 1
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise ParseError(f"unexpected character {text[pos]!r}", line)
        kind = m.lastgroup
        tok = m.group()
        if kind not in ("ws", "block"):
            out.append(_Tok(kind, tok, line))
        line += tok.count("\n")
        pos = m.end()
    return out


Loader = Callable[[str], str]


class _Parser:
    def __init__(self, text: str, loader: Loader):
        self.toks = _lex(text)
        self.pos = 0
        self.loader = loader
        self.n: int | None = None
        self.reg: str | None = None
        self.pending_inv: _Tok | None = None

    # token helpers
    def peek(self) -> _Tok | None:
        while self.pos < len(self.toks) and self.toks[self.pos].kind == "comment":
            tok = self.toks[self.pos]
            if _INV.match(tok.text):
                self.pending_inv = tok
            self.pos += 1
        return self.toks[self.pos] if self.pos < len(self.toks) else None

    def take(self, text: str | None = None) -> _Tok:
        tok = self.peek()
        if tok is None:
            raise ParseError(f"unexpected end of input (expected {text or 'a token'})")
        if text is not None and tok.text != text:
            raise ParseError(f"expected {text!r}, found {tok.text!r}", tok.line)
        self.pos += 1
        return tok

    def integer(self) -> int:
        tok = self.take()
        if tok.kind != "num" or not tok.text.isdigit():
            raise ParseError(f"expected an integer, found {tok.text!r}", tok.line)
        return int(tok.text)

    def qubit(self) -> int:
        name = self.take()
        if name.kind != "ident":
            raise ParseError(f"expected a qubit, found {name.text!r}", name.line)
        if self.reg is None:
            raise ParseError("qubit used before the register declaration", name.line)
        if name.text != self.reg:
            raise ParseError(f"unknown register {name.text!r}", name.line)
        self.take("[")
        idx = self.integer()
        self.take("]")
        if idx >= self.n:
            raise ParseError(f"qubit index {idx} out of range for {self.n} qubits", name.line)
        return idx + 1

    # grammar
    def program(self) -> Program:
        stmts = []
        while self.peek() is not None:
            stmt = self.statement(nested=False)
            if stmt is not None:
                stmts.append(stmt)
        if self.n is None:
            raise ParseError("missing qubit register declaration")
        return Program(self.n, tuple(stmts))

    def statement(self, nested: bool):
        tok = self.peek()
        word = tok.text
        if word == "while":
            inv = self.pending_inv
            self.pending_inv = None
            if nested:
                raise NestedControlFlow("control flow cannot be nested", tok.line)
            return self.while_(inv)
        self.pending_inv = None
        if word == "OPENQASM":
            self.take()
            self.take()
            self.take(";")
            return None
        if word == "include":
            self.take()
            if self.take().kind != "string":
                raise ParseError("expected a file name after include", tok.line)
            self.take(";")
            return None
        if word in ("qubit", "qreg"):
            return self.declaration()
        if word == "if":
            if nested:
                raise NestedControlFlow("control flow cannot be nested", tok.line)
            return self.if_()
        if tok.kind == "ident" and word in GATES:
            return self.gate()
        raise ParseError(f"unsupported statement starting with {word!r}", tok.line)

    def declaration(self):
        tok = self.take()
        if self.n is not None:
            raise ParseError("only one qubit register is supported", tok.line)
        if tok.text == "qubit":
            self.take("[")
            n = self.integer()
            self.take("]")
            name = self.take()
        else:
            name = self.take()
            self.take("[")
            n = self.integer()
            self.take("]")
        self.take(";")
        if name.kind != "ident" or n < 1:
            raise ParseError("malformed register declaration", tok.line)
        self.n, self.reg = n, name.text
        return None

    def gate(self) -> GateStmt:
        tok = self.take()
        kind, ncontrols, ntargets = GATES[tok.text]
        args = [self.qubit()]
        while self.peek() is not None and self.peek().text == ",":
            self.take(",")
            args.append(self.qubit())
        self.take(";")
        if ncontrols is None:
            if len(args) < 1:
                raise ParseError(f"{tok.text} needs a target", tok.line)
            ncontrols = len(args) - ntargets
        if len(args) != ncontrols + ntargets:
            raise ParseError(f"{tok.text} takes {ncontrols + ntargets} qubits, got {len(args)}", tok.line)
        try:
            g = Gate(kind, tuple(args[ncontrols:]), tuple(args[:ncontrols]))
        except ValueError as exc:
            raise ParseError(str(exc), tok.line) from None
        return GateStmt(g, tok.line)

    def condition(self) -> tuple[int, int]:
        self.take("(")
        self.take("measure")
        q = self.qubit()
        self.take("==")
        b = self.integer()
        if b not in (0, 1):
            raise ParseError("a measurement outcome is 0 or 1")
        self.take(")")
        return q, b

    def block(self) -> tuple:
        self.take("{")
        body = []
        while True:
            tok = self.peek()
            if tok is None:
                raise ParseError("unterminated block")
            if tok.text == "}":
                self.take()
                return tuple(body)
            stmt = self.statement(nested=True)
            if stmt is not None:
                if not isinstance(stmt, GateStmt):
                    raise ParseError("declarations are not allowed inside blocks", tok.line)
                body.append(stmt)

    def if_(self) -> If:
        tok = self.take("if")
        q, b = self.condition()
        then = self.block()
        orelse: tuple = ()
        nxt = self.peek()
        if nxt is not None and nxt.text == "else":
            self.take()
            orelse = self.block()
        return If(q, b, then, orelse, tok.line)

    def while_(self, inv: _Tok | None) -> While:
        tok = self.take("while")
        if inv is None:
            raise MissingInvariant("while loop without a preceding '// inv:' annotation", tok.line)
        m = _INV.match(inv.text)
        q, b = self.condition()
        body = self.block()
        try:
            lsta_text = self.loader(m.group("lsta"))
            phi_text = self.loader(m.group("smt")) if m.group("smt") else ""
        except OSError as exc:
            raise ParseError(f"cannot read invariant: {exc}", inv.line) from None
        invariant = parse_lsta(lsta_text, parse_constraint(phi_text))
        return While(q, b, invariant, body, tok.line)


def file_loader(base_dir: str) -> Loader:
    def load(path: str) -> str:
        with open(os.path.join(base_dir, path), encoding="utf-8") as fh:
            return fh.read()
    return load


def parse_program(text: str, base_dir: str = ".", loader: Loader | None = None) -> Program:
    return _Parser(text, loader or file_loader(base_dir)).program()


def load_program(path: str) -> Program:
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    return parse_program(text, os.path.dirname(os.path.abspath(path)))

"""Generators for ready-to-verify file bundles."""

from __future__ import annotations

import os
from dataclasses import dataclass, field

from ..verifier import VerificationTask
from .constraint import parse_constraint
from .lsta_format import parse_lsta
from .program import parse_program

KINDS = ("minus_x_if", "minus_x_while", "wmgrover")


@dataclass
class Bundle:
    name: str
    files: dict[str, str] = field(default_factory=dict)

    def write(self, out_dir: str) -> list[str]:
        os.makedirs(out_dir, exist_ok=True)
        written = []
        for fname in sorted(self.files):
            path = os.path.join(out_dir, fname)
            with open(path, "w", encoding="utf-8") as fh:
                fh.write(self.files[fname])
            written.append(path)
        return written

    def _load(self, name: str) -> str:
        try:
            return self.files[name]
        except KeyError:
            raise FileNotFoundError(name) from None

    def task(self) -> VerificationTask:
        pre = parse_lsta(self.files["pre.lsta"], parse_constraint(self.files.get("pre.smt", "")))
        post = parse_lsta(self.files["post.lsta"], parse_constraint(self.files.get("post.smt", "")))
        program = parse_program(self.files["program.qasm"], loader=self._load)
        return VerificationTask(pre, post, program)


_AMP_PRE = """\
// a0|10> + a1|11>
Variables
a0 a1
Root States p
Transitions
[1,{1}](u, v) -> p
[2,{1}](z, z) -> u
[2,{1}](l0, l1) -> v
[0,{1}] -> z
[a0,{1}] -> l0
[a1,{1}] -> l1
"""

_IF_POST = """\
// a0|10> + a1|11>  or  -a1|10> - a0|11>
Variables
a0 a1
Root States p
Transitions
[1,{1}](u, v) -> p
[2,{1,2}](z, z) -> u
[2,{1}](l0, l1) -> v
[2,{2}](m0, m1) -> v
[0,{1,2}] -> z
[a0,{1}] -> l0
[a1,{1}] -> l1
[-a1,{1}] -> m0
[-a0,{1}] -> m1
"""

_IF_PROGRAM = """\
OPENQASM 3;
qubit[2] q;
h q[0];
cx q[0], q[1];
if (measure q[0] == 0) {
  x q[0];
}
"""

_WHILE_INV = """\
// (a0|00> + a1|01> - a1|10> - a0|11>) / sqrt2
Constants
c := 1 / sqrt2
Variables
a0 a1
Root States p
Transitions
[1,{1}](u, v) -> p
[2,{1}](l0, l1) -> u
[2,{1}](m0, m1) -> v
[c*a0,{1}] -> l0
[c*a1,{1}] -> l1
[-c*a1,{1}] -> m0
[-c*a0,{1}] -> m1
"""

_WHILE_POST_TEMPLATE = """\
// -a1|10> {sign} a0|11>
Variables
a0 a1
Root States p
Transitions
[1,{{1}}](u, v) -> p
[2,{{1}}](z, z) -> u
[2,{{1}}](m0, m1) -> v
[0,{{1}}] -> z
[-a1,{{1}}] -> m0
[{sign}a0,{{1}}] -> m1
"""

_WHILE_PROGRAM = """\
OPENQASM 3;
qubit[2] q;
h q[0];
cx q[0], q[1];
// inv: inv.lsta
while (measure q[0] == 0) {
  x q[0];
  h q[0];
  cx q[0], q[1];
}
"""


def minus_x_if() -> Bundle:
    return Bundle("minus_x_if", {"program.qasm": _IF_PROGRAM, "pre.lsta": _AMP_PRE, "post.lsta": _IF_POST})


def minus_x_while(mutated: bool = False) -> Bundle:
    post = _WHILE_POST_TEMPLATE.format(sign="" if mutated else "-")
    return Bundle("minus_x_while", {
        "program.qasm": _WHILE_PROGRAM, "pre.lsta": _AMP_PRE, "post.lsta": post, "inv.lsta": _WHILE_INV,
    })


def _chain(prefix: str, start: int, n_total: int, leaf: str) -> list[str]:
    """States ``prefix{d}`` following the all-zero path from depth ``start``.

    Off-path branches go to the zero chain ``z{d}``.
    """
    lines = []
    for d in range(start, n_total):
        lines.append(f"[{d + 1},{{1}}]({prefix}{d + 1}, z{d + 1}) -> {prefix}{d}")
    lines.append(f"[{leaf},{{1}}] -> {prefix}{n_total}")
    return lines


def _zero_chain(start: int, n_total: int) -> list[str]:
    lines = [f"[{d + 1},{{1}}](z{d + 1}, z{d + 1}) -> z{d}" for d in range(start, n_total)]
    lines.append(f"[0,{{1}}] -> z{n_total}")
    return lines


def _wm_invariant(n: int) -> str:
    total = n + 2
    lines = [
        "// v_sol1|00 0..0> + v_k (sum of |00 s>, s != 0..0) + v_sol2|10 0..0>",
        "Variables",
        "v_sol1 v_k v_sol2",
        "Root States p0",
        "Transitions",
        "[1,{1}](p1, y1) -> p0",
        "[2,{1}](a2, z2) -> p1",
        "[2,{1}](b2, z2) -> y1",
    ]
    for d in range(2, total):
        lines.append(f"[{d + 1},{{1}}](a{d + 1}, k{d + 1}) -> a{d}")
        lines.append(f"[{d + 1},{{1}}](k{d + 1}, k{d + 1}) -> k{d}")
        lines.append(f"[{d + 1},{{1}}](b{d + 1}, z{d + 1}) -> b{d}")
    lines.append(f"[v_sol1,{{1}}] -> a{total}")
    lines.append(f"[v_k,{{1}}] -> k{total}")
    lines.append(f"[v_sol2,{{1}}] -> b{total}")
    lines += _zero_chain(2, total)
    return "\n".join(lines) + "\n"


def _wm_point(n: int, first_bit: int) -> str:
    """|b 0 0..0> with amplitude 1 where ``b = first_bit``."""
    total = n + 2
    lines = ["Root States p0", "Transitions"]
    if first_bit:
        lines.append("[1,{1}](z1, p1) -> p0")
    else:
        lines.append("[1,{1}](p1, z1) -> p0")
    lines += _chain("p", 1, total, "1")
    lines += _zero_chain(1, total)
    return "\n".join(lines) + "\n"


def _wm_program(n: int) -> str:
    total = n + 2
    work = [f"q[{k}]" for k in range(2, total)]

    def each(g: str) -> list[str]:
        return [f"{g} {w};" for w in work]

    oracle = each("x") + [f"mcx {', '.join(work)}, q[1];"] + each("x")
    rotate = oracle + ["ck q[1], q[0];"] + oracle
    if n == 1:
        reflect = ["z q[2];"]
    else:
        reflect = [f"mcz {', '.join(work)};"]
    diffusion = each("h") + each("x") + reflect + each("x") + each("h")
    phase = oracle + ["z q[1];"] + oracle
    body = phase + diffusion + rotate
    out = ["OPENQASM 3;", f"qubit[{total}] q;"]
    out += each("h")
    out += rotate
    out.append("// inv: inv.lsta ; inv.smt")
    out.append("while (measure q[0] == 0) {")
    out += ["  " + s for s in body]
    out.append("}")
    return "\n".join(out) + "\n"


_REAL_INV = """\
(declare-const v_sol1_im Real)
(declare-const v_k_im Real)
(declare-const v_sol2_im Real)
(assert (= v_sol1_im 0.0))
(assert (= v_k_im 0.0))
(assert (= v_sol2_im 0.0))
"""


def wmgrover(n: int) -> Bundle:
    """Weakly measured Grover search for the all-zero string over ``n`` qubits.

    Qubit 1 is the weakly measured flag, qubit 2 the oracle target and qubits
    3..n+2 the search register.
    """
    if n < 1:
        raise ValueError("wmgrover needs at least one search qubit")
    return Bundle(f"wmgrover{n:02d}", {
        "program.qasm": _wm_program(n),
        "pre.lsta": _wm_point(n, 0),
        "post.lsta": _wm_point(n, 1),
        "inv.lsta": _wm_invariant(n),
        "inv.smt": _REAL_INV,
    })


def generate_benchmark(kind: str, n: int | None = None) -> Bundle:
    if kind == "minus_x_if":
        return minus_x_if()
    if kind == "minus_x_while":
        return minus_x_while()
    if kind == "wmgrover":
        if n is None:
            raise ValueError("wmgrover needs --n")
        return wmgrover(n)
    raise ValueError(f"unknown benchmark kind {kind!r}; expected one of {', '.join(KINDS)}")

from __future__ import annotations

import os

import pytest
from hypothesis import given, settings, strategies as st

from lsta_verify.amplitude import INV_SQRT2
from lsta_verify.errors import (
    ChoiceOverlap, MissingInvariant, NestedControlFlow, ParseError, UndefinedConstant, ValidationError,
)
from lsta_verify.frontend import cli
from lsta_verify.frontend.benchmarks import generate_benchmark, wmgrover
from lsta_verify.frontend.constraint import format_constraint, parse_constraint
from lsta_verify.frontend.lsta_format import format_lsta, parse_lsta
from lsta_verify.frontend.program import parse_program
from lsta_verify.gates import Gate
from lsta_verify.lsta import enumerate_language, relabel, renumber
from lsta_verify.oracle import random_lsta
from lsta_verify.qtree import PerfectTree
from lsta_verify.verifier import GateStmt, If, While
from lsta_verify import smt

from conftest import BELL_TEXT


class TestLstaFormat:
    def test_bell(self, bell):
        assert len(bell.states) == 6
        assert len(bell.transitions) == 9
        assert bell.roots == {"p"}
        assert bell.n == 2

    def test_one_qubit_zero(self):
        a = parse_lsta("Root States p\nTransitions\n[1,{1}](q,q) -> p\n[0,{1}] -> q\n")
        assert enumerate_language(a) == {PerfectTree.zero(1)}

    def test_duplicate_choice(self):
        text = "Root States p\nTransitions\n[1,{1}](q,q) -> p\n[1,{1}](q,q) -> p\n[0,{1}] -> q\n[1,{2}] -> q\n"
        with pytest.raises(ValidationError):
            parse_lsta(text.replace("[1,{1}](q,q) -> p\n[1,{1}](q,q) -> p", "[1,{1}](q,q) -> p\n[1,{1,2}](q,q) -> p"))
        with pytest.raises(ChoiceOverlap):
            parse_lsta("Root States p\nTransitions\n[1,{1}](q,q) -> p\n[0,{1}] -> q\n[1,{1}] -> q\n")

    def test_undefined_constant(self):
        with pytest.raises(UndefinedConstant) as info:
            parse_lsta("Root States p\nTransitions\n[1,{1}](q,q) -> p\n[k,{1}] -> q\n")
        assert info.value.line == 4

    @pytest.mark.parametrize("text", [
        "Transitions\n[0,{1}] -> q\n",  # no roots
        "Root States p\nTransitions\n[1,{1}](q) -> p\n",
        "Root States p\nTransitions\n[1,{}](q,q) -> p\n",
        "Root States p\nTransitions\n[x,{1}](q,q) -> p\n",
        "Root States p\nTransitions\n[1,{a}] -> p\n",
        "Root States p\nTransitions\nhello\n",
        "hello\nRoot States p\n",
        "Constants\nc = 1\nRoot States p\n",
    ])
    def test_malformed(self, text):
        with pytest.raises(ParseError):
            parse_lsta(text)

    def test_comments_and_variables(self):
        a = parse_lsta("// header\nVariables a, b\nRoot States p // root\nTransitions\n[1,{1}](l, r) -> p\n[a,{1}] -> l\n[b/sqrt2,{1}] -> r\n")
        (t,) = enumerate_language(a)
        assert t.leaves[1].coefficient("b") == INV_SQRT2

    @settings(max_examples=60, deadline=None)
    @given(st.integers(0, 100_000), st.integers(1, 3))
    def test_round_trip(self, seed, n):
        a = renumber(random_lsta(seed, n, variables=("a", "b")))
        back = parse_lsta(format_lsta(a))
        assert relabel(back, lambda s: int(s[1:])) == a.replace(variables=a.all_vars())

    def test_bell_round_trip(self, bell):
        assert enumerate_language(parse_lsta(format_lsta(bell))) == enumerate_language(bell)


class TestConstraint:
    def test_empty(self):
        assert parse_constraint("") == smt.TRUE

    def test_modulus_comparison(self):
        text = "(assert (> (+ (* a_re a_re) (* a_im a_im)) (+ (* b_re b_re) (* b_im b_im))))"
        phi = parse_constraint(text)
        assert smt.free_vars(phi) == {"a_re", "a_im", "b_re", "b_im"}
        env = {"a_re": 2, "a_im": 0, "b_re": 1, "b_im": 1}
        from lsta_verify.amplitude import AlgebraicComplex
        assert smt.evaluate(phi, {k: AlgebraicComplex(v) for k, v in env.items()})

    def test_malformed(self):
        with pytest.raises(ParseError):
            parse_constraint("(assert (> a_re 0)")

    def test_format_round_trip(self):
        phi = parse_constraint("(assert (= |a'_im| 0))\n(assert (> a_re 1))")
        assert parse_constraint(format_constraint(phi)) == phi


ALG1_SRC = """OPENQASM 3;
qubit[2] q;
h q[0];
cx q[0], q[1];
if (measure q[0] == 0) { x q[0]; }
"""


class TestProgram:
    def test_if_program(self):
        p = parse_program(ALG1_SRC)
        assert p.n == 2 and len(p) == 3
        h, c, branch = p.statements
        assert h.gate == Gate("H", (1,))
        assert c.gate == Gate("X", (2,), (1,))
        assert isinstance(branch, If) and branch.qubit == 1 and branch.bit == 0 and branch.orelse == ()

    def test_else_branch(self):
        p = parse_program("qubit[1] q;\nif (measure q[0] == 1) { z q[0]; } else { x q[0]; s q[0]; }\n")
        (branch,) = p.statements
        assert len(branch.then) == 1 and len(branch.orelse) == 2

    def test_missing_invariant(self):
        with pytest.raises(MissingInvariant):
            parse_program("qubit[1] q;\nwhile (measure q[0] == 0) { x q[0]; }\n")

    def test_annotation_must_precede_loop(self):
        src = "qubit[1] q;\n// inv: i.lsta\nx q[0];\nwhile (measure q[0] == 0) { x q[0]; }\n"
        with pytest.raises(MissingInvariant):
            parse_program(src, loader=lambda p: "")

    def test_nested(self):
        src = "qubit[1] q;\nif (measure q[0] == 0) {\n// inv: i.lsta\nwhile (measure q[0] == 0) { x q[0]; } }\n"
        with pytest.raises(NestedControlFlow):
            parse_program(src)
        with pytest.raises(NestedControlFlow):
            parse_program("qubit[1] q;\nif (measure q[0] == 0) { if (measure q[0] == 1) { x q[0]; } }\n")

    def test_invariant_loaded(self, tmp_path):
        (tmp_path / "inv.lsta").write_text(BELL_TEXT.replace("[c-,{2}]", "[c-,{2}]"))
        (tmp_path / "inv.smt").write_text("(assert (= 1 1))\n")
        src = "qubit[2] q;\n// inv: inv.lsta ; inv.smt\nwhile (measure q[1] == 1) { h q[0]; }\n"
        (loop,) = parse_program(src, base_dir=str(tmp_path)).statements
        assert isinstance(loop, While) and loop.qubit == 2 and loop.bit == 1
        assert len(loop.invariant.transitions) == 9
        assert loop.invariant.constraint != smt.TRUE

    def test_gate_spellings(self):
        src = ("qubit[4] q;\nx q[0]; y q[0]; z q[0]; h q[0]; s q[0]; t q[0]; sdg q[0]; tdg q[0];\n"
               "swap q[0], q[1]; cx q[0], q[1]; ccx q[0], q[1], q[2]; cz q[0], q[3];\n"
               "mcx q[0], q[1], q[2], q[3]; mcz q[1], q[2], q[3]; ck q[1], q[0];\n")
        gates = [s.gate for s in parse_program(src).statements]
        assert gates[8] == Gate("SWAP", (1, 2))
        assert gates[10] == Gate("X", (3,), (1, 2))
        assert gates[12] == Gate("X", (4,), (1, 2, 3))
        assert gates[14] == Gate("K", (1,), (2,))

    @pytest.mark.parametrize("src", [
        "x q[0];",  # no register
        "qubit[1] q;\nx q[1];",  # out of range
        "qubit[1] q;\nfoo q[0];",
        "qubit[2] q;\ncx q[0];",
        "qubit[2] q;\ncx q[0], q[0];",
        "qubit[1] q;\nx r[0];",
        "qubit[1] q;\nif (measure q[0] == 2) { }",
        "qubit[1] q;\nx q[0]",
    ])
    def test_errors(self, src):
        with pytest.raises(ParseError):
            parse_program(src)


class TestBenchmarks:
    def test_kinds(self):
        for kind in ("minus_x_if", "minus_x_while"):
            b = generate_benchmark(kind)
            task = b.task()
            assert task.pre.n == 2

    def test_wmgrover_shape(self):
        task = wmgrover(3).task()
        assert task.program.n == 5
        loop = task.program.statements[-1]
        assert isinstance(loop, While) and loop.qubit == 1 and loop.bit == 0
        (pre,) = enumerate_language(task.pre)
        assert pre["00000"].as_constant() == 1
        (post,) = enumerate_language(task.post)
        assert post["10000"].as_constant() == 1

    def test_unknown_kind(self):
        with pytest.raises(ValueError):
            generate_benchmark("shor")

    def test_write(self, tmp_path):
        paths = wmgrover(2).write(str(tmp_path))
        assert sorted(os.path.basename(p) for p in paths) == ["inv.lsta", "inv.smt", "post.lsta", "pre.lsta", "program.qasm"]


class TestCli:
    def run(self, capsys, *argv):
        code = cli.main(list(argv))
        return code, capsys.readouterr().out

    def test_gen_and_verify(self, tmp_path, capsys):
        out = str(tmp_path / "b")
        code, _ = self.run(capsys, "gen", "--kind", "minus_x_while", "--out", out)
        assert code == 0
        code, text = self.run(capsys, "verify", "--program", f"{out}/program.qasm", "--pre", f"{out}/pre.lsta",
                              "--post", f"{out}/post.lsta")
        assert code == 0 and text.startswith("Verified")

    def test_failed_exit_code(self, tmp_path, capsys):
        out = tmp_path / "b"
        generate_benchmark("minus_x_while").write(str(out))
        (out / "post.lsta").write_text((out / "post.lsta").read_text().replace("[-a0,{1}]", "[a0,{1}]"))
        code, text = self.run(capsys, "verify", "--program", f"{out}/program.qasm", "--pre", f"{out}/pre.lsta",
                              "--post", f"{out}/post.lsta", "--json", "--no-timing")
        assert code == 1
        assert '"verdict": "Failed"' in text and "seconds" not in text

    def test_smt_files(self, tmp_path, capsys):
        out = tmp_path / "g"
        generate_benchmark("wmgrover", 1).write(str(out))
        (out / "pre.smt").write_text("")
        code, _ = self.run(capsys, "verify", "--program", f"{out}/program.qasm", "--pre", f"{out}/pre.lsta",
                           "--pre-smt", f"{out}/pre.smt", "--post", f"{out}/post.lsta", "--timeout", "20")
        assert code == 0

    def test_lang(self, tmp_path, capsys):
        f = tmp_path / "bell.lsta"
        f.write_text(BELL_TEXT)
        code, text = self.run(capsys, "lang", "--lsta", str(f))
        assert code == 0 and len(text.strip().splitlines()) == 4

    def test_error_exit(self, tmp_path, capsys):
        f = tmp_path / "bad.lsta"
        f.write_text("nonsense")
        assert cli.main(["lang", "--lsta", str(f)]) == 2

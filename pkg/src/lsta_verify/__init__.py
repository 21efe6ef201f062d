"""Verification of quantum programs with level-synchronized tree automata."""

from .amplitude import AlgebraicComplex, LinearTerm, parse_term
from .entail import entails_up_to_scaling
from .gates import Circuit, Gate, apply_circuit, lsta_apply_gate, tree_apply_gate
from .lsta import Lsta, Transition, accepts, add_zero_tree, enumerate_language, prime_variables, union, validate
from .measure import measure
from .qtree import PerfectTree
from .verifier import Program, Verdict, VerificationTask, exec_program, verify

__all__ = [
    "AlgebraicComplex", "LinearTerm", "parse_term", "entails_up_to_scaling",
    "Circuit", "Gate", "apply_circuit", "lsta_apply_gate", "tree_apply_gate",
    "Lsta", "Transition", "accepts", "add_zero_tree", "enumerate_language", "prime_variables",
    "union", "validate", "measure", "PerfectTree", "Program", "Verdict", "VerificationTask",
    "exec_program", "verify",
]

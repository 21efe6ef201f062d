"""File formats, benchmark generators and the command-line interface."""

from .benchmarks import Bundle, generate_benchmark
from .constraint import format_constraint, parse_constraint
from .lsta_format import format_lsta, parse_lsta
from .program import load_program, parse_program

__all__ = [
    "Bundle", "generate_benchmark", "format_constraint", "parse_constraint",
    "format_lsta", "parse_lsta", "load_program", "parse_program",
]

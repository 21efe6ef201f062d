"""Global constraints given as SMT-LIB assertion scripts."""

from __future__ import annotations

from ..errors import ParseError
from .. import smt


def parse_constraint(text: str) -> smt.Formula:
    """Conjunction of all ``(assert ...)`` commands; an empty script is ``true``."""
    assertions, _ = smt.parse_assertions(text)
    return smt.and_(*assertions)


def format_constraint(phi: smt.Formula) -> str:
    if phi == smt.TRUE:
        return ""
    parts = phi.args if isinstance(phi, smt.App) and phi.op == "and" else (phi,)
    decls = sorted(smt.free_vars(phi) - {smt.SQRT2_NAME})
    lines = [f"(declare-const {smt._symbol(n)} Real)" for n in decls]
    lines += [f"(assert {smt.to_smtlib(p)})" for p in parts]
    return "\n".join(lines) + "\n"


def real_constraint(names) -> smt.Formula:
    """Every listed complex variable has zero imaginary part."""
    return smt.and_(*(smt.eq(smt.Var(smt.complex_var_names(v)[1]), smt.num(0)) for v in sorted(names)))


__all__ = ["parse_constraint", "format_constraint", "real_constraint", "ParseError"]

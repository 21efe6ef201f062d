"""Exception hierarchy shared by all modules."""

from __future__ import annotations


class LstaVerifyError(Exception):
    """Base class for every error raised by this package."""


class UnboundVariable(LstaVerifyError):
    def __init__(self, name: str):
        super().__init__(f"variable {name!r} has no value in the assignment")
        self.name = name


class BadBasisLength(LstaVerifyError):
    pass


class DimensionMismatch(LstaVerifyError):
    pass


class IndexOutOfRange(LstaVerifyError):
    pass


class ValidationError(LstaVerifyError):
    """An automaton violates one of the structural invariants."""


class ChoiceOverlap(ValidationError):
    def __init__(self, state, choice: int):
        super().__init__(
            f"two transitions from state {state!r} share choice {choice}"
        )
        self.state = state
        self.choice = choice


class LevelMismatch(ValidationError):
    def __init__(self, state, detail: str = ""):
        msg = f"state {state!r} carries transitions inconsistent with its level"
        if detail:
            msg += f": {detail}"
        super().__init__(msg)
        self.state = state


class ArityMismatch(LstaVerifyError):
    pass


class LimitExceeded(LstaVerifyError):
    pass


class UnsupportedTerm(LstaVerifyError):
    pass


class SolverError(LstaVerifyError):
    """The external solver could not be run or produced garbage."""


class SolverUnknown(LstaVerifyError):
    """The solver answered ``unknown`` (or timed out)."""


class UnexpectedLoop(LstaVerifyError):
    pass


class ParseError(LstaVerifyError):
    def __init__(self, message: str, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class UndefinedConstant(ParseError):
    pass


class NestedControlFlow(ParseError):
    pass


class MissingInvariant(ParseError):
    pass

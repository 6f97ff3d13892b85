"""Exception types and diagnostics shared by every stage of the pipeline."""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class Diagnostic:
    line: int
    col: int
    severity: str
    message: str
    construct: str = ""

    def format(self, filename: str = "<input>") -> str:
        return f"{filename}:{self.line}:{self.col}: {self.severity}: {self.message}"


class UVError(Exception):
    """Base class for all errors raised by underverify."""


class SyntaxError_(UVError):
    def __init__(self, message: str, line: int = 0, col: int = 0):
        super().__init__(f"{line}:{col}: {message}")
        self.message = message
        self.line = line
        self.col = col


# Keep the public name readable without shadowing the builtin inside modules.
ParseError = SyntaxError_


class SubsetViolation(UVError):
    def __init__(self, diagnostics: list[Diagnostic]):
        self.diagnostics = list(diagnostics)
        super().__init__("; ".join(f"{d.line}:{d.col}: {d.message}" for d in self.diagnostics))


class UnknownIdentifier(ParseError):
    pass


class ContractTranslationError(UVError):
    pass


class InvariantError(UVError):
    pass


class InternalExtractionError(UVError):
    pass


class UnknownStatementForm(UVError):
    pass


class SolverUnavailable(UVError):
    pass


class MalformedSolverOutput(UVError):
    pass


class UnencodableTerm(UVError):
    pass

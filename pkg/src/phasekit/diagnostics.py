"""Diagnostic records shared by the parser and the semantic analyses."""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass
from enum import Enum


class Severity(str, Enum):
    ERROR = "error"
    WARNING = "warning"


@dataclass(frozen=True)
class Span:
    """A 1-based (file, line, column) position in source text."""

    file: str
    line: int
    column: int


@dataclass(frozen=True)
class Diagnostic:
    severity: Severity
    code: str
    message: str
    span: Span | None = None
    related_span: Span | None = None

    def format(self) -> str:
        """Render in compiler style: ``file:line:col: severity[code]: message``."""
        prefix = ""
        if self.span is not None:
            prefix = f"{self.span.file}:{self.span.line}:{self.span.column}: "
        return f"{prefix}{self.severity.value}[{self.code}]: {self.message}"


def has_errors(diagnostics: Sequence[Diagnostic]) -> bool:
    return any(d.severity is Severity.ERROR for d in diagnostics)

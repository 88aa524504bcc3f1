"""Diagnostic model shared by every stage of the toolchain.

A diagnostic carries a stable code (``E-*`` for errors, ``W-*`` for
warnings), a human message that may change between releases, and a source
span. Both the CLI and the language server emit these objects, so their
severities and spans always agree.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass


class Severity(enum.Enum):
    ERROR = "error"
    WARNING = "warning"


@dataclass(frozen=True)
class Span:
    """1-based line/column position plus a length in characters."""

    line: int
    col: int = 1
    length: int = 1


@dataclass(frozen=True)
class Diagnostic:
    code: str
    severity: Severity
    message: str
    file: str
    span: Span

    @property
    def is_error(self) -> bool:
        return self.severity is Severity.ERROR

    def to_json(self) -> str:
        """One JSON object per diagnostic, suitable for JSON-lines output."""
        return json.dumps(
            {
                "file": self.file,
                "line": self.span.line,
                "col": self.span.col,
                "code": self.code,
                "severity": self.severity.value,
                "message": self.message,
            },
            ensure_ascii=False,
        )

    def __str__(self) -> str:
        return (
            f"{self.file}:{self.span.line}:{self.span.col}: "
            f"{self.severity.value} {self.code}: {self.message}"
        )


def error(code: str, message: str, file: str, span: Span) -> Diagnostic:
    return Diagnostic(code, Severity.ERROR, message, file, span)


def warning(code: str, message: str, file: str, span: Span) -> Diagnostic:
    return Diagnostic(code, Severity.WARNING, message, file, span)


def sort_key(diag: Diagnostic) -> tuple:
    """Stable output order: by file, then position."""
    return (diag.file, diag.span.line, diag.span.col, diag.code)


def has_errors(diags: list[Diagnostic]) -> bool:
    return any(d.is_error for d in diags)


class MedfordError(Exception):
    """Raised where processing cannot continue; carries one diagnostic."""

    def __init__(self, diagnostic: Diagnostic):
        super().__init__(str(diagnostic))
        self.diagnostic = diagnostic

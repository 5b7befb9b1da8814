"""Shared parse-diagnostic types for the format parsers."""

from __future__ import annotations

from dataclasses import dataclass


@dataclass
class ParseDiagnostic:
    line: int
    column: int
    message: str
    severity: str = "error"  # "error" | "warning"

    def to_json(self) -> dict:
        return {
            "line": self.line,
            "column": self.column,
            "message": self.message,
            "severity": self.severity,
        }


class ParseError(ValueError):
    """Raised when parsing fails; carries all collected diagnostics."""

    def __init__(self, diagnostics: list[ParseDiagnostic]):
        self.diagnostics = diagnostics
        first = diagnostics[0] if diagnostics else ParseDiagnostic(0, 0, "parse error")
        super().__init__(f"{first.line}:{first.column}: {first.message}")

"""Validation reports shared by the static checkers."""
from __future__ import annotations


class Finding:
    __slots__ = ("severity", "code", "message")

    def __init__(self, severity: str, code: str, message: str):
        self.severity = severity  # "error" or "info"
        self.code = code          # short stable slug, e.g. "non-linear pattern"
        self.message = message

    def __str__(self) -> str:
        return f"{self.severity}: {self.code}: {self.message}"

    def __repr__(self) -> str:
        return f"Finding({self.severity!r}, {self.code!r}, {self.message!r})"


class Report:
    def __init__(self) -> None:
        self.findings: list[Finding] = []

    def error(self, code: str, message: str) -> None:
        self.findings.append(Finding("error", code, message))

    def info(self, code: str, message: str) -> None:
        self.findings.append(Finding("info", code, message))

    def extend(self, other: "Report") -> "Report":
        self.findings.extend(other.findings)
        return self

    @property
    def errors(self) -> list[Finding]:
        return [f for f in self.findings if f.severity == "error"]

    @property
    def ok(self) -> bool:
        return not self.errors

    def count(self, code: str) -> int:
        return sum(1 for f in self.findings if f.code == code)

    def __str__(self) -> str:
        return "\n".join(str(f) for f in self.findings)

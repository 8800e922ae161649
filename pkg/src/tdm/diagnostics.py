"""
Diagnostics, the closed code table, and the exceptions that carry them.
"""

from __future__ import annotations

from collections.abc import Iterable
from dataclasses import dataclass
from enum import Enum
from typing import Self

from .model import SourceSpan


class Severity(str, Enum):
    ERROR = "ERROR"
    WARNING = "WARNING"


@dataclass(frozen=True)
class CodeInfo:
    code: str
    severity: Severity
    summary: str


def _table(*entries: tuple[str, str]) -> dict[str, CodeInfo]:
    table: dict[str, CodeInfo] = {}
    for code, summary in entries:
        if code in table:
            raise ValueError(f"duplicate diagnostic code {code}")
        severity = Severity.WARNING if code.startswith("W") else Severity.ERROR
        table[code] = CodeInfo(code, severity, summary)
    return table


# Codes are stable across releases; never renumber, only append.
CODES: dict[str, CodeInfo] = _table(
    ("E0001", "unterminated method body block"),
    ("E0002", "illegal character"),
    ("E0101", "unexpected token in model structure"),
    ("E0102", "malformed feature declaration"),
    ("E0103", "empty value set"),
    ("E0104", "malformed relation declaration"),
    ("E0105", "malformed rule or literal"),
    ("E0106", "malformed configuration block"),
    ("E0107", "malformed interface or member declaration"),
    ("E0108", "malformed predicate"),
    ("E0109", "malformed implementation declaration"),
    ("E0110", "duplicate value in a feature's value set"),
    ("E0111", "feature name listed among its own values"),
    ("E0112", "trailing input after the model"),
    ("E0201", "unknown feature"),
    ("E0202", "value not in the feature's domain"),
    ("E0203", "duplicate feature name in a scope"),
    ("E0204", "configuration requires two values of one feature"),
    ("E0205", "relation has no builtin semantics"),
    ("E0206", "implementation realizes an unknown interface"),
    ("E0207", "feature not visible to the interface"),
    ("E0208", "implementation body names a method absent from the interface"),
    ("E0209", "literal both required and discarded"),
    ("E0210", "duplicate declaration"),
    ("E0211", "feature name shared by several interfaces used at model level"),
    ("W0301", "control rule relates a feature to itself"),
    ("W0302", "feature value never used"),
    ("W0303", "association not connected by any rule"),
    ("E0400", "model is not certified"),
    ("E0401", "state space exceeds the safety cap"),
    ("E0402", "incomplete assignment"),
    ("E0403", "assignment names an unknown feature or value"),
    ("E0404", "assignment misses a feature needed for evaluation"),
    ("E0501", "no implementation matches"),
    ("E0502", "ambiguous implementation selection"),
    ("E0503", "configuration has no valid completion"),
    ("E0504", "configuration has more than one valid completion"),
    ("E0505", "unknown configuration"),
)


@dataclass(frozen=True)
class Diagnostic:
    code: str
    severity: Severity
    message: str
    span: SourceSpan

    @classmethod
    def of(cls, code: str, message: str, span: SourceSpan) -> Diagnostic:
        """Build a diagnostic whose severity comes from the code table."""
        return cls(code, CODES[code].severity, message, span)

    @property
    def sort_key(self) -> tuple[str, int, int, str]:
        return (self.span.file, self.span.line_start, self.span.col_start, self.code)

    def format(self) -> str:
        return (
            f"{self.span.file}:{self.span.line_start}:{self.span.col_start}: "
            f"{self.severity.value} {self.code}: {self.message}"
        )

    def __str__(self) -> str:
        return self.format()


def sort_diagnostics(diagnostics: Iterable[Diagnostic]) -> tuple[Diagnostic, ...]:
    """Deduplicate and order by (file, line, col, code), then message."""
    unique = set(diagnostics)
    return tuple(sorted(unique, key=lambda d: (d.sort_key, d.message)))


def has_errors(diagnostics: Iterable[Diagnostic]) -> bool:
    return any(d.severity is Severity.ERROR for d in diagnostics)


class TdmError(Exception):
    """Base error; carries the diagnostics that explain it."""

    def __init__(self, diagnostics: Iterable[Diagnostic]) -> None:
        self.diagnostics = sort_diagnostics(diagnostics)
        super().__init__("\n".join(d.format() for d in self.diagnostics))

    @classmethod
    def single(cls, code: str, message: str, span: SourceSpan) -> Self:
        return cls([Diagnostic.of(code, message, span)])


class LexError(TdmError):
    pass


class ParseError(TdmError):
    pass


class UncertifiedModelError(TdmError):
    pass


class StateSpaceError(TdmError):
    pass


class AssignmentError(TdmError):
    pass


class MissingFeatureError(TdmError):
    def __init__(self, feature: str, span: SourceSpan | None = None) -> None:
        self.feature = feature
        super().__init__(
            [
                Diagnostic.of(
                    "E0404",
                    f"assignment has no value for feature '{feature}'",
                    span or SourceSpan.unknown(),
                )
            ]
        )


class ReleaseError(TdmError):
    pass


class UnknownConfigurationError(ReleaseError):
    pass

"""Source spans and diagnostics shared by the parser and the runtime."""
from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class Span:
    file: str
    line: int
    col: int
    end_line: int
    end_col: int

    def __str__(self):
        return f"{self.file}:{self.line}:{self.col}"

    def to(self, other: "Span | None") -> "Span":
        if other is None:
            return self
        return Span(self.file, self.line, self.col, other.end_line, other.end_col)


@dataclass(frozen=True)
class Diagnostic:
    kind: str  # lexical | syntax | resolution | typing | domain
    message: str
    span: Span

    def sort_key(self):
        return (self.span.file, self.span.line, self.span.col, self.message)

    def __str__(self):
        return f"{self.span}: {self.kind} error: {self.message}"


class DiagnosticError(Exception):
    """Raised when a document or query fails to parse; carries every diagnostic."""

    def __init__(self, diagnostics: list[Diagnostic]):
        self.diagnostics = sorted(diagnostics, key=Diagnostic.sort_key)
        super().__init__("\n".join(str(d) for d in self.diagnostics))


class EvaluationError(ArithmeticError):
    """An expression could not be evaluated on some state (e.g. division by zero)."""

    def __init__(self, message: str, span: Span | None = None, *, trajectory: int | None = None,
                 time: int | None = None):
        self.span = span
        self.trajectory = trajectory
        self.time = time
        self.message = message
        super().__init__(self._render())

    def _render(self) -> str:
        where = f"{self.span}: " if self.span else ""
        ctx = []
        if self.trajectory is not None:
            ctx.append(f"trajectory {self.trajectory}")
        if self.time is not None:
            ctx.append(f"time {self.time}")
        suffix = f" ({', '.join(ctx)})" if ctx else ""
        return f"{where}{self.message}{suffix}"

    def at(self, *, trajectory: int | None = None, time: int | None = None) -> "EvaluationError":
        return EvaluationError(self.message, self.span,
                               trajectory=self.trajectory if trajectory is None else trajectory,
                               time=self.time if time is None else time)

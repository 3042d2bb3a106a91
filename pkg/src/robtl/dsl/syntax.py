"""Unresolved syntax trees produced by the parser.

Arithmetic reuses the runtime node classes plus :class:`Name` for identifiers
whose meaning (variable, constant, level, let) is decided during resolution.
Perturbations, distance expressions and formulae use :class:`Raw` nodes.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Optional

from ..arith import ArithExpr
from ..diagnostics import Span


@dataclass(frozen=True)
class Name(ArithExpr):
    name: str


@dataclass(frozen=True)
class Count:
    """A natural number written as a literal or as a constant name."""

    value: Optional[float]
    name: Optional[str]
    span: Span


@dataclass(frozen=True)
class Raw:
    kind: str
    items: tuple[Any, ...] = ()
    span: Optional[Span] = field(default=None, compare=False)


@dataclass(frozen=True)
class LetStmt:
    name: str
    value: ArithExpr
    span: Span


@dataclass(frozen=True)
class UpdateStmt:
    target: str
    value: ArithExpr
    guard: Optional[ArithExpr]
    span: Span
    target_span: Span


@dataclass(frozen=True)
class Decl:
    kind: str  # const | var | init | kernel | effect | penalty | perturbation | expression | formula
    name: Optional[str]
    payload: Any
    span: Span
    name_span: Optional[Span] = None

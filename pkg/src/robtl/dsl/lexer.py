"""Tokenizer for .robtl files."""
from __future__ import annotations

import re
from dataclasses import dataclass

from ..diagnostics import Diagnostic, Span


@dataclass(frozen=True)
class Token:
    kind: str  # id | num | op | eof
    text: str
    span: Span

    def is_(self, *texts: str) -> bool:
        return self.kind in ("id", "op") and self.text in texts


_TOKEN = re.compile(r"""
    (?P<ws>[ \t\r\f\v]+)
  | (?P<nl>\n)
  | (?P<comment>\#[^\n]*)
  | (?P<num>(?:\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?)
  | (?P<id>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op>->|==|!=|<=|>=|[;,(){}\[\]=':@^*/+\-!&|<>])
""", re.VERBOSE)


def tokenize(text: str, filename: str = "<input>") -> tuple[list[Token], list[Diagnostic]]:
    tokens: list[Token] = []
    diags: list[Diagnostic] = []
    line, line_start, pos = 1, 0, 0
    n = len(text)
    while pos < n:
        m = _TOKEN.match(text, pos)
        col = pos - line_start + 1
        if m is None:
            ch = text[pos]
            diags.append(Diagnostic("lexical", f"unexpected character {ch!r}",
                                    Span(filename, line, col, line, col + 1)))
            pos += 1
            continue
        kind = m.lastgroup
        s = m.group()
        end = m.end()
        if kind == "nl":
            line += 1
            line_start = end
        elif kind == "num" and end < n and (text[end].isalpha() or text[end] == "_"):
            # 3x or 1e: a number glued to an identifier
            j = end
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            diags.append(Diagnostic("lexical", f"malformed number {text[pos:j]!r}",
                                    Span(filename, line, col, line, col + j - pos)))
            end = j
        elif kind in ("num", "id", "op"):
            tokens.append(Token(kind, s, Span(filename, line, col, line, col + len(s))))
        pos = end
    tokens.append(Token("eof", "", Span(filename, line, pos - line_start + 1, line, pos - line_start + 1)))
    return tokens, diags

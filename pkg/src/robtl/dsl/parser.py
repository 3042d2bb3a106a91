"""Recursive-descent parser from tokens to unresolved syntax trees."""
from __future__ import annotations

from typing import Callable, Optional

from ..arith import Binary, BoolLit, Call, Cond, Num, Time, Unary
from ..diagnostics import Diagnostic, Span
from .lexer import Token, tokenize
from .syntax import Count, Decl, LetStmt, Name, Raw, UpdateStmt

TOP_KEYWORDS = ("const", "var", "init", "kernel", "effect", "penalty", "perturbation", "expression", "formula")
RESERVED = frozenset(TOP_KEYWORDS + (
    "let", "when", "if", "then", "else", "true", "false", "time", "nil", "id", "sx", "dx", "min", "max",
    "sum", "sigma", "uniform", "abs", "floor", "sqrt", "count", "F", "G", "U", "D"))
RELS = ("<", "<=", ">=", ">")
CMP = ("==", "!=", "<", "<=", ">", ">=")


class ParseError(Exception):
    def __init__(self, diag: Diagnostic):
        self.diag = diag
        super().__init__(str(diag))


class Parser:
    def __init__(self, text: str, filename: str = "<input>"):
        self.tokens, self.diags = tokenize(text, filename)
        self.pos = 0
        self.filename = filename

    # -- token helpers

    @property
    def tok(self) -> Token:
        return self.tokens[self.pos]

    def peek(self, k: int = 1) -> Token:
        return self.tokens[min(self.pos + k, len(self.tokens) - 1)]

    def advance(self) -> Token:
        t = self.tokens[self.pos]
        if t.kind != "eof":
            self.pos += 1
        return t

    def error(self, message: str, tok: Optional[Token] = None, kind: str = "syntax") -> ParseError:
        tok = tok or self.tok
        return ParseError(Diagnostic(kind, message, tok.span))

    def describe(self, tok: Token) -> str:
        return "end of input" if tok.kind == "eof" else repr(tok.text)

    def expect(self, text: str) -> Token:
        if not self.tok.is_(text):
            raise self.error(f"expected {text!r}, found {self.describe(self.tok)}")
        return self.advance()

    def accept(self, text: str) -> Optional[Token]:
        return self.advance() if self.tok.is_(text) else None

    def ident(self, what: str = "a name") -> Token:
        if self.tok.kind != "id":
            raise self.error(f"expected {what}, found {self.describe(self.tok)}")
        return self.advance()

    def declared_name(self, what: str) -> Token:
        t = self.ident(what)
        if t.text in RESERVED:
            raise self.error(f"{t.text!r} is a reserved word", t)
        return t

    def span_from(self, start: Span) -> Span:
        prev = self.tokens[self.pos - 1] if self.pos > 0 else self.tok
        return start.to(prev.span)

    def at_end(self) -> bool:
        return self.tok.kind == "eof"

    # -- recovery

    def sync_top(self) -> None:
        """Skip to just after the next top-level ';' or block end, or to a statement keyword."""
        depth = 0
        while not self.at_end():
            t = self.tok
            if depth == 0 and t.kind == "id" and t.text in TOP_KEYWORDS and self._starts_statement():
                return
            self.advance()
            if t.is_("{"):
                depth += 1
            elif t.is_("}"):
                depth -= 1
                if depth <= 0:
                    return
            elif t.is_(";") and depth == 0:
                return

    def _starts_statement(self) -> bool:
        nxt = self.peek()
        return nxt.kind == "id" or nxt.is_("{")

    def sync_block(self) -> None:
        while not self.at_end() and not self.tok.is_("}"):
            if self.advance().is_(";"):
                return

    # -- documents

    def document(self) -> list[Decl]:
        decls = []
        while not self.at_end():
            try:
                decls.append(self.statement())
            except ParseError as err:
                self.diags.append(err.diag)
                start = self.pos
                self.sync_top()
                if self.pos == start:
                    self.advance()
        return decls

    def statement(self) -> Decl:
        t = self.tok
        if t.kind != "id" or t.text not in TOP_KEYWORDS:
            raise self.error(f"expected a declaration ({', '.join(TOP_KEYWORDS)}), found {self.describe(t)}")
        kw = self.advance().text
        if kw == "init":
            payload = self.block(self.init_item)
            return Decl("init", None, payload, self.span_from(t.span))
        if kw == "kernel":
            payload = self.block(self.program_item)
            return Decl("kernel", None, payload, self.span_from(t.span))
        name = self.declared_name(f"a name after {kw!r}")
        if kw == "effect":
            payload = self.block(self.program_item)
            return Decl("effect", name.text, payload, self.span_from(t.span), name.span)
        if kw == "var":
            self.expect(":")
            payload = self.domain()
        else:
            self.expect("=")
            payload = {
                "const": self.arith, "penalty": self.arith, "perturbation": self.pert,
                "expression": self.dexpr, "formula": self.formula,
            }[kw]()
        self.expect(";")
        return Decl(kw, name.text, payload, self.span_from(t.span), name.span)

    def block(self, item: Callable):
        self.expect("{")
        items = []
        while not self.tok.is_("}"):
            if self.at_end():
                raise self.error("unterminated block: expected '}'")
            try:
                items.append(item())
            except ParseError as err:
                self.diags.append(err.diag)
                self.sync_block()
        self.expect("}")
        return items

    def init_item(self):
        name = self.ident("a variable name")
        self.expect("=")
        value = self.arith()
        self.expect(";")
        return (name.text, value, name.span.to(self.tokens[self.pos - 1].span), name.span)

    def program_item(self):
        start = self.tok
        if self.accept("let"):
            name = self.declared_name("a local name")
            self.expect("=")
            value = self.arith()
            self.expect(";")
            return LetStmt(name.text, value, self.span_from(start.span))
        target = self.ident("an update target")
        self.expect("'")
        self.expect("=")
        value = self.arith()
        guard = self.arith() if self.accept("when") else None
        self.expect(";")
        return UpdateStmt(target.text, value, guard, self.span_from(start.span), target.span)

    def domain(self):
        start = self.tok
        if self.accept("["):
            lo = self.arith()
            self.expect(",")
            hi = self.arith()
            self.expect("]")
            return ("interval", lo, hi, self.span_from(start.span))
        if self.accept("{"):
            levels = [self.declared_name("a level name")]
            while self.accept(","):
                levels.append(self.declared_name("a level name"))
            self.expect("}")
            return ("enum", tuple((x.text, x.span) for x in levels), self.span_from(start.span))
        raise self.error(f"expected '[lo, hi]' or '{{levels}}', found {self.describe(self.tok)}")

    # -- arithmetic

    def arith(self):
        start = self.tok
        if self.accept("if"):
            c = self.arith()
            self.expect("then")
            a = self.arith()
            self.expect("else")
            b = self.arith()
            return Cond(c, a, b, span=self.span_from(start.span))
        return self._or()

    def _binary_chain(self, ops, sub):
        start = self.tok
        left = sub()
        while self.tok.kind == "op" and self.tok.text in ops:
            op = self.advance().text
            right = sub()
            left = Binary(op, left, right, span=self.span_from(start.span))
        return left

    def _or(self):
        return self._binary_chain(("|",), self._and)

    def _and(self):
        return self._binary_chain(("&",), self._not)

    def _not(self):
        start = self.tok
        if self.accept("!"):
            return Unary("!", self._not(), span=self.span_from(start.span))
        return self._cmp()

    def _cmp(self):
        start = self.tok
        left = self._add()
        if self.tok.kind == "op" and self.tok.text in CMP:
            op = self.advance().text
            right = self._add()
            if self.tok.kind == "op" and self.tok.text in CMP:
                raise self.error("comparisons do not chain; add parentheses")
            return Binary(op, left, right, span=self.span_from(start.span))
        return left

    def _add(self):
        return self._binary_chain(("+", "-"), self._mul)

    def _mul(self):
        return self._binary_chain(("*", "/"), self._unary)

    def _unary(self):
        start = self.tok
        if self.accept("-"):
            return Unary("-", self._unary(), span=self.span_from(start.span))
        return self._primary()

    def _primary(self):
        t = self.tok
        if t.kind == "num":
            self.advance()
            return Num(float(t.text), span=t.span)
        if self.accept("("):
            e = self.arith()
            self.expect(")")
            return e
        if t.kind == "id":
            self.advance()
            if t.text in ("true", "false"):
                return BoolLit(t.text == "true", span=t.span)
            if t.text == "time":
                return Time(span=t.span)
            if self.tok.is_("("):
                self.advance()
                args = [] if self.tok.is_(")") else [self.arith()]
                while self.accept(","):
                    args.append(self.arith())
                self.expect(")")
                return Call(t.text, tuple(args), span=self.span_from(t.span))
            if t.text in RESERVED:
                raise self.error(f"unexpected {t.text!r} in an arithmetic expression", t)
            return Name(t.text, span=t.span)
        raise self.error(f"expected an expression, found {self.describe(t)}")

    # -- numbers written as literals or constant names

    def count(self, what: str = "a number") -> Count:
        t = self.tok
        if t.kind == "num":
            self.advance()
            return Count(float(t.text), None, t.span)
        if t.kind == "id" and t.text not in RESERVED:
            self.advance()
            return Count(None, t.text, t.span)
        raise self.error(f"expected {what}, found {self.describe(t)}")

    def interval(self) -> Raw:
        start = self.expect("[")
        a = self.count("an integer time bound")
        self.expect(",")
        b = self.count("an integer time bound")
        self.expect("]")
        return Raw("interval", (a, b), self.span_from(start.span))

    def relation(self) -> str:
        if self.tok.kind == "op" and self.tok.text in RELS:
            return self.advance().text
        raise self.error(f"expected one of {' '.join(RELS)}, found {self.describe(self.tok)}")

    # -- perturbations

    def pert(self) -> Raw:
        start = self.tok
        left = self._pterm()
        while self._seq_ahead():
            self.advance()
            right = self._pterm()
            left = Raw("seq", (left, right), self.span_from(start.span))
        return left

    def _seq_ahead(self) -> bool:
        # ';' also terminates declarations; it continues a sequence only if a term follows
        if not self.tok.is_(";"):
            return False
        nxt = self.peek()
        if nxt.is_("("):
            return True
        if nxt.kind != "id":
            return False
        return nxt.text not in TOP_KEYWORDS or not self._decl_after(1)

    def _decl_after(self, k: int) -> bool:
        nxt = self.peek(k + 1)
        return nxt.kind == "id" or nxt.is_("{")

    def _pterm(self) -> Raw:
        start = self.tok
        node = self._patom()
        while self.accept("^"):
            n = self.count("an iteration count")
            node = Raw("iter", (node, n), self.span_from(start.span))
        return node

    def _patom(self) -> Raw:
        t = self.tok
        if self.accept("("):
            p = self.pert()
            self.expect(")")
            return p
        if t.kind == "id":
            if t.text == "nil":
                self.advance()
                return Raw("nil", (), t.span)
            if self.peek().is_("@"):
                if t.text in RESERVED and t.text != "id":
                    raise self.error(f"{t.text!r} is a reserved word", t)
                self.advance()
                self.advance()
                delay = self.count("a delay")
                return Raw("at", (t.text, delay, t.span), self.span_from(t.span))
            if t.text in RESERVED:
                raise self.error(f"unexpected {t.text!r} in a perturbation", t)
            self.advance()
            return Raw("ref", (t.text,), t.span)
        raise self.error(f"expected a perturbation, found {self.describe(t)}")

    # -- distance expressions

    def dexpr(self) -> Raw:
        start = self.tok
        left = self._dunary()
        if self.tok.is_("U") and self.peek().is_("["):
            self.advance()
            iv = self.interval()
            right = self._dunary()
            if self.tok.is_("U") and self.peek().is_("["):
                raise self.error("until is not associative; add parentheses")
            return Raw("U", (left, iv, right), self.span_from(start.span))
        return left

    def _dunary(self) -> Raw:
        t = self.tok
        if t.is_("F", "G") and self.peek().is_("["):
            self.advance()
            iv = self.interval()
            arg = self._dunary()
            return Raw(t.text, (iv, arg), self.span_from(t.span))
        return self._dprimary()

    def _dprimary(self) -> Raw:
        t = self.tok
        if self.accept("("):
            e = self.dexpr()
            self.expect(")")
            return e
        if t.kind != "id":
            raise self.error(f"expected a distance expression, found {self.describe(t)}")
        self.advance()
        if t.text in ("sx", "dx"):
            self.expect("(")
            rho = self.ident("a penalty name")
            self.expect(")")
            return Raw(t.text, (rho.text, rho.span), self.span_from(t.span))
        if t.text in ("min", "max"):
            self.expect("(")
            a = self.dexpr()
            self.expect(",")
            b = self.dexpr()
            self.expect(")")
            return Raw(t.text, (a, b), self.span_from(t.span))
        if t.text == "sum":
            self.expect("(")
            terms = [self._term()]
            while self.accept(","):
                terms.append(self._term())
            self.expect(")")
            return Raw("sum", tuple(terms), self.span_from(t.span))
        if t.text == "sigma":
            self.expect("(")
            e = self.dexpr()
            self.expect(",")
            rel = self.relation()
            z = self.count("a threshold")
            self.expect(")")
            return Raw("sigma", (e, rel, z), self.span_from(t.span))
        if t.text in RESERVED:
            raise self.error(f"unexpected {t.text!r} in a distance expression", t)
        return Raw("ref", (t.text,), t.span)

    def _term(self):
        w = self.count("a weight")
        self.expect("*")
        return (w, self._dunary())

    # -- formulae

    def formula(self) -> Raw:
        start = self.tok
        left = self._f_or()
        if self.accept("->"):
            right = self.formula()
            return Raw("->", (left, right), self.span_from(start.span))
        return left

    def _f_or(self) -> Raw:
        start = self.tok
        left = self._f_and()
        while self.accept("|"):
            left = Raw("|", (left, self._f_and()), self.span_from(start.span))
        return left

    def _f_and(self) -> Raw:
        start = self.tok
        left = self._f_until()
        while self.accept("&"):
            left = Raw("&", (left, self._f_until()), self.span_from(start.span))
        return left

    def _f_until(self) -> Raw:
        start = self.tok
        left = self._f_unary()
        if self.tok.is_("U") and self.peek().is_("["):
            self.advance()
            iv = self.interval()
            right = self._f_unary()
            if self.tok.is_("U") and self.peek().is_("["):
                raise self.error("until is not associative; add parentheses")
            return Raw("U", (left, iv, right), self.span_from(start.span))
        return left

    def _f_unary(self) -> Raw:
        t = self.tok
        if self.accept("!"):
            return Raw("!", (self._f_unary(),), self.span_from(t.span))
        if t.is_("F", "G") and self.peek().is_("["):
            self.advance()
            iv = self.interval()
            return Raw(t.text, (iv, self._f_unary()), self.span_from(t.span))
        return self._f_primary()

    def _f_primary(self) -> Raw:
        t = self.tok
        if self.accept("("):
            f = self.formula()
            self.expect(")")
            return f
        if t.kind != "id":
            raise self.error(f"expected a formula, found {self.describe(t)}")
        if t.text == "true":
            self.advance()
            return Raw("true", (), t.span)
        if t.text == "D" and self.peek().is_("["):
            self.advance()
            self.advance()
            e = self.dexpr()
            self.expect(",")
            p = self.pert()
            self.expect("]")
            rel = self.relation()
            eta = self.count("a threshold")
            return Raw("atomic", (e, p, rel, eta), self.span_from(t.span))
        if t.text in RESERVED:
            raise self.error(f"unexpected {t.text!r} in a formula", t)
        self.advance()
        return Raw("ref", (t.text,), t.span)

    # -- entry points

    def finish(self) -> None:
        if not self.at_end():
            raise self.error(f"unexpected {self.describe(self.tok)} after the end of the query")


def parse_document(text: str, filename: str = "<input>") -> tuple[list[Decl], list[Diagnostic]]:
    p = Parser(text, filename)
    decls = p.document()
    return decls, p.diags


def parse_fragment(text: str, kind: str, filename: str = "<query>") -> tuple[Optional[Raw], list[Diagnostic]]:
    """Parse a lone formula, distance expression or perturbation."""
    p = Parser(text, filename)
    rule = {"formula": p.formula, "expression": p.dexpr, "perturbation": p.pert}[kind]
    if p.diags:
        return None, p.diags
    try:
        node = rule()
        p.finish()
        return node, p.diags
    except ParseError as err:
        return None, p.diags + [err.diag]

"""Recursive-descent parser for algebra expressions.

Grammar:

    expr     := term (('+'|'-') term)*
    term     := factor ('*' factor)*
    factor   := rational | ident | ident '^' uint | '(' expr ')' | '-' factor
    rational := int ['/' uint]

Identifiers must name generators of the supplied table.  Writing an
explicit power `t^2` on an odd generator is rejected as a likely mistake,
while the spelled-out product `t*t` quietly evaluates to 0.
"""

from __future__ import annotations

from fractions import Fraction

from .algebra import Element, GeneratorTable


class ParseError(ValueError):
    """Syntax or name error, with the byte offset of the offending token."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (at offset {offset})")
        self.offset = offset


class _Parser:
    def __init__(self, text: str, table: GeneratorTable):
        self.text = text
        self.table = table
        self.pos = 0

    def error(self, message: str, offset: int | None = None) -> ParseError:
        return ParseError(message, self.pos if offset is None else offset)

    def skip_ws(self) -> None:
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def peek(self) -> str:
        self.skip_ws()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def take(self, ch: str) -> bool:
        if self.peek() == ch:
            self.pos += 1
            return True
        return False

    def parse(self) -> Element:
        e = self.expr()
        self.skip_ws()
        if self.pos != len(self.text):
            raise self.error(f"unexpected {self.text[self.pos]!r}")
        return e

    def expr(self) -> Element:
        e = self.term()
        while True:
            if self.take("+"):
                e = e + self.term()
            elif self.take("-"):
                e = e - self.term()
            else:
                return e

    def term(self) -> Element:
        e = self.factor()
        while self.take("*"):
            e = e * self.factor()
        return e

    def factor(self) -> Element:
        ch = self.peek()
        if ch == "-":
            self.pos += 1
            return -self.factor()
        if ch == "(":
            self.pos += 1
            e = self.expr()
            if not self.take(")"):
                raise self.error("expected ')'")
            return e
        if ch.isdigit():
            return self.rational()
        if ch.isalpha() or ch == "_":
            return self.ident_factor()
        raise self.error("expected a factor" if ch else "unexpected end of input")

    def uint(self) -> int:
        self.skip_ws()
        start = self.pos
        while self.pos < len(self.text) and self.text[self.pos].isdigit():
            self.pos += 1
        if self.pos == start:
            raise self.error("expected an integer")
        return int(self.text[start : self.pos])

    def rational(self) -> Element:
        num = self.uint()
        if self.take("/"):
            den_at = self.pos
            den = self.uint()
            if den == 0:
                raise self.error("zero denominator", den_at)
            return self.table.scalar(Fraction(num, den))
        return self.table.scalar(num)

    def ident_factor(self) -> Element:
        self.skip_ws()
        start = self.pos
        while self.pos < len(self.text) and (
            self.text[self.pos].isalnum() or self.text[self.pos] == "_"
        ):
            self.pos += 1
        name = self.text[start : self.pos]
        try:
            idx = self.table.index(name)
        except KeyError:
            raise self.error(f"unknown identifier {name!r}", start) from None
        gen = Element(self.table, {(idx,): Fraction(1)})
        if self.take("^"):
            exp_at = self.pos
            e = self.uint()
            if self.table.degrees[idx] % 2 and e > 1:
                raise self.error(
                    f"odd generator {name!r} raised to power {e}", exp_at
                )
            return gen**e
        return gen


def parse_expr(text: str, table: GeneratorTable) -> Element:
    """Parse `text` into an Element of `table`'s algebra."""
    return _Parser(text, table).parse()

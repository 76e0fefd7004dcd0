"""Expression parser for *-polynomials.

Grammar (whitespace-insensitive)::

    expr   := ['+'|'-'] term (('+'|'-') term)*
    term   := factor (['·'] factor)*          # juxtaposition multiplies
    factor := atom ('*' | '^' NUMBER)*        # postfix adjoint and power
    atom   := NUMBER ['/' NUMBER] | SYMBOL | '(' expr ')'
    SYMBOL := 'a' | 'b' | 's' | 'c' | 'i' | '1'

Unicode minus and middle-dot variants are accepted.  The printer in
``algebra.format_poly`` emits text that this parser reads back exactly.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import List

from ..errors import ParseError
from .algebra import StarPoly

_MINUS = {"-", "−", "–"}
_DOT = {"·", "⋅", "."}
_SYMBOLS = {"a", "b", "s", "c", "i"}


@dataclass
class _Token:
    kind: str  # NUM SYM PLUS MINUS DOT STAR CARET SLASH LP RP END
    text: str
    pos: int


def _tokenize(text: str) -> List[_Token]:
    tokens: List[_Token] = []
    k = 0
    while k < len(text):
        ch = text[k]
        if ch.isspace():
            k += 1
            continue
        if ch.isdigit():
            j = k
            while j < len(text) and text[j].isdigit():
                j += 1
            tokens.append(_Token("NUM", text[k:j], k))
            k = j
            continue
        if ch in _SYMBOLS:
            tokens.append(_Token("SYM", ch, k))
        elif ch.isalpha():
            raise ParseError(f"unknown symbol {ch!r}", k)
        elif ch == "+":
            tokens.append(_Token("PLUS", ch, k))
        elif ch in _MINUS:
            tokens.append(_Token("MINUS", ch, k))
        elif ch in _DOT:
            tokens.append(_Token("DOT", ch, k))
        elif ch == "*":
            tokens.append(_Token("STAR", ch, k))
        elif ch == "^":
            tokens.append(_Token("CARET", ch, k))
        elif ch == "/":
            tokens.append(_Token("SLASH", ch, k))
        elif ch == "(":
            tokens.append(_Token("LP", ch, k))
        elif ch == ")":
            tokens.append(_Token("RP", ch, k))
        else:
            raise ParseError(f"unexpected character {ch!r}", k)
        k += 1
    tokens.append(_Token("END", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = _tokenize(text)
        self.k = 0

    def peek(self) -> _Token:
        return self.tokens[self.k]

    def advance(self) -> _Token:
        tok = self.tokens[self.k]
        self.k += 1
        return tok

    def expect(self, kind: str) -> _Token:
        tok = self.peek()
        if tok.kind != kind:
            raise ParseError(f"expected {kind}, found {tok.text or 'end of input'!r}",
                             tok.pos)
        return self.advance()

    def parse(self) -> StarPoly:
        value = self.expr()
        tok = self.peek()
        if tok.kind != "END":
            raise ParseError(f"unexpected trailing {tok.text!r}", tok.pos)
        return value

    def expr(self) -> StarPoly:
        sign = 1
        if self.peek().kind in ("PLUS", "MINUS"):
            sign = -1 if self.advance().kind == "MINUS" else 1
        value = self.term() * sign
        while self.peek().kind in ("PLUS", "MINUS"):
            op = self.advance().kind
            rhs = self.term()
            value = value + rhs if op == "PLUS" else value - rhs
        return value

    def term(self) -> StarPoly:
        value = self.factor()
        while True:
            tok = self.peek()
            if tok.kind == "DOT":
                self.advance()
                value = value * self.factor()
            elif tok.kind in ("NUM", "SYM", "LP"):
                value = value * self.factor()
            else:
                return value

    def factor(self) -> StarPoly:
        value = self.atom()
        while True:
            tok = self.peek()
            if tok.kind == "STAR":
                self.advance()
                value = value.star
            elif tok.kind == "CARET":
                self.advance()
                n = int(self.expect("NUM").text)
                value = value ** n
            else:
                return value

    def atom(self) -> StarPoly:
        tok = self.peek()
        if tok.kind == "NUM":
            self.advance()
            num = int(tok.text)
            if self.peek().kind == "SLASH":
                self.advance()
                den_tok = self.expect("NUM")
                den = int(den_tok.text)
                if den == 0:
                    raise ParseError("zero denominator", den_tok.pos)
                return StarPoly.scalar(Fraction(num, den))
            return StarPoly.scalar(num)
        if tok.kind == "SYM":
            self.advance()
            if tok.text in ("a", "b"):
                return StarPoly.letter(tok.text)
            if tok.text in ("s", "c"):
                return StarPoly.central(tok.text)
            return StarPoly.imaginary_unit()
        if tok.kind == "LP":
            self.advance()
            value = self.expr()
            self.expect("RP")
            return value
        raise ParseError(f"expected a value, found {tok.text or 'end of input'!r}",
                         tok.pos)


def parse(text: str) -> StarPoly:
    """Parse an expression into an exact *-polynomial."""
    return _Parser(text).parse()

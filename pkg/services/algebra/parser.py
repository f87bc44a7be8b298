"""
Text grammar shared by curve files and the command line:

    expr   := term (('+' | '-') term)*
    term   := unary (('*' | '/') unary | <juxtaposed> power)*
    unary  := ('+' | '-') unary | power
    power  := atom ('^' unary)?
    atom   := INTEGER | VARIABLE | '(' expr ')'

Fraction literals such as ``3/4`` are ordinary divisions. Juxtaposition
(``xy``, ``2T``) multiplies.
"""
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Dict, List, Tuple

from infra.errors import ParseError
from services.algebra.models import Polynomial, RationalFunction

_TOKEN = re.compile(r"\s*(?:(\d+)|([A-Za-z])|(\*\*|[-+*/^()]))")


@dataclass(frozen=True)
class _Token:
    kind: str  # "num", "var", "op", "end"
    text: str
    column: int


def _tokenize(text: str, source: str, line: int) -> List[_Token]:
    tokens = []
    pos = 0
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            col = pos + 1
            while col <= len(text) and text[col - 1].isspace():
                col += 1
            raise ParseError(f"unexpected character {text[col - 1]!r}", line, col, source)
        if m.group(1):
            tokens.append(_Token("num", m.group(1), m.start(1) + 1))
        elif m.group(2):
            tokens.append(_Token("var", m.group(2), m.start(2) + 1))
        else:
            op = "^" if m.group(3) == "**" else m.group(3)
            tokens.append(_Token("op", op, m.start(3) + 1))
        pos = m.end()
    tokens.append(_Token("end", "", len(text) + 1))
    return tokens


class _Parser:
    def __init__(self, text: str, variables: Dict[str, object], const: Callable[[Fraction], object],
                 source: str, line: int):
        self.source = source
        self.line = line
        self.tokens = _tokenize(text, source, line)
        self.pos = 0
        self.variables = variables
        self.const = const

    def error(self, message: str, token: _Token = None):
        token = token or self.peek()
        raise ParseError(message, self.line, token.column, self.source)

    def peek(self) -> _Token:
        return self.tokens[self.pos]

    def advance(self) -> _Token:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def at_op(self, *ops: str) -> bool:
        tok = self.peek()
        return tok.kind == "op" and tok.text in ops

    def parse(self):
        if self.peek().kind == "end":
            self.error("empty expression")
        value = self.expr()
        if self.peek().kind != "end":
            self.error(f"unexpected {self.peek().text!r}")
        return value

    def expr(self):
        value = self.term()
        while self.at_op("+", "-"):
            op = self.advance().text
            rhs = self.term()
            value = value + rhs if op == "+" else value - rhs
        return value

    def term(self):
        value = self.unary()
        while True:
            tok = self.peek()
            if self.at_op("*"):
                self.advance()
                value = value * self.unary()
            elif self.at_op("/"):
                self.advance()
                rhs = self.unary()
                try:
                    value = value / rhs
                except ZeroDivisionError:
                    self.error("division by zero", tok)
            elif tok.kind in ("num", "var") or self.at_op("("):
                value = value * self.power()
            else:
                return value

    def unary(self):
        if self.at_op("-"):
            self.advance()
            return -self.unary()
        if self.at_op("+"):
            self.advance()
            return self.unary()
        return self.power()

    def power(self):
        base = self.atom()
        if self.at_op("^"):
            tok = self.advance()
            sign = 1
            if self.at_op("-"):
                self.advance()
                sign = -1
            exp_tok = self.advance()
            if exp_tok.kind != "num":
                self.error("exponent must be an integer literal", exp_tok)
            exponent = sign * int(exp_tok.text)
            try:
                return base ** exponent
            except (ValueError, ZeroDivisionError) as e:
                self.error(str(e), tok)
        return base

    def atom(self):
        tok = self.advance()
        if tok.kind == "num":
            return self.const(Fraction(int(tok.text)))
        if tok.kind == "var":
            if tok.text not in self.variables:
                allowed = ", ".join(sorted(self.variables)) or "none"
                self.error(f"unknown variable {tok.text!r} (allowed: {allowed})", tok)
            return self.variables[tok.text]
        if tok.kind == "op" and tok.text == "(":
            value = self.expr()
            if not self.at_op(")"):
                self.error("expected ')'")
            self.advance()
            return value
        self.error(f"unexpected {tok.text or 'end of input'!r}", tok)


def parse_rational_function(text: str, variable: str = "T", source: str = "<expr>", line: int = 1) -> RationalFunction:
    """
    Parse an element of Q(T); ``variable`` is the accepted variable name
    (``T`` or ``u``). Constants parse to constant rational functions.
    """
    names = {variable: RationalFunction.variable()}
    if variable == "T":
        names["t"] = names["T"]
    parser = _Parser(str(text), names, lambda c: RationalFunction(Polynomial.constant(c), normalized=True), source, line)
    return RationalFunction.coerce(parser.parse())


def parse_rational(text: str, source: str = "<expr>", line: int = 1) -> Fraction:
    parser = _Parser(str(text), {}, lambda c: c, source, line)
    value = parser.parse()
    return Fraction(value)


class BinaryForm:
    """
    Polynomial in two variables, stored as {(i, j): coefficient of x^i y^j};
    only needed to read homogeneous forms.
    """
    __slots__ = ("terms",)

    def __init__(self, terms: Dict[Tuple[int, int], Fraction]):
        self.terms = {k: v for k, v in terms.items() if v != 0}

    @staticmethod
    def coerce(value):
        if isinstance(value, BinaryForm):
            return value
        return BinaryForm({(0, 0): Fraction(value)})

    def __add__(self, other):
        other = BinaryForm.coerce(other)
        out = dict(self.terms)
        for k, v in other.terms.items():
            out[k] = out.get(k, 0) + v
        return BinaryForm(out)

    __radd__ = __add__

    def __neg__(self):
        return BinaryForm({k: -v for k, v in self.terms.items()})

    def __sub__(self, other):
        return self + (-BinaryForm.coerce(other))

    def __rsub__(self, other):
        return BinaryForm.coerce(other) - self

    def __mul__(self, other):
        other = BinaryForm.coerce(other)
        out: Dict[Tuple[int, int], Fraction] = {}
        for (i1, j1), v1 in self.terms.items():
            for (i2, j2), v2 in other.terms.items():
                k = (i1 + i2, j1 + j2)
                out[k] = out.get(k, 0) + v1 * v2
        return BinaryForm(out)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = BinaryForm.coerce(other)
        if set(other.terms) != {(0, 0)}:
            raise ValueError("forms may only be divided by constants")
        c = other.terms[(0, 0)]
        if c == 0:
            raise ZeroDivisionError("division by zero")
        return BinaryForm({k: v / c for k, v in self.terms.items()})

    def __pow__(self, n: int):
        if n < 0:
            raise ValueError("negative exponent in a form")
        out = BinaryForm({(0, 0): Fraction(1)})
        for _ in range(n):
            out = out * self
        return out

    def total_degrees(self) -> set:
        return {i + j for i, j in self.terms}


def parse_binary_form(text: str, source: str = "<form>", line: int = 1) -> BinaryForm:
    names = {"x": BinaryForm({(1, 0): Fraction(1)}), "y": BinaryForm({(0, 1): Fraction(1)})}
    parser = _Parser(str(text), names, lambda c: BinaryForm({(0, 0): c}), source, line)
    return BinaryForm.coerce(parser.parse())

"""Parser and printer for the ASCII tangle notation.

Grammar (whitespace allowed between tokens):

    expr    := closure | tangle
    closure := "N(" tsum ")" | "D(" tsum ")" | "[" int "." int "]"
             | "U(" int ")" | "K(" int ";" cf ")"
    tsum    := tprod (("+"|"-") tprod)*          -- "-" adds the mirror
    tprod   := atom ("*" atom)*                  -- "*" is the star product
    atom    := "[" int "]" | "[inf]" | "1/[" int "]"
             | "rot(" tsum ")" | cf | "[[" int "]]"
    cf      := "(" int ("," int)* ")"

Integer literals must fit in signed 64 bits.  Syntax errors report the
byte offset of the offending character.
"""

from __future__ import annotations

from .errors import IntegerOverflowError, TangleSyntaxError
from .tangles import (
    CF,
    Denominator,
    Family,
    InfinityTangle,
    IntegerTangle,
    KnotSpecExpr,
    Mirror,
    Numerator,
    Rot,
    Star,
    Sum,
    TangleExpr,
    VerticalTangle,
    ones,
)

_INT64_MAX = 2**63 - 1


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def error(self, message: str) -> TangleSyntaxError:
        return TangleSyntaxError(message, self.pos)

    def skip_ws(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def peek(self) -> str:
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def startswith(self, token: str) -> bool:
        return self.text.startswith(token, self.pos)

    def expect(self, token: str):
        self.skip_ws()
        if not self.startswith(token):
            raise self.error(f"expected {token!r}")
        self.pos += len(token)

    def accept(self, token: str) -> bool:
        self.skip_ws()
        if self.startswith(token):
            self.pos += len(token)
            return True
        return False

    def parse_int(self) -> int:
        self.skip_ws()
        start = self.pos
        if self.peek() == "-":
            self.pos += 1
        if not self.peek().isdigit():
            self.pos = start
            raise self.error("expected integer")
        while self.peek().isdigit():
            self.pos += 1
        value = int(self.text[start : self.pos])
        if not -_INT64_MAX - 1 <= value <= _INT64_MAX:
            self.pos = start
            raise IntegerOverflowError("integer literal exceeds 64 bits", start)
        return value

    # -- grammar productions ------------------------------------------------

    def parse_expr(self) -> KnotSpecExpr | TangleExpr:
        self.skip_ws()
        if self.accept("N("):
            inner = self.parse_tsum()
            self.expect(")")
            return Numerator(inner)
        if self.accept("D("):
            inner = self.parse_tsum()
            self.expect(")")
            return Denominator(inner)
        if self.accept("U("):
            n = self.parse_int()
            self.expect(")")
            return Family("U", n)
        if self.accept("K("):
            n = self.parse_int()
            self.expect(";")
            terms = self.parse_cf()
            self.expect(")")
            return Family("K", n, payload=terms)
        bracket_pair = self.try_bracket_pair()
        if bracket_pair is not None:
            return bracket_pair
        return self.parse_tsum()

    def try_bracket_pair(self) -> Family | None:
        """Parse "[n.m]" if present; leaves the position untouched otherwise."""
        save = self.pos
        self.skip_ws()
        if not self.startswith("[") or self.startswith("[["):
            self.pos = save
            return None
        self.pos += 1
        try:
            n = self.parse_int()
        except TangleSyntaxError:
            self.pos = save
            return None
        self.skip_ws()
        if not self.startswith("."):
            self.pos = save
            return None
        self.pos += 1
        m = self.parse_int()
        self.expect("]")
        return Family("BracketPair", n, m)

    def parse_tsum(self) -> TangleExpr:
        expr = self.parse_tprod()
        while True:
            if self.accept("+"):
                expr = Sum(expr, self.parse_tprod())
            elif self.accept("-"):
                expr = Sum(expr, Mirror(self.parse_tprod()))
            else:
                return expr

    def parse_tprod(self) -> TangleExpr:
        expr = self.parse_atom()
        while self.accept("*"):
            expr = Star(expr, self.parse_atom())
        return expr

    def parse_atom(self) -> TangleExpr:
        self.skip_ws()
        if self.startswith("[["):
            self.pos += 2
            n = self.parse_int()
            if n < 0:
                raise self.error("[[n]] requires n >= 0")
            self.expect("]]")
            return CF(ones(n))
        if self.startswith("[inf]"):
            self.pos += 5
            return InfinityTangle()
        if self.startswith("["):
            self.pos += 1
            n = self.parse_int()
            self.expect("]")
            return IntegerTangle(n)
        if self.startswith("rot("):
            self.pos += 4
            inner = self.parse_tsum()
            self.expect(")")
            return Rot(inner)
        if self.startswith("("):
            return CF(self.parse_cf())
        if self.startswith("1"):
            save = self.pos
            self.pos += 1
            if self.accept("/"):
                self.expect("[")
                n = self.parse_int()
                self.expect("]")
                return VerticalTangle(n)
            self.pos = save
        raise self.error("expected tangle atom")

    def parse_cf(self) -> tuple[int, ...]:
        self.expect("(")
        terms = [self.parse_int()]
        while self.accept(","):
            terms.append(self.parse_int())
        self.expect(")")
        return tuple(terms)


def parse_tangle(text: str) -> KnotSpecExpr | TangleExpr:
    """Parse a notation string into an expression tree."""
    parser = _Parser(text)
    expr = parser.parse_expr()
    parser.skip_ws()
    if parser.pos != len(text):
        raise parser.error("trailing input after expression")
    return expr


# --------------------------------------------------------------------------
# Printing


def _mirror_of(expr: TangleExpr) -> TangleExpr:
    """Structural mirror with the negations pushed to the leaves."""
    if isinstance(expr, IntegerTangle):
        return IntegerTangle(-expr.n)
    if isinstance(expr, VerticalTangle):
        return VerticalTangle(-expr.n)
    if isinstance(expr, InfinityTangle):
        return expr
    if isinstance(expr, CF):
        return CF(tuple(-x for x in expr.terms))
    if isinstance(expr, Sum):
        return Sum(_mirror_of(expr.left), _mirror_of(expr.right))
    if isinstance(expr, Star):
        return Star(_mirror_of(expr.left), _mirror_of(expr.right))
    if isinstance(expr, Rot):
        return Rot(_mirror_of(expr.inner))
    if isinstance(expr, Mirror):
        return expr.inner
    raise TypeError(f"not a tangle expression: {expr!r}")


def _fmt_atom(expr: TangleExpr) -> str:
    if isinstance(expr, Mirror):
        expr = _mirror_of(expr.inner)
    if isinstance(expr, IntegerTangle):
        return f"[{expr.n}]"
    if isinstance(expr, InfinityTangle):
        return "[inf]"
    if isinstance(expr, VerticalTangle):
        return f"1/[{expr.n}]"
    if isinstance(expr, Rot):
        return f"rot({_fmt_tsum(expr.inner)})"
    if isinstance(expr, CF):
        if not expr.terms:
            return "[[0]]"
        return "(" + ",".join(str(x) for x in expr.terms) + ")"
    raise ValueError(f"expression not representable as a grammar atom: {expr!r}")


def _fmt_tprod(expr: TangleExpr) -> str:
    factors = []
    while isinstance(expr, Star):
        factors.append(expr.right)
        expr = expr.left
    factors.append(expr)
    return "*".join(_fmt_atom(f) for f in reversed(factors))


def _fmt_tsum(expr: TangleExpr) -> str:
    operands = []
    while isinstance(expr, Sum):
        operands.append(expr.right)
        expr = expr.left
    operands.append(expr)
    operands.reverse()
    first = operands[0]
    if isinstance(first, Mirror):
        first = _mirror_of(first.inner)
    out = _fmt_tprod(first)
    for op in operands[1:]:
        if isinstance(op, Mirror):
            out += "-" + _fmt_tprod(op.inner)
        else:
            out += "+" + _fmt_tprod(op)
    return out


def format_expr(expr: KnotSpecExpr | TangleExpr) -> str:
    """Render an expression in the notation grammar.

    Inverse of `parse_tangle` on its image: re-parsing the output yields
    an equal tree for any parser-produced expression.
    """
    if isinstance(expr, Numerator):
        return f"N({_fmt_tsum(expr.tangle)})"
    if isinstance(expr, Denominator):
        return f"D({_fmt_tsum(expr.tangle)})"
    if isinstance(expr, Family):
        if expr.kind == "U":
            return f"U({expr.n})"
        if expr.kind == "BracketPair":
            return f"[{expr.n}.{expr.m}]"
        return f"K({expr.n};(" + ",".join(str(x) for x in expr.payload) + "))"
    return _fmt_tsum(expr)

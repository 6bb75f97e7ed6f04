"""Symbolic algebra of rational tangles and their numerator closures.

A rational tangle is denoted either by an expression tree (integer and
vertical twist tangles combined with +, star product, rotation, mirror)
or by a continued-fraction term list (a1, ..., an) meaning
a1 + 1/(a2 + 1/(... + 1/an)).  Every tangle carries an exact fraction
value; two rational tangles are topologically equivalent exactly when
their fractions agree (Conway), and numerator closures are classified by
the fraction p/q up to the residue equivalence q' == q^(+-1) (mod p).
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from .errors import (
    EmptyOperandError,
    NonRationalClosureError,
    ParameterRangeError,
)
from .rational import INFINITY, ExtendedRational

CFTerms = tuple[int, ...]


class _InfinityTerms:
    """Marker for the continued-fraction form of the value 1/0."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "CF_INFINITY"


CF_INFINITY = _InfinityTerms()


# --------------------------------------------------------------------------
# Expression trees


@dataclass(frozen=True)
class IntegerTangle:
    n: int


@dataclass(frozen=True)
class InfinityTangle:
    pass


@dataclass(frozen=True)
class VerticalTangle:
    """The tangle 1/[n]: n vertical twists. 1/[0] is the infinity tangle."""

    n: int


@dataclass(frozen=True)
class Sum:
    left: "TangleExpr"
    right: "TangleExpr"


@dataclass(frozen=True)
class Star:
    left: "TangleExpr"
    right: "TangleExpr"


@dataclass(frozen=True)
class Rot:
    inner: "TangleExpr"


@dataclass(frozen=True)
class Mirror:
    inner: "TangleExpr"


@dataclass(frozen=True)
class CF:
    terms: CFTerms


TangleExpr = (
    IntegerTangle | InfinityTangle | VerticalTangle | Sum | Star | Rot | Mirror | CF
)


@dataclass(frozen=True)
class Numerator:
    tangle: TangleExpr


@dataclass(frozen=True)
class Denominator:
    tangle: TangleExpr


@dataclass(frozen=True)
class Family:
    """Named configuration family: U(n), BracketPair(n, m) or K(n, terms)."""

    kind: str
    n: int
    m: int | None = None
    payload: CFTerms | None = None

    def __post_init__(self):
        if self.kind == "U":
            if self.n < 1:
                raise ParameterRangeError("U(n) requires n >= 1")
        elif self.kind == "BracketPair":
            if self.n < 0 or self.m is None or self.m < 0:
                raise ParameterRangeError("[n.m] requires n, m >= 0")
        elif self.kind == "K":
            if self.n < 0 or not self.payload:
                raise ParameterRangeError("K(n; terms) requires n >= 0 and terms")
        else:
            raise ParameterRangeError(f"unknown family kind {self.kind!r}")


KnotSpecExpr = Numerator | Denominator | Family


# --------------------------------------------------------------------------
# Fractions


def cf_value(terms: CFTerms) -> ExtendedRational:
    """Exact value of a continued-fraction term list, innermost first.

    The empty list is the zero tangle by convention, matching [[0]].
    Intermediate infinities are absorbed: x + 1/0 = inf, x + 1/inf = x.
    """
    acc: ExtendedRational | None = None
    for t in reversed(terms):
        acc = ExtendedRational(t) if acc is None else ExtendedRational(t) + acc.reciprocal()
    return acc if acc is not None else ExtendedRational(0)


def eval_fraction(expr: TangleExpr) -> ExtendedRational:
    """Fraction of a tangle expression via the four combination rules."""
    if isinstance(expr, IntegerTangle):
        return ExtendedRational(expr.n)
    if isinstance(expr, InfinityTangle):
        return INFINITY
    if isinstance(expr, VerticalTangle):
        return ExtendedRational(1, expr.n) if expr.n else INFINITY
    if isinstance(expr, CF):
        return cf_value(expr.terms)
    if isinstance(expr, Sum):
        return eval_fraction(expr.left) + eval_fraction(expr.right)
    if isinstance(expr, Star):
        a = eval_fraction(expr.left).reciprocal()
        b = eval_fraction(expr.right).reciprocal()
        return (a + b).reciprocal()
    if isinstance(expr, Rot):
        return -eval_fraction(expr.inner).reciprocal()
    if isinstance(expr, Mirror):
        return -eval_fraction(expr.inner)
    raise TypeError(f"not a tangle expression: {expr!r}")


def tangles_equivalent(a: TangleExpr, b: TangleExpr) -> bool:
    """Topological equivalence of rational tangles: equality of fractions."""
    return eval_fraction(a) == eval_fraction(b)


def canonical_cf(f: ExtendedRational) -> CFTerms | _InfinityTerms:
    """Unique continued-fraction form of a fraction via Euclid's algorithm.

    Positive values get all-nonnegative terms (a leading 0 when |f| < 1),
    negative values the negated expansion of |f|, and the final term has
    absolute value >= 2 whenever the list is longer than one entry.
    """
    if f.is_infinite:
        return CF_INFINITY
    p, q = f.numerator, f.denominator
    if p == 0:
        return (0,)
    sign = 1 if p > 0 else -1
    p = abs(p)
    terms: list[int] = []
    while True:
        a, r = divmod(p, q)
        terms.append(sign * a)
        if r == 0:
            break
        p, q = q, r
    assert len(terms) == 1 or abs(terms[-1]) >= 2
    return tuple(terms)


# --------------------------------------------------------------------------
# Term-list surgery


def reverse_terms(t: CFTerms) -> CFTerms:
    """Reversed term list; numerator closures of t and its reverse agree."""
    return tuple(reversed(t))


def truncate(t: CFTerms) -> CFTerms:
    """Drop the last term.  N(T - truncate(T)) is always unknotted."""
    if not t:
        raise EmptyOperandError("cannot truncate an empty term list")
    return t[:-1]


def box_compose(t: CFTerms, s: CFTerms) -> CFTerms:
    """Single term list whose closure equals the closure of the sum t + s.

    (a_n, ..., a_2, a_1 + b_1, b_2, ..., b_m).  Only the closures agree;
    the fractions themselves differ in general (their numerators match).
    """
    if not t or not s:
        raise EmptyOperandError("box composition needs non-empty operands")
    return t[::-1][:-1] + (t[0] + s[0],) + s[1:]


def simplify_terms(t: CFTerms) -> CFTerms:
    """Eliminate zeros by value-preserving rewrites until none is removable.

    Interior zeros merge their neighbours: (..a, b, 0, c, d..) -> (..a, b+c, d..).
    A trailing zero with at least two predecessors drops itself and its
    predecessor: (.., b, y, 0) -> (.., b), since y + 1/0 = inf and
    b + 1/inf = b.  Each rewrite shortens the list by two, so this
    terminates.  Irreducible leftovers are a sole (0,), a leading zero, or
    the two-term (y, 0) whose value is infinity.
    """
    terms = list(t)
    changed = True
    while changed:
        changed = False
        for i, x in enumerate(terms):
            if x != 0:
                continue
            if 0 < i < len(terms) - 1:
                merged = terms[i - 1] + terms[i + 1]
                terms[i - 1 : i + 2] = [merged]
                changed = True
                break
            if i == len(terms) - 1 and len(terms) >= 3:
                del terms[-2:]
                changed = True
                break
    return tuple(terms)


# --------------------------------------------------------------------------
# Closure classification


class KnotTag(str, Enum):
    UNKNOT = "Unknot"
    TWO_BRIDGE = "TwoBridgeKnot"
    TWO_COMPONENT_LINK = "TwoComponentLink"
    NON_RATIONAL = "NonRationalClosure"


@dataclass(frozen=True)
class KnotClass:
    """Closure identity: determinant p >= 0 and canonical residue q."""

    p: int
    q: int
    tag: KnotTag

    def __str__(self):
        return f"{self.tag.value}({self.p}/{self.q})"


def _residue_class(p: int, q: int, chirality_sensitive: bool) -> int:
    q %= p
    inv = pow(q, -1, p)
    candidates = [q, inv]
    if not chirality_sensitive:
        candidates += [p - q, p - inv]
    return min(candidates)


def classify_two_bridge(
    f: ExtendedRational, chirality_sensitive: bool = False
) -> KnotClass:
    """Classify the numerator closure of a rational tangle with fraction f.

    p = 1 (or f infinite) is the unknot; p even or p = 0 is flagged as a
    two-component link; otherwise a two-bridge knot.  q is reduced to the
    minimum of q^(+-1) mod p (also of -q^(+-1) unless chirality matters).
    """
    if f.is_infinite:
        return KnotClass(1, 0, KnotTag.UNKNOT)
    p, q = f.numerator, f.denominator
    if p < 0:
        p, q = -p, -q
    if p == 0:
        return KnotClass(0, 1, KnotTag.TWO_COMPONENT_LINK)
    if p == 1:
        return KnotClass(1, 0, KnotTag.UNKNOT)
    qc = _residue_class(p, q, chirality_sensitive)
    tag = KnotTag.TWO_COMPONENT_LINK if p % 2 == 0 else KnotTag.TWO_BRIDGE
    return KnotClass(p, qc, tag)


def equivalent(
    f1: ExtendedRational, f2: ExtendedRational, chirality_sensitive: bool = False
) -> bool:
    """Whether two closure fractions name the same unoriented knot or link."""
    return classify_two_bridge(f1, chirality_sensitive) == classify_two_bridge(
        f2, chirality_sensitive
    )


# --------------------------------------------------------------------------
# Configuration families


def ones(n: int) -> CFTerms:
    """The all-ones term list [[n]]; [[0]] is the zero tangle."""
    if n < 0:
        raise ParameterRangeError("[[n]] requires n >= 0")
    return (1,) * n


def make_family(kind: str, n: int, m: int | None = None, payload: CFTerms | None = None) -> Family:
    return Family(kind, n, m, payload)


def expand_family(fam: Family) -> Numerator:
    """Rewrite a family as the numerator of an explicit tangle difference."""
    if fam.kind == "U":
        t, s = ones(fam.n + 1), ones(fam.n)
    elif fam.kind == "BracketPair":
        t, s = ones(fam.n), ones(fam.m)
    else:  # K
        t, s = ones(fam.n + 1) + tuple(fam.payload), ones(fam.n)
    return Numerator(Sum(CF(t), Mirror(CF(s))))


# --------------------------------------------------------------------------
# Closure reduction


def _operand_terms(expr: TangleExpr) -> CFTerms:
    """Continued-fraction terms of one closure operand.

    CF lists, integer and vertical tangles, and their mirrors convert
    structurally; any other rational operand falls back to the canonical
    expansion of its fraction, which names an equivalent tangle.
    """
    if isinstance(expr, CF):
        return expr.terms if expr.terms else (0,)
    if isinstance(expr, IntegerTangle):
        return (expr.n,)
    if isinstance(expr, VerticalTangle):
        return (0, expr.n) if expr.n else None
    if isinstance(expr, Mirror):
        inner = _operand_terms(expr.inner)
        return None if inner is None else tuple(-x for x in inner)
    f = eval_fraction(expr)
    if f.is_infinite:
        return None
    terms = canonical_cf(f)
    return terms


def reduce_closure(expr: KnotSpecExpr) -> tuple[CFTerms | _InfinityTerms, KnotClass]:
    """Collapse a closure to a zero-free term list and classify it.

    Families expand first; N(T + S) becomes the box composition of the
    operand term lists, then zero elimination runs and the resulting value
    is classified.  When the reduced value is infinity (for instance any
    N(T - truncate(T)) cascade, which ends at a (y, 0) list) the terms
    slot carries the infinity marker and the class is the unknot.
    """
    if isinstance(expr, Family):
        expr = expand_family(expr)
    if isinstance(expr, Denominator):
        f = -eval_fraction(expr.tangle).reciprocal()
        terms = canonical_cf(f)
        return terms, classify_two_bridge(f)
    if not isinstance(expr, Numerator):
        raise NonRationalClosureError(f"unsupported closure expression: {expr!r}")

    inner = expr.tangle
    if isinstance(inner, Sum):
        if isinstance(inner.left, Sum) or isinstance(inner.right, Sum):
            raise NonRationalClosureError("sums of three or more tangles are out of scope")
        a = _operand_terms(inner.left)
        b = _operand_terms(inner.right)
        if a is None or b is None:
            raise NonRationalClosureError("infinity operands are out of scope")
        terms = box_compose(a, b)
    else:
        terms = _operand_terms(inner)
        if terms is None:
            return CF_INFINITY, KnotClass(1, 0, KnotTag.UNKNOT)
    reduced = simplify_terms(terms)
    value = cf_value(reduced)
    klass = classify_two_bridge(value)
    if value.is_infinite:
        return CF_INFINITY, klass
    return reduced, klass

"""
Tangle Expressions - AST, Parser and Pillowcase Slope

Arborescent tangles are built from rational tangles Q(p/q) by Conway sum, rotation,
twisting, mirroring, the hat flip, the earring modification and shears. The text
grammar is

    expr   := term ('+' term)*
    term   := 'Q(' frac ')' | 'Q(inf)' | 'P(' int (',' int)* ')'
            | 'rot(' expr ')' | 'twist(' expr ',' int ')' | 'mirror(' expr ')'
            | 'hat(' expr ')' | 'earring(' expr ')'
            | 'shear(' expr ',' ('theta'|'gamma') ',' frac ')'
            | '(' expr ')'

with '+' left-associative and whitespace ignored.
"""

from dataclasses import dataclass
from fractions import Fraction
from math import gcd
from typing import List, Optional, Tuple, Union
import logging
import re

from .errors import ParseError, TangleError
from .exactgeom import ShearDirection, ShearSpec

logger = logging.getLogger(__name__)


# ============================================================================
# AST
# ============================================================================

@dataclass(frozen=True)
class Rational:
    """Rational tangle Q(p/q); Q(inf) is Rational(1, 0)"""
    p: int
    q: int

    def __post_init__(self):
        if self.p == 0 and self.q == 0:
            raise TangleError("Q(0/0) is not a tangle")
        p, q = self.p, self.q
        if q < 0 or (q == 0 and p < 0):
            p, q = -p, -q
        g = gcd(abs(p), abs(q))
        object.__setattr__(self, "p", p // g)
        object.__setattr__(self, "q", q // g)

    @property
    def is_infinity(self) -> bool:
        return self.q == 0


@dataclass(frozen=True)
class Sum:
    left: "TangleExpr"
    right: "TangleExpr"


@dataclass(frozen=True)
class Rotate:
    inner: "TangleExpr"


@dataclass(frozen=True)
class Twist:
    inner: "TangleExpr"
    n: int


@dataclass(frozen=True)
class Mirror:
    inner: "TangleExpr"


@dataclass(frozen=True)
class Hat:
    inner: "TangleExpr"


@dataclass(frozen=True)
class Earring:
    inner: "TangleExpr"


@dataclass(frozen=True)
class Sheared:
    inner: "TangleExpr"
    spec: ShearSpec


TangleExpr = Union[Rational, Sum, Rotate, Twist, Mirror, Hat, Earring, Sheared]

INFINITY = Rational(1, 0)


def contains_earring(e: TangleExpr) -> bool:
    if isinstance(e, Earring):
        return True
    if isinstance(e, Sum):
        return contains_earring(e.left) or contains_earring(e.right)
    if isinstance(e, Rational):
        return False
    return contains_earring(e.inner)


# ============================================================================
# Pillowcase slope
# ============================================================================

# Extended rationals: None stands for infinity
Slope = Optional[Fraction]


def slope(e: TangleExpr) -> Slope:
    """Pillowcase slope of an earring-free expression (None is infinity)"""
    if isinstance(e, Rational):
        return None if e.is_infinity else Fraction(e.p, e.q)
    if isinstance(e, Earring):
        raise TangleError("earring tangles have no pillowcase slope")
    if isinstance(e, Sum):
        left, right = slope(e.left), slope(e.right)
        if left is None or right is None:
            return None
        return left + right
    s = slope(e.inner)
    if isinstance(e, Rotate):
        if s is None:
            return Fraction(0)
        return None if s == 0 else -1 / s
    if isinstance(e, Twist):
        return None if s is None else s + e.n
    if isinstance(e, (Mirror, Hat)):
        return None if s is None else -s
    if isinstance(e, Sheared):
        return s
    raise TangleError(f"unknown tangle node {type(e).__name__}")


# ============================================================================
# Printer
# ============================================================================

def _frac_text(x: Fraction) -> str:
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def to_text(e: TangleExpr) -> str:
    """Render in the parse grammar"""
    if isinstance(e, Rational):
        if e.is_infinity:
            return "Q(inf)"
        return f"Q({e.p}/{e.q})" if e.q != 1 else f"Q({e.p})"
    if isinstance(e, Sum):
        right = to_text(e.right)
        if isinstance(e.right, Sum):
            right = f"({right})"
        return f"{to_text(e.left)}+{right}"
    if isinstance(e, Rotate):
        return f"rot({to_text(e.inner)})"
    if isinstance(e, Twist):
        return f"twist({to_text(e.inner)},{e.n})"
    if isinstance(e, Mirror):
        return f"mirror({to_text(e.inner)})"
    if isinstance(e, Hat):
        return f"hat({to_text(e.inner)})"
    if isinstance(e, Earring):
        return f"earring({to_text(e.inner)})"
    if isinstance(e, Sheared):
        return f"shear({to_text(e.inner)},{e.spec.direction.value},{_frac_text(e.spec.t)})"
    raise TangleError(f"unknown tangle node {type(e).__name__}")


# ============================================================================
# Parser
# ============================================================================

_TOKEN = re.compile(r"\s*(?:(?P<num>-?\d+)|(?P<word>[A-Za-z]+)|(?P<op>[()+,/]))")


class _Parser:
    """Recursive-descent parser over a token list with source positions"""

    def __init__(self, text: str):
        self.text = text
        self.tokens: List[Tuple[str, str, int]] = []
        pos = 0
        while pos < len(text):
            if text[pos:].strip() == "":
                break
            m = _TOKEN.match(text, pos)
            if not m or m.end() == pos:
                raise ParseError(f"unexpected character {text[pos:].lstrip()[:1]!r}",
                                 pos + len(text[pos:]) - len(text[pos:].lstrip()), text)
            kind = m.lastgroup
            self.tokens.append((kind, m.group(kind), m.start(kind)))
            pos = m.end()
        self.i = 0

    def peek(self) -> Optional[Tuple[str, str, int]]:
        return self.tokens[self.i] if self.i < len(self.tokens) else None

    def position(self) -> int:
        tok = self.peek()
        return tok[2] if tok else len(self.text)

    def expect(self, value: str) -> None:
        tok = self.peek()
        if tok is None or tok[1] != value:
            found = "end of input" if tok is None else repr(tok[1])
            raise ParseError(f"expected {value!r}, found {found}", self.position(), self.text)
        self.i += 1

    def integer(self) -> int:
        tok = self.peek()
        if tok is None or tok[0] != "num":
            raise ParseError("expected an integer", self.position(), self.text)
        self.i += 1
        return int(tok[1])

    def fraction(self) -> Tuple[int, int]:
        p = self.integer()
        tok = self.peek()
        if tok is not None and tok[1] == "/":
            self.i += 1
            q = self.integer()
            return p, q
        return p, 1

    def parse(self) -> TangleExpr:
        e = self.expr()
        if self.peek() is not None:
            raise ParseError(f"unexpected {self.peek()[1]!r}", self.position(), self.text)
        return e

    def expr(self) -> TangleExpr:
        e = self.term()
        while self.peek() is not None and self.peek()[1] == "+":
            self.i += 1
            e = Sum(e, self.term())
        return e

    def term(self) -> TangleExpr:
        tok = self.peek()
        if tok is None:
            raise ParseError("unexpected end of input", len(self.text), self.text)
        start = tok[2]
        if tok[1] == "(":
            self.i += 1
            e = self.expr()
            self.expect(")")
            return e
        if tok[0] != "word":
            raise ParseError(f"unexpected {tok[1]!r}", start, self.text)
        self.i += 1
        name = tok[1]
        self.expect("(")
        if name == "Q":
            e = self.rational(start)
        elif name == "P":
            qs = [self.integer()]
            while self.peek() is not None and self.peek()[1] == ",":
                self.i += 1
                qs.append(self.integer())
            e = pretzel(*qs)
        elif name in ("rot", "mirror", "hat", "earring"):
            inner = self.expr()
            e = {"rot": Rotate, "mirror": Mirror, "hat": Hat, "earring": Earring}[name](inner)
        elif name == "twist":
            inner = self.expr()
            self.expect(",")
            e = Twist(inner, self.integer())
        elif name == "shear":
            inner = self.expr()
            self.expect(",")
            d = self.peek()
            if d is None or d[1] not in ("theta", "gamma"):
                raise ParseError("shear direction must be theta or gamma", self.position(), self.text)
            self.i += 1
            self.expect(",")
            p, q = self.fraction()
            if q == 0:
                raise ParseError("shear parameter has zero denominator", self.position(), self.text)
            e = Sheared(inner, ShearSpec(ShearDirection(d[1]), Fraction(p, q)))
        else:
            raise ParseError(f"unknown operation {name!r}", start, self.text)
        self.expect(")")
        return e

    def rational(self, start: int) -> Rational:
        tok = self.peek()
        if tok is not None and tok[1] == "inf":
            self.i += 1
            return INFINITY
        p, q = self.fraction()
        if p == 0 and q == 0:
            raise ParseError("Q(0/0) is not a tangle", start, self.text)
        return Rational(p, q)


def parse(text: str) -> TangleExpr:
    """Parse a tangle expression"""
    e = _Parser(text).parse()
    logger.debug(f"Parsed {text!r} -> {to_text(e)}")
    return e


# ============================================================================
# Pretzel helpers
# ============================================================================

def pretzel(*qs: int) -> TangleExpr:
    """Q(1/q1) + ... + Q(1/qn)"""
    if not qs:
        raise TangleError("pretzel needs at least one twist count")
    if any(q == 0 for q in qs):
        raise TangleError("pretzel twist counts must be nonzero")
    e: TangleExpr = Rational(1, qs[0])
    for q in qs[1:]:
        e = Sum(e, Rational(1, q))
    return e


def pretzel_split(*qs: int) -> Tuple[TangleExpr, TangleExpr]:
    """The two tangles whose Floer pairing computes the pretzel knot invariant"""
    if len(qs) < 3:
        raise TangleError("pretzel split needs at least three twist counts")
    return Earring(Hat(Rational(1, qs[0]))), pretzel(*qs[1:])

"""
Exact Geometry - Rational Points, Lifts and Actions on the Pillowcase

The pillowcase is the plane modulo the group generated by translations by 2 in
either coordinate and by negation. Coordinates are exact rationals in units of pi,
so every intersection and transversality question below is decided exactly.

The group acts freely away from the integer lattice, so the plane minus the lattice
covers the pillowcase minus its four corners. Curves are stored by a lift to the
plane; closed curves carry the deck element that closes them up.
"""

from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from math import ceil, floor
from typing import Iterable, List, Optional, Sequence, Tuple, Union
import logging

logger = logging.getLogger(__name__)

# An angle (num/den)*pi stored as the rational num/den
RationalAngle = Fraction

# An exact point of the plane, (gamma, theta) in units of pi
Vec = Tuple[Fraction, Fraction]
Segment = Tuple[Vec, Vec]

Number = Union[int, str, Fraction]


def angle(value: Number) -> Fraction:
    """Parse an angle given as int, Fraction or 'p/q' text"""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, float):
        raise TypeError("angles are exact; pass a Fraction or 'p/q' text")
    return Fraction(value)


def vec(gamma: Number, theta: Number) -> Vec:
    return (angle(gamma), angle(theta))


# ============================================================================
# Vector arithmetic
# ============================================================================

def add(u: Vec, v: Vec) -> Vec:
    return (u[0] + v[0], u[1] + v[1])


def sub(u: Vec, v: Vec) -> Vec:
    return (u[0] - v[0], u[1] - v[1])


def scale(c: Fraction, v: Vec) -> Vec:
    return (c * v[0], c * v[1])


def lerp(u: Vec, v: Vec, t: Fraction) -> Vec:
    return (u[0] + t * (v[0] - u[0]), u[1] + t * (v[1] - u[1]))


def cross(u: Vec, v: Vec) -> Fraction:
    return u[0] * v[1] - u[1] * v[0]


def dot(u: Vec, v: Vec) -> Fraction:
    return u[0] * v[0] + u[1] * v[1]


def linf_length(seg: Segment) -> Fraction:
    d = sub(seg[1], seg[0])
    return max(abs(d[0]), abs(d[1]))


def is_lattice(v: Vec) -> bool:
    return v[0].denominator == 1 and v[1].denominator == 1


# ============================================================================
# Pillowcase points
# ============================================================================

@dataclass(frozen=True, order=True)
class PillowPoint:
    """Canonical representative of a point of the pillowcase"""
    gamma: Fraction
    theta: Fraction

    @property
    def is_corner(self) -> bool:
        return self.gamma in (0, 1) and self.theta in (0, 1)

    @property
    def on_edge(self) -> bool:
        return self.gamma in (0, 1)

    def to_vec(self) -> Vec:
        return (self.gamma, self.theta)

    def __str__(self) -> str:
        return f"({self.gamma}, {self.theta})"


def normalize(p: Union[Vec, PillowPoint]) -> PillowPoint:
    """
    Canonical representative: gamma in [0,1], theta in [0,2), and theta folded into
    [0,1] on the edges gamma = 0 and gamma = 1.
    """
    if isinstance(p, PillowPoint):
        p = p.to_vec()
    gamma = Fraction(p[0]) % 2
    theta = Fraction(p[1])
    if gamma > 1:
        gamma, theta = 2 - gamma, -theta
    theta %= 2
    if gamma in (0, 1) and theta > 1:
        theta = 2 - theta
    return PillowPoint(gamma, theta)


CORNERS: Tuple[PillowPoint, ...] = tuple(
    PillowPoint(Fraction(g), Fraction(t)) for g in (0, 1) for t in (0, 1)
)


# ============================================================================
# Deck group
# ============================================================================

@dataclass(frozen=True)
class Deck:
    """Element v -> sign*v + (2a, 2b) of the pillowcase group"""
    sign: int = 1
    a: int = 0
    b: int = 0

    def __post_init__(self):
        if self.sign not in (1, -1):
            raise ValueError(f"deck sign must be +1 or -1, got {self.sign}")

    def apply(self, v: Vec) -> Vec:
        return (self.sign * v[0] + 2 * self.a, self.sign * v[1] + 2 * self.b)

    def compose(self, other: "Deck") -> "Deck":
        """self after other"""
        return Deck(
            self.sign * other.sign,
            self.sign * other.a + self.a,
            self.sign * other.b + self.b,
        )

    def inverse(self) -> "Deck":
        return Deck(self.sign, -self.sign * self.a, -self.sign * self.b)

    def conjugate(self, g: "Deck") -> "Deck":
        """g self g^-1"""
        return g.compose(self).compose(g.inverse())

    @property
    def is_identity(self) -> bool:
        return self.sign == 1 and self.a == 0 and self.b == 0

    def to_list(self) -> List[int]:
        return [self.sign, self.a, self.b]

    @classmethod
    def half_turn(cls, center: Vec) -> "Deck":
        """Point reflection about a lattice point"""
        if not is_lattice(center):
            raise ValueError(f"half turns are centred on lattice points, got {center}")
        return cls(-1, int(center[0]), int(center[1]))

    @classmethod
    def translation(cls, a: int, b: int) -> "Deck":
        return cls(1, a, b)


IDENTITY = Deck()


def deck_between(p: Vec, q: Vec) -> Optional[Deck]:
    """The deck element carrying p to q, or None if they lie in different orbits"""
    for sign in (1, -1):
        d = (q[0] - sign * p[0], q[1] - sign * p[1])
        if d[0].denominator == 1 and d[1].denominator == 1 and d[0] % 2 == 0 and d[1] % 2 == 0:
            return Deck(sign, int(d[0]) // 2, int(d[1]) // 2)
    return None


def decks_near(box: Tuple[Fraction, Fraction, Fraction, Fraction],
               target: Tuple[Fraction, Fraction, Fraction, Fraction],
               translate_theta: bool = True) -> List[Deck]:
    """
    Deck elements g whose image g(box) can meet target. Boxes are
    (gamma_min, gamma_max, theta_min, theta_max).
    """
    decks = []
    for sign in (1, -1):
        g0, g1 = sorted((sign * box[0], sign * box[1]))
        t0, t1 = sorted((sign * box[2], sign * box[3]))
        a_range = range(ceil((target[0] - g1) / 2), floor((target[1] - g0) / 2) + 1)
        if translate_theta:
            b_range = range(ceil((target[2] - t1) / 2), floor((target[3] - t0) / 2) + 1)
        else:
            b_range = range(0, 1)
        for a in a_range:
            for b in b_range:
                decks.append(Deck(sign, a, b))
    return decks


def bbox(points: Iterable[Vec]) -> Tuple[Fraction, Fraction, Fraction, Fraction]:
    pts = list(points)
    gs = [p[0] for p in pts]
    ts = [p[1] for p in pts]
    return (min(gs), max(gs), min(ts), max(ts))


# ============================================================================
# Lifted polylines
# ============================================================================

@dataclass(frozen=True)
class LiftPolyline:
    """
    Piecewise-linear lift of a curve to the plane.

    An open polyline is the lift of an arc. A closed one has an implicit closing edge
    from the last vertex to holonomy(first vertex); its full plane lift is the union
    of the holonomy powers of one period.
    """
    vertices: Tuple[Vec, ...]
    closed: bool = False
    holonomy: Deck = field(default=IDENTITY)

    def __post_init__(self):
        verts = tuple((Fraction(v[0]), Fraction(v[1])) for v in self.vertices)
        object.__setattr__(self, "vertices", verts)
        if self.closed:
            if not verts:
                raise ValueError("closed polyline needs at least one vertex")
        elif len(verts) < 2:
            raise ValueError("open polyline needs at least two vertices")
        if not self.closed and not self.holonomy.is_identity:
            raise ValueError("open polylines have no holonomy")
        for s in self.segments():
            if s[0] == s[1]:
                raise ValueError(f"zero-length edge at {s[0]}")

    @property
    def n_segments(self) -> int:
        return len(self.vertices) if self.closed else len(self.vertices) - 1

    def segment(self, i: int) -> Segment:
        n = len(self.vertices)
        if self.closed and i == n - 1:
            return (self.vertices[-1], self.holonomy.apply(self.vertices[0]))
        return (self.vertices[i], self.vertices[i + 1])

    def segments(self) -> List[Segment]:
        return [self.segment(i) for i in range(self.n_segments)]

    @property
    def endpoints(self) -> Tuple[Vec, Vec]:
        if self.closed:
            raise ValueError("closed polylines have no endpoints")
        return (self.vertices[0], self.vertices[-1])

    def map(self, g: Deck) -> "LiftPolyline":
        """Apply a deck element; the result projects to the same curve"""
        return LiftPolyline(
            tuple(g.apply(v) for v in self.vertices),
            self.closed,
            self.holonomy.conjugate(g) if self.closed else IDENTITY,
        )

    def reversed(self) -> "LiftPolyline":
        if not self.closed:
            return LiftPolyline(tuple(reversed(self.vertices)))
        # Walk backwards from the holonomy image of the first vertex
        h = self.holonomy
        verts = [h.apply(self.vertices[0])] + list(reversed(self.vertices[1:]))
        return LiftPolyline(tuple(verts), True, h.inverse())

    def simplified(self) -> "LiftPolyline":
        """Drop vertices where the curve runs straight on"""
        verts = list(self.vertices)
        if not self.closed:
            out = [verts[0]]
            for i in range(1, len(verts) - 1):
                if not _straight(out[-1], verts[i], verts[i + 1]):
                    out.append(verts[i])
            out.append(verts[-1])
            return LiftPolyline(tuple(out))
        h = self.holonomy
        changed = True
        while changed and len(verts) > 1:
            changed = False
            n = len(verts)
            for i in range(n):
                prev = verts[i - 1] if i > 0 else h.inverse().apply(verts[-1])
                nxt = verts[i + 1] if i < n - 1 else h.apply(verts[0])
                if _straight(prev, verts[i], nxt):
                    del verts[i]
                    changed = True
                    break
        return LiftPolyline(tuple(verts), True, h)

    def bbox(self) -> Tuple[Fraction, Fraction, Fraction, Fraction]:
        pts = list(self.vertices)
        if self.closed:
            pts.append(self.holonomy.apply(self.vertices[0]))
        return bbox(pts)


def _straight(a: Vec, b: Vec, c: Vec) -> bool:
    u, v = sub(b, a), sub(c, b)
    return cross(u, v) == 0 and dot(u, v) > 0


# ============================================================================
# PSL(2,Z) action
# ============================================================================

Matrix = Tuple[Tuple[int, int], Tuple[int, int]]

ROTATE: Matrix = ((0, -1), (1, 0))
MIRROR: Matrix = ((1, 0), (0, -1))


def twist_matrix(n: int) -> Matrix:
    return ((1, 0), (n, 1))


def apply_matrix(m: Matrix, v: Vec) -> Vec:
    return (m[0][0] * v[0] + m[0][1] * v[1], m[1][0] * v[0] + m[1][1] * v[1])


def apply_psl2z(m: Matrix, lift: LiftPolyline) -> LiftPolyline:
    """Vertexwise linear action of a unimodular integer matrix"""
    det = m[0][0] * m[1][1] - m[0][1] * m[1][0]
    if abs(det) != 1 or any(not isinstance(x, int) for row in m for x in row):
        raise ValueError(f"matrix {m} is not unimodular")
    h = lift.holonomy
    t = apply_matrix(m, (Fraction(h.a), Fraction(h.b)))
    holonomy = Deck(h.sign, int(t[0]), int(t[1])) if lift.closed else IDENTITY
    return LiftPolyline(tuple(apply_matrix(m, v) for v in lift.vertices), lift.closed, holonomy)


# ============================================================================
# Shears
# ============================================================================

class ShearDirection(Enum):
    """Coordinate that a shear moves"""
    THETA = "theta"  # (g, t) -> (g, t - 2 s f(g))
    GAMMA = "gamma"  # (g, t) -> (g - 2 s f(t), t)


TENT: Tuple[Tuple[Fraction, Fraction], ...] = (
    (Fraction(0), Fraction(0)),
    (Fraction(1, 2), Fraction(1)),
    (Fraction(1), Fraction(0)),
)


@dataclass(frozen=True)
class ShearSpec:
    """PL shear by an odd 2-periodic profile given on [0,1]"""
    direction: ShearDirection
    t: Fraction
    profile: Tuple[Tuple[Fraction, Fraction], ...] = TENT

    def __post_init__(self):
        pts = tuple((Fraction(x), Fraction(y)) for x, y in self.profile)
        object.__setattr__(self, "profile", pts)
        object.__setattr__(self, "t", Fraction(self.t))
        xs = [x for x, _ in pts]
        if len(pts) < 2 or xs[0] != 0 or xs[-1] != 1:
            raise ValueError("profile breakpoints must start at 0 and end at 1")
        if any(b <= a for a, b in zip(xs, xs[1:])):
            raise ValueError("profile breakpoints must increase")
        if pts[0][1] != 0 or pts[-1][1] != 0:
            raise ValueError("profile must vanish at 0 and 1")

    def value(self, x: Fraction) -> Fraction:
        """Odd 2-periodic extension of the profile"""
        r = Fraction(x) % 2
        if r <= 1:
            return self._interp(r)
        return -self._interp(2 - r)

    def _interp(self, r: Fraction) -> Fraction:
        for (x0, y0), (x1, y1) in zip(self.profile, self.profile[1:]):
            if x0 <= r <= x1:
                return y0 + (y1 - y0) * (r - x0) / (x1 - x0)
        raise ValueError(f"{r} outside [0,1]")

    def breakpoints_between(self, lo: Fraction, hi: Fraction) -> List[Fraction]:
        """Kinks of the extended profile strictly between lo and hi"""
        if lo > hi:
            lo, hi = hi, lo
        found = set()
        for k in range(floor(lo / 2) - 1, ceil(hi / 2) + 2):
            for x, _ in self.profile:
                for b in (2 * k + x, 2 * k - x):
                    if lo < b < hi and self._is_kink(b):
                        found.add(b)
        return sorted(found)

    def _is_kink(self, b: Fraction) -> bool:
        xs = [x for x, _ in self.profile]
        h = min(x1 - x0 for x0, x1 in zip(xs, xs[1:])) / 4
        left = self.value(b) - self.value(b - h)
        right = self.value(b + h) - self.value(b)
        return left != right

    def with_t(self, t: Fraction) -> "ShearSpec":
        return ShearSpec(self.direction, t, self.profile)

    def apply_point(self, v: Vec) -> Vec:
        if self.direction is ShearDirection.THETA:
            return (v[0], v[1] - 2 * self.t * self.value(v[0]))
        return (v[0] - 2 * self.t * self.value(v[1]), v[1])


def shear(lift: LiftPolyline, spec: ShearSpec) -> LiftPolyline:
    """
    Apply a shear. Vertices are inserted where an edge crosses a profile breakpoint,
    so the image is again piecewise linear. The shear commutes with the deck group,
    so the holonomy is unchanged.
    """
    if spec.t == 0:
        return lift
    axis = 0 if spec.direction is ShearDirection.THETA else 1
    refined: List[Vec] = []
    for a, b in lift.segments():
        refined.append(a)
        if a[axis] == b[axis]:
            continue
        for x in spec.breakpoints_between(a[axis], b[axis]):
            refined.append(lerp(a, b, (x - a[axis]) / (b[axis] - a[axis])))
    if not lift.closed:
        refined.append(lift.vertices[-1])
    return LiftPolyline(tuple(spec.apply_point(v) for v in refined), lift.closed, lift.holonomy)


# ============================================================================
# Intersections and polygon predicates
# ============================================================================

@dataclass(frozen=True)
class Crossing:
    """Meeting point of two segments with its parameters on each"""
    point: Vec
    t: Fraction  # parameter on the first segment
    u: Fraction  # parameter on the second segment
    transverse: bool


def crossings(a: Segment, b: Segment) -> List[Crossing]:
    """All meeting points of two segments; overlaps report the overlap ends"""
    p, r = a[0], sub(a[1], a[0])
    q, s = b[0], sub(b[1], b[0])
    denom = cross(r, s)
    qp = sub(q, p)
    if denom == 0:
        if cross(qp, r) != 0:
            return []
        rr = dot(r, r)
        ss = dot(s, s)
        t0 = dot(qp, r) / rr
        t1 = dot(sub(b[1], p), r) / rr
        lo, hi = max(Fraction(0), min(t0, t1)), min(Fraction(1), max(t0, t1))
        if lo > hi:
            return []
        out = []
        for t in ([lo] if lo == hi else [lo, hi]):
            pt = lerp(a[0], a[1], t)
            out.append(Crossing(pt, t, dot(sub(pt, q), s) / ss, False))
        return out
    t = cross(qp, s) / denom
    u = cross(qp, r) / denom
    if not (0 <= t <= 1 and 0 <= u <= 1):
        return []
    return [Crossing(lerp(a[0], a[1], t), t, u, 0 < t < 1 and 0 < u < 1)]


def segment_intersections(a: Segment, b: Segment) -> List[Tuple[Vec, bool]]:
    """Exact intersection points of two segments with their transversality"""
    return [(c.point, c.transverse) for c in crossings(a, b)]


def signed_area(poly: Sequence[Vec]) -> Fraction:
    total = Fraction(0)
    n = len(poly)
    for i in range(n):
        total += cross(poly[i], poly[(i + 1) % n])
    return total / 2


def polygon_is_simple(poly: Sequence[Vec]) -> bool:
    """True if the closed polygon has no self-intersections or backtracking"""
    n = len(poly)
    if n < 3:
        return False
    edges = [(poly[i], poly[(i + 1) % n]) for i in range(n)]
    if any(e[0] == e[1] for e in edges):
        return False
    for i in range(n):
        for j in range(i + 1, n):
            hits = crossings(edges[i], edges[j])
            if not hits:
                continue
            adjacent = j == i + 1 or (i == 0 and j == n - 1)
            if not adjacent:
                return False
            shared = edges[i][1] if j == i + 1 else edges[i][0]
            if len(hits) > 1 or hits[0].point != shared:
                return False
    return True


def winding_number(pt: Vec, poly: Sequence[Vec]) -> int:
    wn = 0
    n = len(poly)
    for i in range(n):
        a, b = poly[i], poly[(i + 1) % n]
        side = cross(sub(b, a), sub(pt, a))
        if a[1] <= pt[1] < b[1] and side > 0:
            wn += 1
        elif b[1] <= pt[1] < a[1] and side < 0:
            wn -= 1
    return wn


def on_boundary(pt: Vec, poly: Sequence[Vec]) -> bool:
    n = len(poly)
    for i in range(n):
        a, b = poly[i], poly[(i + 1) % n]
        if cross(sub(b, a), sub(pt, a)) == 0 and dot(sub(pt, a), sub(pt, b)) <= 0:
            return True
    return False


def point_in_polygon(pt: Vec, poly: Sequence[Vec], boundary: bool = True) -> bool:
    """Nonzero winding, or on an edge when boundary is set"""
    if on_boundary(pt, poly):
        return boundary
    return winding_number(pt, poly) != 0


def lattice_points_inside(poly: Sequence[Vec]) -> List[Vec]:
    """Lattice points (lifts of corners) enclosed by or lying on a polygon"""
    g0, g1, t0, t1 = bbox(poly)
    found = []
    for g in range(ceil(g0), floor(g1) + 1):
        for t in range(ceil(t0), floor(t1) + 1):
            pt = (Fraction(g), Fraction(t))
            if point_in_polygon(pt, poly):
                found.append(pt)
    return found

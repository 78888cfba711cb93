"""
Character Variety Curves - Evaluating Tangle Expressions in the Pillowcase

A tangle expression evaluates to an immersed piecewise-linear multicurve in the
pillowcase. Rational tangles give straight arcs between corners, the PSL(2,Z)
operations act by matrices, and a Conway sum is composed fiber by fiber over the
gamma coordinate: point fibers add theta coordinates (the A-part), while pairs of
edge crossings produce circle fibers. Resolving an internal circle reconnects the
four A-part ends that meet its two singular points crosswise, which is the limit
picture of a small perturbation. The earring modification doubles circles and turns
corner-to-corner arcs into figure-8 curves.
"""

from dataclasses import dataclass, field, replace
from enum import Enum
from fractions import Fraction
from math import floor
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple
import asyncio
import logging

from .config import get_config
from .errors import TangleError, TransversalityError
from .exactgeom import (
    IDENTITY,
    MIRROR,
    ROTATE,
    Deck,
    LiftPolyline,
    PillowPoint,
    ShearDirection,
    ShearSpec,
    Vec,
    add,
    apply_psl2z,
    bbox,
    cross,
    deck_between,
    decks_near,
    dot,
    is_lattice,
    lerp,
    normalize,
    scale,
    shear,
    sub,
    twist_matrix,
)
from .tangle import (
    Earring,
    Hat,
    Mirror,
    Rational,
    Rotate,
    Sheared,
    Slope,
    Sum,
    TangleExpr,
    Twist,
)

logger = logging.getLogger(__name__)


# ============================================================================
# Curve types
# ============================================================================

class ComponentKind(Enum):
    """Topological type of a component"""
    ARC = "arc"        # both ends at corners
    CIRCLE = "circle"  # closed


class Tag(Enum):
    """Provenance of a component"""
    BINARY_DIHEDRAL = "binary_dihedral"  # arc through the corner (0,0)
    H_CIRCLE = "H_circle"                # unresolved circle fiber of a sum
    RESOLVED_ARC = "resolved_arc"        # reconnected at a circle fiber
    EARRING_COPY = "earring_copy"        # offset copy of a circle
    FIGURE_EIGHT = "figure_eight"        # earring image of an arc


EARRING_TAGS = frozenset({Tag.EARRING_COPY, Tag.FIGURE_EIGHT})


@dataclass(frozen=True)
class Component:
    """One component of a multicurve, stored by a lift to the plane"""
    kind: ComponentKind
    lift: LiftPolyline
    tags: FrozenSet[Tag] = frozenset()

    def __post_init__(self):
        if (self.kind is ComponentKind.CIRCLE) != self.lift.closed:
            raise ValueError(f"{self.kind.value} component with closed={self.lift.closed} lift")

    @property
    def endpoint_corners(self) -> Tuple[PillowPoint, ...]:
        if self.kind is ComponentKind.CIRCLE:
            return ()
        return tuple(normalize(v) for v in self.lift.endpoints)

    def with_lift(self, lift: LiftPolyline) -> "Component":
        return Component(self.kind, lift, self.tags)

    def signature(self) -> Tuple:
        """Order- and lift-independent description of the projected curve"""
        return tuple(sorted(_segment_key(s) for s in self.lift.simplified().segments()))


def _segment_key(seg: Tuple[Vec, Vec]) -> Tuple:
    keys = []
    for a, b in (seg, (seg[1], seg[0])):
        p = normalize(a).to_vec()
        g = deck_between(a, p)
        decks = [g, Deck.half_turn(p).compose(g)] if is_lattice(a) else [g]
        keys.extend((p, d.apply(b)) for d in decks)
    return min(keys)


@dataclass(frozen=True)
class EdgeCrossing:
    """Transverse crossing of an edge of the pillowcase by a curve"""
    gamma0: Fraction   # 0 or 1
    theta: Fraction    # in (0, 1)
    component: int
    segment: int


@dataclass(frozen=True)
class FiberEnd:
    """An A-part arc end meeting a singular point of a circle fiber"""
    component: int
    segment: int
    param: Fraction
    endpoint: str  # "min" or "max"
    side: str      # "A+" or "A-"


@dataclass(frozen=True)
class CircleFiber:
    """Circle fiber of a tangle sum over a pair of edge crossings"""
    gamma0: Fraction
    theta1: Fraction
    theta2: Fraction
    theta_min: Fraction
    theta_max: Fraction
    corner_circle: bool
    attached_A_endpoints: Tuple[FiberEnd, ...] = ()

    @classmethod
    def from_crossings(cls, gamma0: Fraction, theta1: Fraction, theta2: Fraction) -> "CircleFiber":
        theta_min = abs(theta1 - theta2)
        theta_max = min(theta1 + theta2, 2 - theta1 - theta2)
        corner = theta1 == theta2 or theta1 == 1 - theta2
        return cls(gamma0, theta1, theta2, theta_min, theta_max, corner)

    @property
    def singular_points(self) -> Tuple[PillowPoint, PillowPoint]:
        return (PillowPoint(self.gamma0, self.theta_min), PillowPoint(self.gamma0, self.theta_max))

    def to_dict(self) -> Dict:
        return {
            "gamma0": str(self.gamma0),
            "theta1": str(self.theta1),
            "theta2": str(self.theta2),
            "theta_min": str(self.theta_min),
            "theta_max": str(self.theta_max),
            "corner_circle": self.corner_circle,
        }


@dataclass(frozen=True)
class Multicurve:
    """
    Immersed multicurve in the pillowcase.

    binary_dihedral_arc is the lift from (0,0) of the unperturbed arc of binary
    dihedral representations. Resolution and earrings reconnect components but leave
    it in place, so the pillowcase slope can be read off any evaluated curve.
    """
    components: Tuple[Component, ...] = ()
    sites: Tuple[CircleFiber, ...] = ()  # circle fibers resolved to produce this curve
    binary_dihedral_arc: Optional[LiftPolyline] = None

    def __post_init__(self):
        object.__setattr__(self, "components", tuple(self.components))
        object.__setattr__(self, "sites", tuple(self.sites))

    @property
    def arcs(self) -> List[Component]:
        return [c for c in self.components if c.kind is ComponentKind.ARC]

    @property
    def circles(self) -> List[Component]:
        return [c for c in self.components if c.kind is ComponentKind.CIRCLE]

    def binary_dihedral(self) -> Optional[Component]:
        """Component through the corner (0,0) carrying the binary dihedral end"""
        for c in self.components:
            if Tag.BINARY_DIHEDRAL in c.tags:
                return c
        return None

    def pillowcase_slope(self) -> Slope:
        """Displacement slope of the binary dihedral arc (None is infinity)"""
        if self.binary_dihedral_arc is None:
            raise TangleError("curve carries no binary dihedral arc")
        start, end = self.binary_dihedral_arc.endpoints
        d = sub(end, start)
        return None if d[0] == 0 else d[1] / d[0]

    def map_lifts(self, fn) -> "Multicurve":
        bd = self.binary_dihedral_arc
        return Multicurve(tuple(c.with_lift(fn(c.lift)) for c in self.components), self.sites,
                          fn(bd) if bd is not None else None)

    def signature(self) -> Tuple:
        return tuple(sorted(c.signature() for c in self.components))

    def summary(self) -> Dict:
        return {
            "components": len(self.components),
            "arcs": len(self.arcs),
            "circles": len(self.circles),
            "resolution_sites": len(self.sites),
        }


@dataclass(frozen=True)
class EvalOptions:
    """Evaluation switches; None means the configured default"""
    resolve: bool = True
    eps: Optional[Fraction] = None
    earring_eps: Optional[Fraction] = None
    shear_schedule: Optional[Tuple[Fraction, ...]] = None

    def resolved(self) -> "EvalOptions":
        config = get_config()
        return EvalOptions(
            self.resolve,
            Fraction(self.eps) if self.eps is not None else config.eps,
            Fraction(self.earring_eps) if self.earring_eps is not None else config.earring_eps,
            self.shear_schedule if self.shear_schedule is not None else config.shear_schedule,
        )


# ============================================================================
# Elementary curves and actions
# ============================================================================

def rational_curve(r: Rational) -> Multicurve:
    """The arc of slope p/q from the corner (0,0)"""
    end = (Fraction(0), Fraction(1)) if r.is_infinity else (Fraction(r.q), Fraction(r.p))
    lift = LiftPolyline(((Fraction(0), Fraction(0)), end))
    arc = Component(ComponentKind.ARC, lift, frozenset({Tag.BINARY_DIHEDRAL}))
    return Multicurve((arc,), (), lift)


def shear_curve(curve: Multicurve, spec: ShearSpec) -> Multicurve:
    return curve.map_lifts(lambda lift: shear(lift, spec))


def vertical_segments(curve: Multicurve) -> List[Tuple[int, int]]:
    found = []
    for ci, comp in enumerate(curve.components):
        for si, (a, b) in enumerate(comp.lift.segments()):
            if a[0] == b[0]:
                found.append((ci, si))
    return found


def edge_crossings(curve: Multicurve) -> List[EdgeCrossing]:
    """Transverse crossings of the edges gamma = 0 and gamma = 1 away from corners"""
    found = []
    for ci, comp in enumerate(curve.components):
        segs = comp.lift.segments()
        for si, (a, b) in enumerate(segs):
            if a[0] == b[0]:
                if a[0].denominator == 1:
                    raise TransversalityError(
                        f"component {ci} segment {si} runs along an edge", component=ci)
                continue
            lo, hi = sorted((a[0], b[0]))
            k = floor(lo) + 1
            while k < hi:
                theta = a[1] + (k - a[0]) * (b[1] - a[1]) / (b[0] - a[0])
                _record_crossing(found, (Fraction(k), theta), ci, si)
                k += 1
            if b[0].denominator != 1:
                continue
            # vertex on an edge line: a crossing only if the next segment continues across
            if is_lattice(b):
                if comp.lift.closed or si != len(segs) - 1:
                    raise TransversalityError(
                        f"component {ci} passes through the corner {normalize(b)}", component=ci)
                continue
            nxt = _next_direction(comp.lift, si)
            if nxt is None:
                raise TransversalityError(
                    f"component {ci} ends at a non-corner edge point {normalize(b)}", component=ci)
            here = b[0] - a[0]
            if (here > 0) != (nxt > 0) or nxt == 0:
                raise TransversalityError(
                    f"component {ci} touches an edge at {normalize(b)} without crossing",
                    component=ci)
            _record_crossing(found, b, ci, si)
    return found


def _next_direction(lift: LiftPolyline, si: int) -> Optional[Fraction]:
    n = lift.n_segments
    if si + 1 < n:
        a, b = lift.segment(si + 1)
        return b[0] - a[0]
    if not lift.closed:
        return None
    a, b = lift.segment(0)
    return lift.holonomy.sign * (b[0] - a[0])


def _record_crossing(found: List[EdgeCrossing], point: Vec, ci: int, si: int) -> None:
    if is_lattice(point):
        raise TransversalityError(f"component {ci} passes through the corner {normalize(point)}",
                                  component=ci)
    p = normalize(point)
    found.append(EdgeCrossing(p.gamma, p.theta, ci, si))


# ============================================================================
# Tangle sums
# ============================================================================

@dataclass
class _Piece:
    """Sum of two straight pieces over a common gamma interval"""
    start: Vec
    end: Vec
    tags: FrozenSet[Tag]
    seed: bool  # starts the binary dihedral arc at (0,0)

    def point(self, which: int) -> Vec:
        return self.start if which == 0 else self.end


def _theta_at(seg: Tuple[Vec, Vec], gamma: Fraction) -> Fraction:
    a, b = seg
    return a[1] + (gamma - a[0]) * (b[1] - a[1]) / (b[0] - a[0])


def _sum_pieces(curve1: Multicurve, curve2: Multicurve) -> List[_Piece]:
    pieces = []
    for c1 in curve1.components:
        for e1 in c1.lift.segments():
            lo1, hi1 = sorted((e1[0][0], e1[1][0]))
            for c2 in curve2.components:
                bd = Tag.BINARY_DIHEDRAL in c1.tags and Tag.BINARY_DIHEDRAL in c2.tags
                for e2 in c2.lift.segments():
                    box = bbox(e2)
                    for g in decks_near(box, (lo1, hi1, box[2], box[3]), translate_theta=False):
                        ge2 = (g.apply(e2[0]), g.apply(e2[1]))
                        lo = max(lo1, min(ge2[0][0], ge2[1][0]))
                        hi = min(hi1, max(ge2[0][0], ge2[1][0]))
                        if lo >= hi:
                            continue
                        start = (lo, _theta_at(e1, lo) + _theta_at(ge2, lo))
                        end = (hi, _theta_at(e1, hi) + _theta_at(ge2, hi))
                        origin = (Fraction(0), Fraction(0))
                        seed = bd and (
                            (start == origin and (lo, _theta_at(e1, lo)) == origin)
                            or (end == origin and (hi, _theta_at(e1, hi)) == origin))
                        pieces.append(_Piece(start, end, frozenset(c1.tags & c2.tags), seed))
    return pieces


def _stitch(pieces: List[_Piece]) -> List[Component]:
    """Join sum pieces that meet at non-corner points into components"""
    groups: Dict[PillowPoint, List[Tuple[int, int]]] = {}
    for i, piece in enumerate(pieces):
        for which in (0, 1):
            key = normalize(piece.point(which))
            if key.is_corner:
                continue
            groups.setdefault(key, []).append((i, which))
    partner: Dict[Tuple[int, int], Tuple[int, int]] = {}
    for key, ends in groups.items():
        if len(ends) != 2:
            raise TransversalityError(
                f"{len(ends)} sum branches meet at {key}; the summands are not in general position")
        partner[ends[0]] = ends[1]
        partner[ends[1]] = ends[0]

    visited = [False] * len(pieces)
    components = []

    def walk(i: int, entry: int) -> Tuple[List[Vec], Optional[Deck], FrozenSet[Tag], bool]:
        frame = IDENTITY
        verts: List[Vec] = []
        tags = None
        seed = False
        first = (i, entry)
        while True:
            visited[i] = True
            piece = pieces[i]
            tags = piece.tags if tags is None else tags & piece.tags
            seed = seed or piece.seed
            verts.append(frame.apply(piece.point(entry)))
            exit_point = frame.apply(piece.point(1 - entry))
            nxt = partner.get((i, 1 - entry))
            if nxt is None:
                verts.append(exit_point)
                return verts, None, tags, seed
            if nxt == first:
                return verts, deck_between(pieces[first[0]].point(first[1]), exit_point), tags, seed
            frame = deck_between(pieces[nxt[0]].point(nxt[1]), exit_point)
            i, entry = nxt

    for i, piece in enumerate(pieces):
        if visited[i]:
            continue
        for which in (0, 1):
            if (i, which) not in partner:
                verts, _, tags, seed = walk(i, which)
                tags = tags | {Tag.BINARY_DIHEDRAL} if seed else tags - {Tag.BINARY_DIHEDRAL}
                lift = LiftPolyline(tuple(verts)).simplified()
                components.append(Component(ComponentKind.ARC, lift, frozenset(tags)))
                break
    for i in range(len(pieces)):
        if visited[i]:
            continue
        verts, holonomy, tags, _ = walk(i, 0)
        lift = LiftPolyline(tuple(verts), True, holonomy).simplified()
        tags = tags - {Tag.BINARY_DIHEDRAL}
        components.append(Component(ComponentKind.CIRCLE, lift, frozenset(tags)))
    return components


def _from_origin(lift: LiftPolyline) -> Optional[LiftPolyline]:
    """The lift placed to start at (0,0), or None if neither end lies over that corner"""
    origin = (Fraction(0), Fraction(0))
    for candidate in (lift, lift.reversed()):
        start = candidate.vertices[0]
        if normalize(start).to_vec() == origin:
            return candidate.map(deck_between(start, origin))
    return None


def binary_dihedral_sum(curve1: Multicurve, curve2: Multicurve) -> Optional[LiftPolyline]:
    """Fiberwise sum of the two binary dihedral arcs, started at (0,0)"""
    if curve1.binary_dihedral_arc is None or curve2.binary_dihedral_arc is None:
        return None
    pieces = _sum_pieces(*(
        Multicurve((Component(ComponentKind.ARC, c.binary_dihedral_arc,
                              frozenset({Tag.BINARY_DIHEDRAL})),))
        for c in (curve1, curve2)
    ))
    try:
        components = _stitch(pieces)
    except TransversalityError as e:
        logger.warning(f"Binary dihedral arcs do not stitch ({e.message}); slope unavailable")
        return None
    for comp in components:
        if Tag.BINARY_DIHEDRAL in comp.tags:
            return _from_origin(comp.lift)
    return None


def _check_summand(curve: Multicurve, name: str) -> None:
    for comp in curve.components:
        if comp.tags & EARRING_TAGS:
            raise TangleError(f"{name} summand carries an earring component")
    vertical = vertical_segments(curve)
    if vertical:
        ci, si = vertical[0]
        raise TransversalityError(
            f"{name} summand has a vertical segment (component {ci}, segment {si}) "
            f"so it is not transverse to the gamma fibers", component=ci, segment=si)


def circle_fibers(curve1: Multicurve, curve2: Multicurve) -> List[CircleFiber]:
    crossings2 = edge_crossings(curve2)
    fibers = []
    for x1 in edge_crossings(curve1):
        for x2 in crossings2:
            if x1.gamma0 == x2.gamma0:
                fibers.append(CircleFiber.from_crossings(x1.gamma0, x1.theta, x2.theta))
    fibers.sort(key=lambda f: (f.gamma0, f.theta1, f.theta2))
    return fibers


def sum_curves(curve1: Multicurve, curve2: Multicurve) -> Tuple[Multicurve, List[CircleFiber]]:
    """
    A-part and circle fibers of the sum of two tangles. Corner circles are reported
    (flagged), not rejected; the A-ends attached to internal circles are located.
    """
    _check_summand(curve1, "left")
    _check_summand(curve2, "right")
    pieces = _sum_pieces(curve1, curve2)
    a_part = Multicurve(tuple(_stitch(pieces)), (), binary_dihedral_sum(curve1, curve2))
    fibers = []
    for fiber in circle_fibers(curve1, curve2):
        if not fiber.corner_circle:
            fiber = replace(fiber, attached_A_endpoints=_attached_ends(a_part, fiber))
        fibers.append(fiber)
    logger.info(
        f"Sum: {len(pieces)} pieces stitched into {len(a_part.components)} A-part components, "
        f"{len(fibers)} circle fibers ({sum(f.corner_circle for f in fibers)} corner)")
    return a_part, fibers


def _locate(curve: Multicurve, target: PillowPoint) -> List[Tuple[int, int, Fraction, Vec]]:
    """Places where the curve passes through a point of the pillowcase"""
    tv = target.to_vec()
    hits = []
    for ci, comp in enumerate(curve.components):
        for si, seg in enumerate(comp.lift.segments()):
            box = bbox(seg)
            for g in decks_near((tv[0], tv[0], tv[1], tv[1]), box):
                p = g.apply(tv)
                d = sub(seg[1], seg[0])
                if cross(d, sub(p, seg[0])) != 0:
                    continue
                param = dot(sub(p, seg[0]), d) / dot(d, d)
                if 0 <= param <= 1:
                    hits.append((ci, si, param, p))
    return hits


def _passage(curve: Multicurve, target: PillowPoint) -> Tuple[int, int, Fraction, Vec]:
    hits = _locate(curve, target)
    if len(hits) != 1 or hits[0][2] in (0, 1):
        raise TransversalityError(
            f"expected one A-part branch through the circle endpoint {target}, found {len(hits)}"
            + (" at a vertex" if hits and hits[0][2] in (0, 1) else ""))
    return hits[0]


def _side(chart: Deck, point: Vec, gamma0: Fraction) -> str:
    g = chart.apply(point)[0]
    front = g > 0 if gamma0 == 0 else g < 1
    return "A+" if front else "A-"


def _attached_ends(a_part: Multicurve, fiber: CircleFiber) -> Tuple[FiberEnd, ...]:
    ends = []
    for label, target in zip(("min", "max"), fiber.singular_points):
        ci, si, param, p = _passage(a_part, target)
        chart = deck_between(p, target.to_vec())
        a, b = a_part.components[ci].lift.segment(si)
        for toward in (a, b):
            ends.append(FiberEnd(ci, si, param, label, _side(chart, lerp(p, toward, Fraction(1, 2)),
                                                              fiber.gamma0)))
    return tuple(ends)


# ============================================================================
# Resolution of circle fibers
# ============================================================================

@dataclass(frozen=True)
class _Cut:
    component: int
    segment: int
    param: Fraction
    point: Vec
    site: int
    label: str   # "min" or "max"
    chart: Deck  # carries point to (gamma0, theta) of the singular point


@dataclass
class _StrandEnd:
    cut: _Cut
    chart: Deck
    side: str = ""


@dataclass
class _Strand:
    points: List[Vec]
    tags: FrozenSet[Tag]
    ends: List[Optional[_StrandEnd]] = field(default_factory=lambda: [None, None])
    seed: bool = False  # holds the binary dihedral end at (0,0)


def _cut_component(comp: Component, cuts: List[_Cut]) -> List[_Strand]:
    lift = comp.lift
    cuts = sorted(cuts, key=lambda c: (c.segment, c.param))
    verts = list(lift.vertices)
    strands = []

    def between(c0: _Cut, c1: _Cut) -> List[Vec]:
        pts = [c0.point]
        pts.extend(verts[c0.segment + 1:c1.segment + 1])
        pts.append(c1.point)
        return pts

    if not lift.closed:
        first = _Strand(verts[:cuts[0].segment + 1] + [cuts[0].point], comp.tags)
        first.ends[1] = _StrandEnd(cuts[0], cuts[0].chart)
        strands.append(first)
    for c0, c1 in zip(cuts, cuts[1:]):
        s = _Strand(between(c0, c1), comp.tags)
        s.ends = [_StrandEnd(c0, c0.chart), _StrandEnd(c1, c1.chart)]
        strands.append(s)
    last = cuts[-1]
    if not lift.closed:
        s = _Strand([last.point] + verts[last.segment + 1:], comp.tags)
        s.ends[0] = _StrandEnd(last, last.chart)
        strands.append(s)
    else:
        h = lift.holonomy
        first = cuts[0]
        pts = [last.point] + verts[last.segment + 1:]
        pts += [h.apply(v) for v in verts[:first.segment + 1]]
        pts.append(h.apply(first.point))
        s = _Strand(pts, comp.tags)
        s.ends = [_StrandEnd(last, last.chart), _StrandEnd(first, first.chart.compose(h.inverse()))]
        strands.append(s)
    if Tag.BINARY_DIHEDRAL in comp.tags and not lift.closed:
        if normalize(verts[0]).to_vec() == (0, 0):
            strands[0].seed = True
        elif normalize(verts[-1]).to_vec() == (0, 0):
            strands[-1].seed = True
    for s in strands:
        s.points = [p for i, p in enumerate(s.points) if i == 0 or p != s.points[i - 1]]
    return strands


def _trim(strand: _Strand, eps: Fraction, gamma0_of: Dict[int, Fraction]) -> None:
    """Pull cut ends back by eps in gamma and record which side of the edge they land on"""
    original = list(strand.points)
    pts = list(original)
    lams = []
    for which in (0, 1):
        end = strand.ends[which]
        if end is None:
            continue
        i, j = (0, 1) if which == 0 else (len(pts) - 1, len(pts) - 2)
        p, q = original[i], original[j]
        lam = min(Fraction(1), eps / abs(q[0] - p[0]))
        pts[i] = lerp(p, q, lam)
        lams.append(lam)
        end.side = _side(end.chart, pts[i], gamma0_of[end.cut.site])
    cleaned = [p for i, p in enumerate(pts) if i == 0 or p != pts[i - 1]]
    if len(cleaned) < 2 or (len(original) == 2 and sum(lams) >= 1):
        raise TransversalityError("resolution offset is larger than an A-part strand",
                                  advice="use a smaller eps")
    strand.points = cleaned


def resolve_circles(a_part: Multicurve, circles: Sequence[CircleFiber],
                    eps: Optional[Fraction] = None) -> Multicurve:
    """
    Reconnect the A-part at every internal circle fiber: the A+ end at one singular
    point is joined to the A- end at the other, twice, by segments that cross near the
    edge. Auxiliary circles are not produced.
    """
    eps = Fraction(eps) if eps is not None else get_config().eps
    for fiber in circles:
        if fiber.corner_circle:
            raise TransversalityError(
                f"corner circle at gamma={fiber.gamma0}, theta=({fiber.theta1}, {fiber.theta2})",
                advice="remove corner circles with a shear first")
    if not circles:
        return Multicurve(a_part.components, a_part.sites, a_part.binary_dihedral_arc)

    cuts: Dict[int, List[_Cut]] = {}
    gamma0_of: Dict[int, Fraction] = {}
    for site, fiber in enumerate(circles):
        gamma0_of[site] = fiber.gamma0
        for label, target in zip(("min", "max"), fiber.singular_points):
            ci, si, param, p = _passage(a_part, target)
            chart = deck_between(p, target.to_vec())
            cuts.setdefault(ci, []).append(_Cut(ci, si, param, p, site, label, chart))

    kept = [c for ci, c in enumerate(a_part.components) if ci not in cuts]
    strands: List[_Strand] = []
    for ci in sorted(cuts):
        strands.extend(_cut_component(a_part.components[ci], cuts[ci]))
    for s in strands:
        _trim(s, eps, gamma0_of)

    # (site, label, side) -> strand end
    by_label: Dict[Tuple[int, str, str], Tuple[int, int]] = {}
    for si, s in enumerate(strands):
        for which in (0, 1):
            end = s.ends[which]
            if end is None:
                continue
            key = (end.cut.site, end.cut.label, end.side)
            if key in by_label:
                raise TransversalityError(f"two A-ends on the same side at site {end.cut.site}")
            by_label[key] = (si, which)
    link: Dict[Tuple[int, int], Tuple[int, int]] = {}
    for site in range(len(circles)):
        for a, b in ((("min", "A+"), ("max", "A-")), (("max", "A+"), ("min", "A-"))):
            ea = by_label[(site,) + a]
            eb = by_label[(site,) + b]
            link[ea] = eb
            link[eb] = ea
        logger.debug(f"Resolved site {site}: {circles[site].to_dict()}")

    components = kept + _assemble(strands, link)
    logger.info(f"Resolved {len(circles)} circle fibers into {len(components)} components")
    return Multicurve(tuple(components), tuple(a_part.sites) + tuple(circles),
                      a_part.binary_dihedral_arc)


def _assemble(strands: List[_Strand], link: Dict[Tuple[int, int], Tuple[int, int]]) -> List[Component]:
    visited = [False] * len(strands)

    def oriented(i: int, entry: int) -> List[Vec]:
        pts = strands[i].points
        return list(pts) if entry == 0 else list(reversed(pts))

    def walk(i: int, entry: int) -> Tuple[List[Vec], Optional[Deck], FrozenSet[Tag], bool]:
        frame = IDENTITY
        verts: List[Vec] = []
        tags: FrozenSet[Tag] = frozenset()
        seed = False
        first = (i, entry)
        while True:
            visited[i] = True
            tags = tags | strands[i].tags
            seed = seed or strands[i].seed
            verts.extend(frame.apply(p) for p in oriented(i, entry))
            out = (i, 1 - entry)
            end = strands[i].ends[1 - entry]
            if end is None:
                return verts, None, tags, seed
            j, f = link[out]
            target = strands[j].ends[f]
            frame = frame.compose(end.chart.inverse()).compose(target.chart)
            if (j, f) == first:
                return verts, frame, tags, seed
            i, entry = j, f

    components = []
    for i, s in enumerate(strands):
        if visited[i]:
            continue
        for which in (0, 1):
            if s.ends[which] is None:
                verts, _, tags, seed = walk(i, which)
                tags = (tags | {Tag.RESOLVED_ARC}) - {Tag.BINARY_DIHEDRAL}
                if seed:
                    tags = tags | {Tag.BINARY_DIHEDRAL}
                lift = LiftPolyline(tuple(verts)).simplified()
                components.append(Component(ComponentKind.ARC, lift, frozenset(tags)))
                break
    for i in range(len(strands)):
        if visited[i]:
            continue
        verts, holonomy, tags, _ = walk(i, 0)
        tags = (tags | {Tag.RESOLVED_ARC}) - {Tag.BINARY_DIHEDRAL}
        lift = LiftPolyline(tuple(verts), True, holonomy).simplified()
        components.append(Component(ComponentKind.CIRCLE, lift, frozenset(tags)))
    return components


def h_circle(fiber: CircleFiber, eps: Fraction) -> Component:
    """Closed curve hugging the image of an unresolved circle fiber"""
    g0 = fiber.gamma0
    lift = LiftPolyline(
        ((g0 + eps, fiber.theta_min), (g0 + eps, fiber.theta_max),
         (g0 - eps, fiber.theta_max), (g0 - eps, fiber.theta_min)),
        closed=True,
    )
    return Component(ComponentKind.CIRCLE, lift, frozenset({Tag.H_CIRCLE}))


# ============================================================================
# Corner circles and good pairs
# ============================================================================

@dataclass(frozen=True)
class GoodPairReport:
    """Conditions for composing two curves by the fiberwise sum"""
    vertical_left: Tuple[Tuple[int, int], ...]
    vertical_right: Tuple[Tuple[int, int], ...]
    corner_circles: Tuple[CircleFiber, ...]
    internal_circles: Tuple[CircleFiber, ...]

    @property
    def is_good(self) -> bool:
        return not (self.vertical_left or self.vertical_right or self.corner_circles)

    def to_dict(self) -> Dict:
        return {
            "good": self.is_good,
            "vertical_left": list(self.vertical_left),
            "vertical_right": list(self.vertical_right),
            "corner_circles": [f.to_dict() for f in self.corner_circles],
            "internal_circles": len(self.internal_circles),
        }


def good_pair_report(curve1: Multicurve, curve2: Multicurve) -> GoodPairReport:
    v1, v2 = tuple(vertical_segments(curve1)), tuple(vertical_segments(curve2))
    fibers = circle_fibers(curve1, curve2)
    return GoodPairReport(
        v1, v2,
        tuple(f for f in fibers if f.corner_circle),
        tuple(f for f in fibers if not f.corner_circle),
    )


def remove_corner_circles(
    curve1: Multicurve,
    curve2: Multicurve,
    schedule: Optional[Iterable[Fraction]] = None,
) -> Tuple[Multicurve, List[ShearSpec]]:
    """
    Shear the first curve (theta, then gamma) by the first parameter of the schedule
    that leaves no corner circles and no vertical segments.
    """
    if not any(f.corner_circle for f in circle_fibers(curve1, curve2)):
        return curve1, []
    for t in (schedule if schedule is not None else get_config().shear_schedule):
        specs = [ShearSpec(ShearDirection.THETA, t), ShearSpec(ShearDirection.GAMMA, t)]
        candidate = curve1
        for spec in specs:
            candidate = shear_curve(candidate, spec)
        try:
            report = good_pair_report(candidate, curve2)
        except TransversalityError as e:
            logger.debug(f"Shear t={t} rejected: {e.message}")
            continue
        if report.is_good:
            logger.info(f"Corner circles removed by shears with t={t}")
            return candidate, specs
        logger.debug(f"Shear t={t} leaves {len(report.corner_circles)} corner circles")
    raise TransversalityError("no shear in the schedule removes the corner circles",
                              advice="extend the shear schedule")


# ============================================================================
# Earring modification
# ============================================================================

def _normal(d: Vec) -> Vec:
    m = max(abs(d[0]), abs(d[1]))
    return (-d[1] / m, d[0] / m)


def _offset_joint(v: Vec, d0: Vec, d1: Vec, n0: Vec, n1: Vec, off: Fraction) -> Vec:
    """Meeting point of the offset lines of two consecutive edges through v"""
    base0 = add(v, scale(off, n0))
    if cross(d0, d1) == 0:
        return base0
    w = sub(add(v, scale(off, n1)), base0)
    lam = cross(w, d1) / cross(d0, d1)
    return add(base0, scale(lam, d0))


def offset_closed(lift: LiftPolyline, off: Fraction) -> LiftPolyline:
    """Parallel copy of a closed lift at signed distance off along the left normal"""
    segs = lift.segments()
    h_inv = lift.holonomy.inverse()
    verts = []
    for i, v in enumerate(lift.vertices):
        if i == 0:
            prev = (h_inv.apply(segs[-1][0]), h_inv.apply(segs[-1][1]))
        else:
            prev = segs[i - 1]
        d0, d1 = sub(prev[1], prev[0]), sub(segs[i][1], segs[i][0])
        verts.append(_offset_joint(v, d0, d1, _normal(d0), _normal(d1), off))
    return LiftPolyline(tuple(verts), True, lift.holonomy)


def figure_eight(lift: LiftPolyline, off: Fraction) -> LiftPolyline:
    """
    Closed lift of the figure-8 around a corner-to-corner arc: two copies at +-off
    that swap sides in the middle segment and pass around both end corners.
    """
    v = list(lift.vertices)
    m = len(v) - 1
    dirs = [sub(v[j + 1], v[j]) for j in range(m)]
    normals = [_normal(d) for d in dirs]

    def joint(j: int, sign: int) -> Vec:
        return _offset_joint(v[j + 1], dirs[j], dirs[j + 1], normals[j], normals[j + 1], sign * off)

    k = (m - 1) // 2
    p1 = lerp(v[k], v[k + 1], Fraction(1, 3))
    p2 = lerp(v[k], v[k + 1], Fraction(2, 3))
    nk = normals[k]
    outward = [joint(j, 1) for j in range(k)]
    outward += [add(p1, scale(off, nk)), sub(p2, scale(off, nk))]
    outward += [joint(j, -1) for j in range(k, m - 1)]
    back = [joint(j, 1) for j in range(m - 2, k - 1, -1)]
    back += [add(p2, scale(off, nk)), sub(p1, scale(off, nk))]
    back += [joint(j, -1) for j in range(k - 1, -1, -1)]
    turn0 = Deck.half_turn(v[0])
    turn1 = Deck.half_turn(v[-1])
    verts = outward + [turn1.apply(p) for p in back]
    return LiftPolyline(tuple(verts), True, turn1.compose(turn0))


def earring(curve: Multicurve, earring_eps: Optional[Fraction] = None) -> Multicurve:
    """Double every circle and turn every corner-to-corner arc into a figure-8"""
    off = Fraction(earring_eps) if earring_eps is not None else get_config().earring_eps
    components = []
    for ci, comp in enumerate(curve.components):
        if comp.kind is ComponentKind.CIRCLE:
            for sign in (1, -1):
                components.append(Component(
                    ComponentKind.CIRCLE,
                    offset_closed(comp.lift, sign * off).simplified(),
                    comp.tags | {Tag.EARRING_COPY},
                ))
            continue
        start, end = comp.lift.endpoints
        if not (is_lattice(start) and is_lattice(end)):
            raise TangleError(f"earring needs corner-to-corner arcs; component {ci} ends at "
                              f"{normalize(start)} and {normalize(end)}")
        components.append(Component(
            ComponentKind.CIRCLE,
            figure_eight(comp.lift, off),
            (comp.tags - {Tag.BINARY_DIHEDRAL}) | {Tag.FIGURE_EIGHT},
        ))
    logger.info(f"Earring: {len(curve.components)} components -> {len(components)}")
    return Multicurve(tuple(components), curve.sites, curve.binary_dihedral_arc)


# ============================================================================
# Evaluation
# ============================================================================

def _matrix_for(e: TangleExpr):
    if isinstance(e, Rotate):
        return ROTATE
    if isinstance(e, Twist):
        return twist_matrix(e.n)
    return MIRROR


def _sum_once(left: Multicurve, right: Multicurve, opts: EvalOptions) -> Multicurve:
    if not (vertical_segments(left) or vertical_segments(right)):
        if any(f.corner_circle for f in circle_fibers(left, right)):
            logger.warning("Sum has corner circles; shearing the left summand")
            left, _ = remove_corner_circles(left, right, opts.shear_schedule)
    a_part, fibers = sum_curves(left, right)
    if opts.resolve:
        return resolve_circles(a_part, fibers, opts.eps)
    return Multicurve(a_part.components + tuple(h_circle(f, opts.eps) for f in fibers), (),
                      a_part.binary_dihedral_arc)


def _sum_after_shear(left: Multicurve, right: Multicurve, opts: EvalOptions,
                     error: TransversalityError) -> Multicurve:
    logger.warning(f"Sum not in general position ({error.message}); shearing the left summand")
    for t in opts.shear_schedule:
        candidate = left
        for spec in (ShearSpec(ShearDirection.THETA, t), ShearSpec(ShearDirection.GAMMA, t)):
            candidate = shear_curve(candidate, spec)
        try:
            result = _sum_once(candidate, right, opts)
        except TransversalityError as e:
            logger.debug(f"Shear t={t} rejected: {e.message}")
            continue
        logger.info(f"Summed after shearing the left summand with t={t}")
        return result
    raise error


def _combine_sum(left: Multicurve, right: Multicurve, opts: EvalOptions) -> Multicurve:
    """
    Sum of two evaluated curves. A resolved summand can have a double point on an
    edge, where sum branches meet four at a time; it is then sheared off the edge.
    """
    bd = binary_dihedral_sum(left, right)
    try:
        result = _sum_once(left, right, opts)
    except TransversalityError as e:
        if vertical_segments(left) or vertical_segments(right):
            raise
        result = _sum_after_shear(left, right, opts, e)
    return replace(result, binary_dihedral_arc=bd)


def evaluate(e: TangleExpr, opts: Optional[EvalOptions] = None) -> Multicurve:
    """Pillowcase image of a tangle expression"""
    opts = (opts or EvalOptions()).resolved()
    if isinstance(e, Rational):
        return rational_curve(e)
    if isinstance(e, Sum):
        return _combine_sum(evaluate(e.left, opts), evaluate(e.right, opts), opts)
    if isinstance(e, Earring):
        return earring(evaluate(e.inner, opts), opts.earring_eps)
    if isinstance(e, Sheared):
        return shear_curve(evaluate(e.inner, opts), e.spec)
    if isinstance(e, (Rotate, Twist, Mirror, Hat)):
        m = _matrix_for(e)
        return evaluate(e.inner, opts).map_lifts(lambda lift: apply_psl2z(m, lift))
    raise TangleError(f"unknown tangle node {type(e).__name__}")


async def evaluate_async(e: TangleExpr, opts: Optional[EvalOptions] = None) -> Multicurve:
    """Same as evaluate, with the two sides of every sum computed concurrently"""
    opts = (opts or EvalOptions()).resolved()
    if isinstance(e, Sum):
        left, right = await asyncio.gather(evaluate_async(e.left, opts),
                                           evaluate_async(e.right, opts))
        return await asyncio.to_thread(_combine_sum, left, right, opts)
    return await asyncio.to_thread(evaluate, e, opts)

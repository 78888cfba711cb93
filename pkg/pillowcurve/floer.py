"""
Lagrangian Floer Chain Data - Generators, Immersed Polygons and Rank over F2

Generators are the transverse intersection points of two multicurves in the
pillowcase. The differential counts immersed bigons mod 2, and a bounding cochain
given by one self-intersection point adds the immersed triangles with a corner at
that point. Polygons are searched in the plane: from a generator, one walk follows
each curve away from the corner, and a candidate polygon closes where the walks meet.

Polygons are traversed counterclockwise with the first curve leaving the source
generator, so d(x) contains y when the boundary runs along L1 from x to y and back
along L2 from y to x. Accepted polygons are embedded in the plane, have convex
corners, and contain no lattice point (lifts of the corners of the pillowcase).
"""

from dataclasses import dataclass, field
from fractions import Fraction
from math import ceil, floor
from typing import Dict, List, Optional, Sequence, Tuple
import asyncio
import logging

import numpy as np

from .charvar import Component, Multicurve, shear_curve
from .config import get_config
from .errors import BudgetExceeded, ChainComplexError, TransversalityError
from .exactgeom import (
    IDENTITY,
    Deck,
    PillowPoint,
    ShearDirection,
    ShearSpec,
    Vec,
    bbox,
    cross,
    crossings,
    decks_near,
    dot,
    is_lattice,
    lattice_points_inside,
    lerp,
    linf_length,
    normalize,
    polygon_is_simple,
    signed_area,
    sub,
)

logger = logging.getLogger(__name__)


# ============================================================================
# Chain data types
# ============================================================================

@dataclass(frozen=True)
class Branch:
    """Sheet of a curve: segment `segment` of component `component`, placed by `frame`"""
    component: int
    segment: int
    frame: Deck = IDENTITY


@dataclass(frozen=True)
class Generator:
    """Transverse intersection point of L1 and L2"""
    index: int
    point: PillowPoint
    lift: Vec       # in the coordinates of L1's stored lift
    first: Branch   # L1 sheet through lift
    second: Branch  # L2 sheet through lift

    def to_dict(self) -> Dict:
        return {
            "index": self.index,
            "point": [str(self.point.gamma), str(self.point.theta)],
            "components": [self.first.component, self.second.component],
        }


@dataclass(frozen=True)
class SelfIntersection:
    """Transverse double point of one curve, usable as a bounding cochain"""
    index: int
    curve: int  # 1 or 2
    point: PillowPoint
    branches: Tuple[Branch, Branch]


@dataclass(frozen=True)
class Bigon:
    source: int
    target: int
    boundary: Tuple[Vec, ...]

    def to_dict(self) -> Dict:
        return {
            "source": self.source,
            "target": self.target,
            "boundary": [[str(g), str(t)] for g, t in self.boundary],
        }


@dataclass(frozen=True)
class Triangle:
    source: int
    target: int
    cochain: int
    boundary: Tuple[Vec, ...]

    def to_dict(self) -> Dict:
        return {
            "source": self.source,
            "target": self.target,
            "cochain": self.cochain,
            "boundary": [[str(g), str(t)] for g, t in self.boundary],
        }


@dataclass
class ChainData:
    """Generators and the F2 differential d[target, source]"""
    generators: List[Generator]
    differential: np.ndarray
    bigons: List[Bigon] = field(default_factory=list)
    triangles: List[Triangle] = field(default_factory=list)
    cochain: Optional[int] = None
    shears: List[ShearSpec] = field(default_factory=list)

    @property
    def n_differentials(self) -> int:
        return int(self.differential.sum())

    @property
    def rank(self) -> int:
        return homology_rank(self)

    def summary(self) -> str:
        return (f"generators: {len(self.generators)}, differentials: {self.n_differentials}, "
                f"rank: {self.rank}")

    def to_dict(self) -> Dict:
        return {
            "generators": [g.to_dict() for g in self.generators],
            "differential": self.differential.tolist(),
            "bigons": [b.to_dict() for b in self.bigons],
            "triangles": [t.to_dict() for t in self.triangles],
            "cochain": self.cochain,
            "rank": self.rank,
        }


# ============================================================================
# Intersections
# ============================================================================

def _placed(comp: Component, branch: Branch) -> Tuple[Vec, Vec]:
    a, b = comp.lift.segment(branch.segment)
    return branch.frame.apply(a), branch.frame.apply(b)


def _direction(comp: Component, branch: Branch) -> Vec:
    a, b = _placed(comp, branch)
    return sub(b, a)


def intersect(curve1: Multicurve, curve2: Multicurve) -> List[Generator]:
    """Transverse intersection points, sorted by pillowcase point then components"""
    found: Dict[PillowPoint, Tuple[Vec, Branch, Branch]] = {}
    for c1, comp1 in enumerate(curve1.components):
        for s1, e1 in enumerate(comp1.lift.segments()):
            for c2, comp2 in enumerate(curve2.components):
                for s2, e2 in enumerate(comp2.lift.segments()):
                    for g in decks_near(bbox(e2), bbox(e1)):
                        ge2 = (g.apply(e2[0]), g.apply(e2[1]))
                        hits = crossings(e1, ge2)
                        if len(hits) == 2:
                            # collinear with positive overlap, even between corners
                            a, b = (normalize(c.point) for c in hits)
                            raise TransversalityError(
                                f"curves overlap along a segment from {a} to {b}",
                                point=str(a))
                        for c in hits:
                            if is_lattice(c.point):
                                if c.t in (0, 1) and c.u in (0, 1):
                                    continue  # arcs sharing an end corner
                                raise TransversalityError(
                                    f"curves meet at the corner {normalize(c.point)}")
                            p = normalize(c.point)
                            if not c.transverse:
                                raise TransversalityError(
                                    f"curves meet non-transversally at {p}", point=str(p))
                            if p in found:
                                raise TransversalityError(f"more than two branches meet at {p}",
                                                          point=str(p))
                            found[p] = (c.point, Branch(c1, s1), Branch(c2, s2, g))
    order = sorted(found, key=lambda p: (p, found[p][1].component, found[p][2].component))
    gens = [Generator(i, p, *found[p]) for i, p in enumerate(order)]
    logger.info(f"Found {len(gens)} generators")
    return gens


def _adjacent(comp: Component, sa: int, sb: int, g: Deck) -> bool:
    lift = comp.lift
    n = lift.n_segments
    if g.is_identity and abs(sa - sb) == 1:
        return True
    return lift.closed and {sa, sb} == {0, n - 1} and g in (lift.holonomy, lift.holonomy.inverse())


def self_intersections(curve: Multicurve, curve_id: int = 1) -> List[SelfIntersection]:
    """Transverse double points of a multicurve, one per pillowcase point"""
    segs = [(ci, si, seg) for ci, comp in enumerate(curve.components)
            for si, seg in enumerate(comp.lift.segments())]
    found: Dict[PillowPoint, Tuple[Branch, Branch]] = {}
    for ia, (ca, sa, ea) in enumerate(segs):
        for ib in range(ia, len(segs)):
            cb, sb, eb = segs[ib]
            for g in decks_near(bbox(eb), bbox(ea)):
                if ia == ib and g.is_identity:
                    continue
                geb = (g.apply(eb[0]), g.apply(eb[1]))
                for c in crossings(ea, geb):
                    if is_lattice(c.point):
                        continue
                    if not c.transverse:
                        if ca == cb and _adjacent(curve.components[ca], sa, sb, g):
                            continue
                        raise TransversalityError(
                            f"curve {curve_id} meets itself non-transversally at "
                            f"{normalize(c.point)}")
                    p = normalize(c.point)
                    if p not in found:
                        found[p] = (Branch(ca, sa), Branch(cb, sb, g))
    points = sorted(found)
    return [SelfIntersection(i, curve_id, p, found[p]) for i, p in enumerate(points)]


def cochain_candidates(curve1: Multicurve, curve2: Multicurve) -> List[SelfIntersection]:
    """Self-intersections of L1 followed by those of L2; cochain indices refer to this list"""
    first = self_intersections(curve1, 1)
    second = self_intersections(curve2, 2)
    return first + [SelfIntersection(len(first) + s.index, 2, s.point, s.branches) for s in second]


def _branches_through(curve: Multicurve, point: Vec) -> List[Tuple[Component, Branch]]:
    found = []
    for ci, comp in enumerate(curve.components):
        for si, seg in enumerate(comp.lift.segments()):
            for g in decks_near(bbox(seg), (point[0], point[0], point[1], point[1])):
                a, b = g.apply(seg[0]), g.apply(seg[1])
                d = sub(b, a)
                if cross(d, sub(point, a)) != 0:
                    continue
                param = dot(sub(point, a), d) / dot(d, d)
                if 0 < param < 1:
                    found.append((comp, Branch(ci, si, g)))
    return found


# ============================================================================
# Walks
# ============================================================================

@dataclass
class _Walk:
    points: List[Vec]
    truncated: bool

    def direction_at(self, pos: Fraction) -> Vec:
        """Direction of the edge arriving at position pos"""
        i = min(max(0, ceil(pos) - 1), len(self.points) - 2)
        return sub(self.points[i + 1], self.points[i])

    def prefix(self, pos: Fraction) -> List[Vec]:
        i = floor(pos)
        pts = self.points[:i + 1]
        if pos != i:
            pts = pts + [lerp(self.points[i], self.points[i + 1], pos - i)]
        return pts


def _walk(comp: Component, branch: Branch, start: Vec, forward: bool, budget: Fraction) -> _Walk:
    """
    Follow a sheet from start until the arc ends at a corner, a plane-closed curve
    returns to start, or the L-infinity length reaches the budget.
    """
    lift = comp.lift
    n, h = lift.n_segments, lift.holonomy
    i, frame = branch.segment, branch.frame
    pts = [start]
    length = Fraction(0)
    steps = 0
    while True:
        a, b = frame.apply(lift.segment(i)[0]), frame.apply(lift.segment(i)[1])
        if steps > 0 and lift.closed and h.is_identity and (i, frame) == (branch.segment, branch.frame):
            if start != pts[-1]:
                pts.append(start)
            return _Walk(pts, False)
        target = b if forward else a
        step = linf_length((pts[-1], target))
        if step > 0:
            if length + step >= budget:
                pts.append(lerp(pts[-1], target, (budget - length) / step))
                return _Walk(pts, True)
            pts.append(target)
            length += step
        steps += 1
        if forward:
            i += 1
            if i == n:
                if not lift.closed:
                    return _Walk(pts, False)
                i, frame = 0, frame.compose(h)
        else:
            i -= 1
            if i < 0:
                if not lift.closed:
                    return _Walk(pts, False)
                i, frame = n - 1, frame.compose(h.inverse())


def _meetings(p: _Walk, q: _Walk) -> List[Tuple[Fraction, Fraction, Vec]]:
    """Meeting points of two walks by position along each, excluding their common start"""
    hits = set()
    for i in range(len(p.points) - 1):
        for j in range(len(q.points) - 1):
            for c in crossings((p.points[i], p.points[i + 1]), (q.points[j], q.points[j + 1])):
                pos_p, pos_q = i + c.t, j + c.u
                if pos_p == 0 and pos_q == 0:
                    continue
                hits.add((pos_p, pos_q, c.point))
    return sorted(hits)


def _pareto(hits: List[Tuple[Fraction, Fraction, Vec]]) -> List[Tuple[Fraction, Fraction, Vec]]:
    return [h for h in hits
            if not any(o[0] <= h[0] and o[1] <= h[1] and (o[0], o[1]) != (h[0], h[1]) for o in hits)]


def _acceptable(poly: List[Vec]) -> bool:
    return (len(poly) >= 3 and signed_area(poly) > 0 and polygon_is_simple(poly)
            and not lattice_points_inside(poly))


def _wedges(comp1: Component, b1: Branch, comp2: Component, b2: Branch):
    """Direction pairs (u1, u2) at a generator bounding a convex counterclockwise corner"""
    d1, d2 = _direction(comp1, b1), _direction(comp2, b2)
    for f1 in (True, False):
        u1 = d1 if f1 else (-d1[0], -d1[1])
        for f2 in (True, False):
            u2 = d2 if f2 else (-d2[0], -d2[1])
            if cross(u1, u2) > 0:
                yield f1, f2


# ============================================================================
# Bigons and triangles
# ============================================================================

def _resolve_budget(budget: Optional[Fraction]) -> Fraction:
    return Fraction(budget if budget is not None else get_config().budget)


def _path_length(pts: Sequence[Vec]) -> Fraction:
    return sum((linf_length(s) for s in zip(pts, pts[1:])), Fraction(0))


def _differential(n: int, polygons: Sequence) -> np.ndarray:
    """F2 matrix d[target, source] of a list of bigons or triangles"""
    d = np.zeros((n, n), dtype=np.uint8)
    for p in polygons:
        d[p.target, p.source] ^= 1
    return d


def _overrun(x: Generator, budget: Fraction, kind: str) -> BudgetExceeded:
    return BudgetExceeded(
        f"a {kind} from generator {x.index} has a side longer than the path budget {budget}",
        generator=x.index, budget=str(budget))


def _bigons_from(curve1: Multicurve, curve2: Multicurve, x: Generator,
                 by_point: Dict[PillowPoint, int], budget: Fraction) -> List[Bigon]:
    """
    Bigons leaving generator x. Walks run to twice the budget, so a polygon that
    closes past the budget is seen and reported instead of being dropped.
    """
    comp1 = curve1.components[x.first.component]
    comp2 = curve2.components[x.second.component]
    reach = 2 * budget
    found = []
    for f1, f2 in _wedges(comp1, x.first, comp2, x.second):
        p1 = _walk(comp1, x.first, x.lift, f1, reach)
        p2 = _walk(comp2, x.second, x.lift, f2, reach)
        hits = _meetings(p1, p2)
        for pos1, pos2, y_lift in _pareto(hits):
            if cross(p1.direction_at(pos1), p2.direction_at(pos2)) >= 0:
                continue
            a, b = p1.prefix(pos1), p2.prefix(pos2)
            poly = a + b[-2:0:-1]
            if not _acceptable(poly):
                continue
            y = by_point.get(normalize(y_lift))
            if y is None:
                continue
            if _path_length(a) > budget or _path_length(b) > budget:
                raise _overrun(x, budget, "bigon")
            found.append(Bigon(x.index, y, tuple(poly)))
            logger.debug(f"Bigon {x.index} -> {y} with {len(poly)} vertices")
        if not hits and p1.truncated and p2.truncated:
            open_region = p1.points + p2.points[-1:0:-1]
            if _acceptable(open_region) or _acceptable(open_region[::-1]):
                raise BudgetExceeded(
                    f"polygon search from generator {x.index} reached the path budget {budget}",
                    generator=x.index, budget=str(budget))
    return found


def count_bigons(curve1: Multicurve, curve2: Multicurve, gens: Sequence[Generator],
                 budget: Optional[Fraction] = None) -> Tuple[np.ndarray, List[Bigon]]:
    """F2 bigon differential d[target, source] and the accepted bigons"""
    budget = _resolve_budget(budget)
    by_point = {g.point: g.index for g in gens}
    bigons = [b for x in gens for b in _bigons_from(curve1, curve2, x, by_point, budget)]
    logger.info(f"Counted {len(bigons)} bigons")
    return _differential(len(gens), bigons), bigons


def _cochain_point(curve1: Multicurve, curve2: Multicurve, cochain: int) -> SelfIntersection:
    candidates = cochain_candidates(curve1, curve2)
    if not 0 <= cochain < len(candidates):
        raise ChainComplexError(
            f"cochain index {cochain} out of range; there are {len(candidates)} self-intersections")
    return candidates[cochain]


def _triangles_from(curve1: Multicurve, curve2: Multicurve, x: Generator, b: SelfIntersection,
                    cochain: int, by_point: Dict[PillowPoint, int],
                    budget: Fraction) -> List[Triangle]:
    comp1 = curve1.components[x.first.component]
    comp2 = curve2.components[x.second.component]
    reach = 2 * budget
    found = []
    for f1, f2 in _wedges(comp1, x.first, comp2, x.second):
        p1 = _walk(comp1, x.first, x.lift, f1, reach)
        p2 = _walk(comp2, x.second, x.lift, f2, reach)
        if b.curve == 2:
            candidates = _triangles_via_second(curve2, b, p1, p2, reach)
        else:
            candidates = _triangles_via_first(curve1, b, p1, p2, reach)
        for poly, y_lift, sides in candidates:
            y = by_point.get(normalize(y_lift))
            if y is None:
                continue
            if any(_path_length(side) > budget for side in sides):
                raise _overrun(x, budget, "triangle")
            found.append(Triangle(x.index, y, cochain, tuple(poly)))
            logger.debug(f"Triangle {x.index} -> {y} through cochain {cochain}")
    return found


def count_triangles_with_cochain(curve1: Multicurve, curve2: Multicurve,
                                 gens: Sequence[Generator], cochain: int,
                                 budget: Optional[Fraction] = None
                                 ) -> Tuple[np.ndarray, List[Triangle]]:
    """Triangle contributions to the differential deformed by one self-intersection"""
    budget = _resolve_budget(budget)
    b = _cochain_point(curve1, curve2, cochain)
    by_point = {g.point: g.index for g in gens}
    triangles = [t for x in gens
                 for t in _triangles_from(curve1, curve2, x, b, cochain, by_point, budget)]
    logger.info(f"Counted {len(triangles)} triangles with cochain {cochain}")
    return _differential(len(gens), triangles), triangles


def _cochain_lifts(walk: _Walk, b: SelfIntersection) -> List[Tuple[Fraction, Vec]]:
    target = b.point.to_vec()
    out = set()
    for i in range(len(walk.points) - 1):
        seg = (walk.points[i], walk.points[i + 1])
        for g in decks_near((target[0], target[0], target[1], target[1]), bbox(seg)):
            p = g.apply(target)
            d = sub(seg[1], seg[0])
            if cross(d, sub(p, seg[0])) != 0:
                continue
            param = dot(sub(p, seg[0]), d) / dot(d, d)
            if 0 <= param <= 1 and i + param > 0:
                out.add((i + param, p))
    return sorted(out)


def _turn_walk(curve: Multicurve, at: Vec, arriving: Vec, left_of: bool,
               budget: Fraction) -> Optional[_Walk]:
    """Walk along the other sheet through a double point, leaving on the convex side"""
    for comp, branch in _branches_through(curve, at):
        d = _direction(comp, branch)
        if cross(d, arriving) == 0:
            continue
        forward = (cross(arriving, d) > 0) == left_of
        return _walk(comp, branch, at, forward, budget)
    return None


def _triangles_via_second(curve2: Multicurve, b: SelfIntersection, p1: _Walk, p2: _Walk,
                          budget: Fraction) -> List[Tuple[List[Vec], Vec, Tuple]]:
    # x -L1-> y -L2-> b -L2-> x
    found = []
    for pos_b, b_lift in _cochain_lifts(p2, b):
        w2 = p2.direction_at(pos_b)
        # leaving b along reversed p2 must be a left turn from reversed p3: cross(v3, w2) > 0
        p3 = _turn_walk(curve2, b_lift, w2, False, budget)
        if p3 is None:
            continue
        for pos1, pos3, y_lift in _pareto(_meetings(p1, p3)):
            if pos3 == 0 or cross(p1.direction_at(pos1), p3.direction_at(pos3)) >= 0:
                continue
            a, c, e = p1.prefix(pos1), p3.prefix(pos3), p2.prefix(pos_b)
            poly = a + c[-2::-1] + e[-2:0:-1]
            if _acceptable(poly):
                found.append((poly, y_lift, (a, c, e)))
    return found


def _triangles_via_first(curve1: Multicurve, b: SelfIntersection, p1: _Walk, p2: _Walk,
                         budget: Fraction) -> List[Tuple[List[Vec], Vec, Tuple]]:
    # x -L1-> b -L1-> y -L2-> x
    found = []
    for pos_b, b_lift in _cochain_lifts(p1, b):
        w1 = p1.direction_at(pos_b)
        p3 = _turn_walk(curve1, b_lift, w1, True, budget)
        if p3 is None:
            continue
        for pos3, pos2, y_lift in _pareto(_meetings(p3, p2)):
            if pos3 == 0 or cross(p3.direction_at(pos3), p2.direction_at(pos2)) >= 0:
                continue
            a, c, e = p1.prefix(pos_b), p3.prefix(pos3), p2.prefix(pos2)
            poly = a + c[1:] + e[-2:0:-1]
            if _acceptable(poly):
                found.append((poly, y_lift, (a, c, e)))
    return found


# ============================================================================
# Homology
# ============================================================================

def f2_rank(matrix: np.ndarray) -> int:
    """Rank over F2 by row reduction"""
    a = (np.array(matrix, dtype=np.uint8) & 1).copy()
    if a.size == 0:
        return 0
    rows, cols = a.shape
    r = 0
    for j in range(cols):
        pivots = np.nonzero(a[r:, j])[0]
        if len(pivots) == 0:
            continue
        i = r + pivots[0]
        a[[r, i]] = a[[i, r]]
        for k in range(rows):
            if k != r and a[k, j]:
                a[k] ^= a[r]
        r += 1
        if r == rows:
            break
    return r


def f2_square(matrix: np.ndarray) -> np.ndarray:
    return (matrix.astype(np.int64) @ matrix.astype(np.int64)) % 2


def homology_rank(c: ChainData) -> int:
    """#generators - 2 rank(d) over F2"""
    return len(c.generators) - 2 * f2_rank(c.differential)


def _transverse_shear(curve1: Multicurve, curve2: Multicurve
                      ) -> Tuple[Multicurve, List[ShearSpec]]:
    try:
        intersect(curve1, curve2)
        return curve1, []
    except TransversalityError as e:
        logger.warning(f"Curves not transverse ({e.message}); searching for a shear")
    for t in get_config().shear_schedule:
        specs = [ShearSpec(ShearDirection.THETA, t), ShearSpec(ShearDirection.GAMMA, t)]
        candidate = curve1
        for spec in specs:
            candidate = shear_curve(candidate, spec)
        try:
            intersect(candidate, curve2)
        except TransversalityError:
            continue
        logger.info(f"Sheared the first curve with t={t}")
        return candidate, specs
    raise TransversalityError("no shear in the schedule makes the curves transverse")


def _assemble_chain(gens: List[Generator], bigons: List[Bigon], triangles: List[Triangle],
                    cochain: Optional[int], shears: List[ShearSpec]) -> ChainData:
    d = _differential(len(gens), bigons)
    if f2_square(d).any():
        raise ChainComplexError("bigon differential does not square to zero")
    if cochain is not None:
        d = d ^ _differential(len(gens), triangles)
        if f2_square(d).any():
            raise ChainComplexError(f"self-intersection {cochain} is not a bounding cochain: "
                                    f"the deformed differential does not square to zero")
    data = ChainData(gens, d, bigons, triangles, cochain, shears)
    logger.info(f"Chain complex: {data.summary()}")
    return data


def chain_complex(curve1: Multicurve, curve2: Multicurve, cochain: Optional[int] = None,
                  budget: Optional[Fraction] = None, auto_shear: bool = False) -> ChainData:
    """Generators, differential (deformed by a cochain if given) and rank"""
    shears: List[ShearSpec] = []
    if auto_shear:
        curve1, shears = _transverse_shear(curve1, curve2)
    gens = intersect(curve1, curve2)
    _, bigons = count_bigons(curve1, curve2, gens, budget)
    triangles: List[Triangle] = []
    if cochain is not None:
        _, triangles = count_triangles_with_cochain(curve1, curve2, gens, cochain, budget)
    return _assemble_chain(gens, bigons, triangles, cochain, shears)


async def chain_complex_async(curve1: Multicurve, curve2: Multicurve,
                              cochain: Optional[int] = None,
                              budget: Optional[Fraction] = None,
                              auto_shear: bool = False) -> ChainData:
    """Same as chain_complex, with the polygon searches from each generator run concurrently"""
    shears: List[ShearSpec] = []
    if auto_shear:
        curve1, shears = await asyncio.to_thread(_transverse_shear, curve1, curve2)
    gens = await asyncio.to_thread(intersect, curve1, curve2)
    budget = _resolve_budget(budget)
    by_point = {g.point: g.index for g in gens}

    groups = await asyncio.gather(*(
        asyncio.to_thread(_bigons_from, curve1, curve2, x, by_point, budget) for x in gens
    ))
    bigons = [b for group in groups for b in group]

    triangles: List[Triangle] = []
    if cochain is not None:
        b = _cochain_point(curve1, curve2, cochain)
        groups = await asyncio.gather(*(
            asyncio.to_thread(_triangles_from, curve1, curve2, x, b, cochain, by_point, budget)
            for x in gens
        ))
        triangles = [t for group in groups for t in group]
    logger.debug(f"Searched {len(gens)} generators concurrently")
    return _assemble_chain(gens, bigons, triangles, cochain, shears)

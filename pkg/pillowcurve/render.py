"""
Render - SVG Drawings of Multicurves

Each segment of a lift is cut where it crosses the lines gamma in Z or theta in 2Z and
every piece is moved into the fundamental domain [0, pi] x [0, 2pi] by a deck
transformation. Output is deterministic for identical input.
"""

from fractions import Fraction
from math import ceil, floor
from typing import Dict, List, Optional, Sequence, Tuple
import logging
import xml.etree.ElementTree as ET

from .charvar import Component, Multicurve, Tag
from .exactgeom import Segment, Vec, deck_between, lerp, normalize

logger = logging.getLogger(__name__)

SCALE = 240      # pixels per pi
MARGIN = 24
CORNER_RADIUS = 4

TAG_COLORS: Dict[Tag, str] = {
    Tag.BINARY_DIHEDRAL: "#d62728",
    Tag.H_CIRCLE: "#9467bd",
    Tag.RESOLVED_ARC: "#2ca02c",
    Tag.EARRING_COPY: "#ff7f0e",
    Tag.FIGURE_EIGHT: "#8c564b",
}
# untagged components, one color per drawn curve
CURVE_COLORS = ("#1f77b4", "#17becf", "#7f7f7f", "#bcbd22")
TAG_ORDER = tuple(TAG_COLORS)


def _cuts(lo: Fraction, hi: Fraction, period: int) -> List[Fraction]:
    """Multiples of period strictly between lo and hi"""
    a, b = min(lo, hi), max(lo, hi)
    first = floor(a / period) + 1
    last = ceil(b / period) - 1
    return [Fraction(k * period) for k in range(first, last + 1)]


def fundamental_pieces(seg: Segment) -> List[Segment]:
    """Pieces of a plane segment moved into the fundamental domain"""
    a, b = seg
    params = {Fraction(0), Fraction(1)}
    for axis, period in ((0, 1), (1, 2)):
        delta = b[axis] - a[axis]
        if delta != 0:
            params.update((x - a[axis]) / delta for x in _cuts(a[axis], b[axis], period))
    params = sorted(params)
    pieces = []
    for s, t in zip(params, params[1:]):
        p, q = lerp(a, b, s), lerp(a, b, t)
        mid = lerp(a, b, (s + t) / 2)
        g = deck_between(mid, normalize(mid).to_vec())
        pieces.append((g.apply(p), g.apply(q)))
    return pieces


def _xy(v: Vec) -> Tuple[str, str]:
    x = MARGIN + float(v[0]) * SCALE
    y = MARGIN + float(2 - v[1]) * SCALE
    return f"{x:.3f}", f"{y:.3f}"


def _color(c: Component, curve_index: int) -> str:
    for tag in TAG_ORDER:
        if tag in c.tags:
            return TAG_COLORS[tag]
    return CURVE_COLORS[curve_index % len(CURVE_COLORS)]


def render_svg(curves: Sequence[Multicurve], title: Optional[str] = None) -> str:
    """SVG text for one or more multicurves on a shared fundamental domain"""
    width = 2 * MARGIN + SCALE
    height = 2 * MARGIN + 2 * SCALE
    svg = ET.Element("svg", {
        "xmlns": "http://www.w3.org/2000/svg",
        "width": str(width),
        "height": str(height),
        "viewBox": f"0 0 {width} {height}",
    })
    if title:
        ET.SubElement(svg, "title").text = title

    x0, y0 = _xy((Fraction(0), Fraction(2)))
    ET.SubElement(svg, "rect", {
        "x": x0, "y": y0, "width": str(SCALE), "height": str(2 * SCALE),
        "fill": "none", "stroke": "#000000", "stroke-width": "1",
    })
    xm1, ym = _xy((Fraction(0), Fraction(1)))
    xm2, _ = _xy((Fraction(1), Fraction(1)))
    ET.SubElement(svg, "line", {
        "x1": xm1, "y1": ym, "x2": xm2, "y2": ym,
        "stroke": "#cccccc", "stroke-width": "1", "stroke-dasharray": "4 4",
    })

    for i, curve in enumerate(curves):
        group = ET.SubElement(svg, "g", {"id": f"curve-{i}", "fill": "none", "stroke-width": "2"})
        for j, c in enumerate(curve.components):
            color = _color(c, i)
            path = []
            for seg in c.lift.segments():
                for p, q in fundamental_pieces(seg):
                    (px, py), (qx, qy) = _xy(p), _xy(q)
                    path.append(f"M {px} {py} L {qx} {qy}")
            ET.SubElement(group, "path", {
                "id": f"curve-{i}-component-{j}",
                "d": " ".join(path),
                "stroke": color,
                "data-tags": " ".join(sorted(t.value for t in c.tags)),
            })

    corners = ET.SubElement(svg, "g", {"id": "corners", "fill": "#000000"})
    for gamma, theta in ((0, 0), (1, 0), (0, 1), (1, 1), (0, 2), (1, 2)):
        cx, cy = _xy((Fraction(gamma), Fraction(theta)))
        ET.SubElement(corners, "circle", {"cx": cx, "cy": cy, "r": str(CORNER_RADIUS)})

    return ET.tostring(svg, encoding="unicode") + "\n"


def write_svg(curves: Sequence[Multicurve], path: str, title: Optional[str] = None) -> None:
    with open(path, "w") as f:
        f.write(render_svg(curves, title))
    logger.info(f"Wrote SVG with {len(curves)} curves to {path}")

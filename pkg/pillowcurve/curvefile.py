"""
Curve Files - JSON Storage for Multicurves

    {
      "version": 1,
      "components": [
        {"kind": "arc", "tags": ["binary_dihedral"],
         "lift": [[0, 1, 0, 1], [2, 1, 1, 1]]},
        {"kind": "circle", "tags": [], "closed": true, "holonomy": [1, 2, 0],
         "lift": [[1, 3, 1, 100], ...]}
      ],
      "binary_dihedral_arc": [[0, 1, 0, 1], [2, 1, 1, 1]]
    }

Each lift row is [num_gamma, den_gamma, num_theta, den_theta] in units of pi, in lowest
terms with positive denominators. The optional binary_dihedral_arc keeps the unperturbed
arc the pillowcase slope is read from. Writing is canonical, so read(write(c)) == c.
"""

from fractions import Fraction
from math import gcd
from typing import Any, Dict, List
import json
import logging

from .charvar import Component, ComponentKind, Multicurve, Tag
from .errors import CurveFileError
from .exactgeom import Deck, IDENTITY, LiftPolyline, Vec

logger = logging.getLogger(__name__)

CURVE_FILE_VERSION = 1


def _vertex_row(v: Vec) -> List[int]:
    return [v[0].numerator, v[0].denominator, v[1].numerator, v[1].denominator]


def _fraction(num: Any, den: Any, where: str) -> Fraction:
    if not isinstance(num, int) or not isinstance(den, int) or isinstance(num, bool) \
            or isinstance(den, bool):
        raise CurveFileError(f"{where}: lift entries must be integers")
    if den <= 0:
        raise CurveFileError(f"{where}: denominators must be positive")
    if gcd(num, den) != 1:
        raise CurveFileError(f"{where}: {num}/{den} is not in lowest terms")
    return Fraction(num, den)


def _vertices(rows: Any, where: str) -> List[Vec]:
    if not isinstance(rows, list) or not rows:
        raise CurveFileError(f"{where}: lift must be a non-empty list")
    vertices = []
    for j, row in enumerate(rows):
        if not isinstance(row, list) or len(row) != 4:
            raise CurveFileError(f"{where}, vertex {j}: expected [num, den, num, den]")
        vertices.append((_fraction(row[0], row[1], f"{where}, vertex {j}"),
                         _fraction(row[2], row[3], f"{where}, vertex {j}")))
    return vertices


def component_to_dict(c: Component) -> Dict:
    data: Dict[str, Any] = {
        "kind": c.kind.value,
        "tags": sorted(t.value for t in c.tags),
        "lift": [_vertex_row(v) for v in c.lift.vertices],
    }
    if c.lift.closed:
        data["closed"] = True
        data["holonomy"] = c.lift.holonomy.to_list()
    return data


def component_from_dict(data: Dict, index: int = 0) -> Component:
    where = f"component {index}"
    if not isinstance(data, dict):
        raise CurveFileError(f"{where}: expected an object")
    try:
        kind = ComponentKind(data.get("kind"))
    except ValueError:
        raise CurveFileError(f"{where}: unknown kind {data.get('kind')!r}")
    try:
        tags = frozenset(Tag(t) for t in data.get("tags", []))
    except ValueError as e:
        raise CurveFileError(f"{where}: {e}")

    vertices = _vertices(data.get("lift"), where)

    closed = data.get("closed", kind is ComponentKind.CIRCLE)
    holonomy = IDENTITY
    if "holonomy" in data:
        h = data["holonomy"]
        if not isinstance(h, list) or len(h) != 3 or not all(isinstance(x, int) for x in h):
            raise CurveFileError(f"{where}: holonomy must be [sign, a, b]")
        if h[0] not in (1, -1):
            raise CurveFileError(f"{where}: holonomy sign must be 1 or -1")
        holonomy = Deck(*h)
    try:
        return Component(kind, LiftPolyline(tuple(vertices), bool(closed), holonomy), tags)
    except ValueError as e:
        raise CurveFileError(f"{where}: {e}")


def dumps(curve: Multicurve) -> str:
    payload: Dict[str, Any] = {
        "version": CURVE_FILE_VERSION,
        "components": [component_to_dict(c) for c in curve.components],
    }
    if curve.binary_dihedral_arc is not None:
        payload["binary_dihedral_arc"] = [
            _vertex_row(v) for v in curve.binary_dihedral_arc.vertices]
    return json.dumps(payload, indent=2) + "\n"


def loads(text: str) -> Multicurve:
    try:
        payload = json.loads(text)
    except json.JSONDecodeError as e:
        raise CurveFileError(f"not valid JSON: {e.msg} (line {e.lineno})")
    if not isinstance(payload, dict):
        raise CurveFileError("curve file must be a JSON object")
    if payload.get("version") != CURVE_FILE_VERSION:
        raise CurveFileError(f"unsupported curve file version {payload.get('version')!r}")
    components = payload.get("components")
    if not isinstance(components, list):
        raise CurveFileError("components must be a list")
    bd = None
    if "binary_dihedral_arc" in payload:
        verts = _vertices(payload["binary_dihedral_arc"], "binary dihedral arc")
        try:
            bd = LiftPolyline(tuple(verts))
        except ValueError as e:
            raise CurveFileError(f"binary dihedral arc: {e}")
    return Multicurve(tuple(component_from_dict(c, i) for i, c in enumerate(components)), (), bd)


def write(curve: Multicurve, path: str) -> None:
    with open(path, "w") as f:
        f.write(dumps(curve))
    logger.info(f"Wrote {len(curve.components)} components to {path}")


def read(path: str) -> Multicurve:
    try:
        with open(path) as f:
            text = f.read()
    except OSError as e:
        raise CurveFileError(f"cannot read {path}: {e.strerror}")
    curve = loads(text)
    logger.debug(f"Read {len(curve.components)} components from {path}")
    return curve

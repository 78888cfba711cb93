"""
Pillowcurve - Pillowcase Images of Tangles

Contains:
- Exactgeom: exact plane geometry of the pillowcase cover
- Tangle: tangle expressions and their parser
- Charvar: multicurves, tangle sums, resolution and the earring
- Floer: generators, bigons, bounding-cochain triangles, homology rank
- Oracle: floating-point quaternion checks
"""

from .errors import (
    PillowcurveError,
    ParseError,
    TangleError,
    CurveFileError,
    TransversalityError,
    BudgetExceeded,
    OracleToleranceError,
    ChainComplexError,
)
from .config import PillowConfig, get_config, set_config
from .exactgeom import PillowPoint, Deck, LiftPolyline, ShearDirection, ShearSpec, normalize
from .tangle import parse, to_text, slope, pretzel, pretzel_split
from .charvar import (
    Component,
    ComponentKind,
    Tag,
    CircleFiber,
    Multicurve,
    EvalOptions,
    evaluate,
    evaluate_async,
    sum_curves,
    resolve_circles,
    remove_corner_circles,
    earring,
)
from .floer import ChainData, chain_complex, chain_complex_async, intersect, homology_rank

__version__ = "0.1.0"

__all__ = [
    # Errors
    "PillowcurveError",
    "ParseError",
    "TangleError",
    "CurveFileError",
    "TransversalityError",
    "BudgetExceeded",
    "OracleToleranceError",
    "ChainComplexError",
    # Config
    "PillowConfig",
    "get_config",
    "set_config",
    # Geometry
    "PillowPoint",
    "Deck",
    "LiftPolyline",
    "ShearDirection",
    "ShearSpec",
    "normalize",
    # Tangles
    "parse",
    "to_text",
    "slope",
    "pretzel",
    "pretzel_split",
    # Curves
    "Component",
    "ComponentKind",
    "Tag",
    "CircleFiber",
    "Multicurve",
    "EvalOptions",
    "evaluate",
    "evaluate_async",
    "sum_curves",
    "resolve_circles",
    "remove_corner_circles",
    "earring",
    # Floer
    "ChainData",
    "chain_complex",
    "chain_complex_async",
    "intersect",
    "homology_rank",
]

"""
Command Line - pillowcurve eval|floer|oracle|plot|pretzel

Exit codes: 0 success, 1 usage or parse error, 2 curves not transverse, 3 polygon
budget exhausted, 4 oracle tolerance failure.
"""

from fractions import Fraction
from typing import Optional, Sequence
import argparse
import asyncio
import json
import logging
import sys

from . import curvefile, oracle
from .charvar import EvalOptions, Multicurve, evaluate_async
from .config import get_config
from .errors import OracleToleranceError, PillowcurveError
from .floer import chain_complex_async
from .render import write_svg
from .tangle import parse, pretzel_split, to_text

logger = logging.getLogger(__name__)


class UsageError(PillowcurveError):
    exit_code = 1


class _ArgumentParser(argparse.ArgumentParser):
    def error(self, message: str):
        raise UsageError(f"{message}\n{self.format_usage().strip()}")


def _fraction(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"expected a fraction p/q, got {text!r}")


def _curve_summary(curve: Multicurve) -> str:
    s = curve.summary()
    return (f"components: {s['components']}, arcs: {s['arcs']}, circles: {s['circles']}, "
            f"resolution sites: {s['resolution_sites']}")


# ============================================================================
# Commands
# ============================================================================

def cmd_eval(args: argparse.Namespace) -> int:
    expr = parse(args.expr)
    opts = EvalOptions(resolve=args.resolve, eps=args.eps, earring_eps=args.earring_eps)
    curve = asyncio.run(evaluate_async(expr, opts))
    if args.output:
        curvefile.write(curve, args.output)
    if args.svg:
        write_svg([curve], args.svg, title=to_text(expr))
    print(_curve_summary(curve))
    return 0


def cmd_floer(args: argparse.Namespace) -> int:
    curve1 = curvefile.read(args.file1)
    curve2 = curvefile.read(args.file2)
    data = asyncio.run(chain_complex_async(curve1, curve2, args.cochain, args.budget,
                                           args.auto_shear))
    for spec in data.shears:
        print(f"applied shear: {spec.direction.value} {spec.t}")
    if args.witness:
        for b in data.bigons:
            path = " -> ".join(f"({g}, {t})" for g, t in b.boundary)
            print(f"bigon {b.source} -> {b.target}: {path}")
        for tr in data.triangles:
            path = " -> ".join(f"({g}, {t})" for g, t in tr.boundary)
            print(f"triangle {tr.source} -> {tr.target} via {tr.cochain}: {path}")
    if args.json:
        print(json.dumps(data.to_dict(), indent=2))
    print(data.summary())
    return 0


def cmd_oracle(args: argparse.Namespace) -> int:
    if args.suite == "c3":
        t = tuple(args.t_range) if args.t_range else args.t
        report = oracle.c3_check(t, args.samples, args.seed)
        if args.csv:
            oracle.write_csv(oracle.sample_variety(args.t, args.grid), args.csv)
    elif args.suite == "hessian":
        report = oracle.hessian_check(args.t)
        verdict = "nonsingular" if report.details["nonsingular"] else "singular"
        print(f"{verdict}, signature {report.details['signature']}")
    elif args.suite == "fiber":
        if args.z2 is None or args.z3 is None:
            raise UsageError("oracle fiber needs --z2 and --z3")
        report = oracle.fiber_check(args.z2, args.z3, args.samples)
        print(f"endpoints: {', '.join(report.details['endpoints'])}")
    else:
        report = oracle.coords_check(args.samples, args.seed)
    print(report.summary())
    if not report.passed:
        raise OracleToleranceError(f"{report.name} check failed",
                                   max_residual=report.max_residual)
    return 0


def cmd_plot(args: argparse.Namespace) -> int:
    curves = [curvefile.read(path) for path in args.files]
    write_svg(curves, args.output, title=", ".join(args.files))
    print(f"wrote {args.output}")
    return 0


def cmd_pretzel(args: argparse.Namespace) -> int:
    opts = EvalOptions(resolve=True, eps=args.eps, earring_eps=args.earring_eps)
    for i, side in enumerate(pretzel_split(*args.twists), start=1):
        curve = asyncio.run(evaluate_async(side, opts))
        path = f"{args.output}_{i}.json"
        curvefile.write(curve, path)
        print(f"{path}: {to_text(side)}: {_curve_summary(curve)}")
    return 0


# ============================================================================
# Parser
# ============================================================================

def build_parser() -> argparse.ArgumentParser:
    parser = _ArgumentParser(prog="pillowcurve",
                             description="Pillowcase images of tangles and their Floer pairings")
    parser.add_argument("--log-level", default=None,
                        help="DEBUG, INFO, WARNING or ERROR (default from PILLOWCURVE_LOG_LEVEL)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("eval", help="evaluate a tangle expression into a multicurve")
    p.add_argument("expr")
    p.add_argument("-o", "--output", help="curve file to write")
    p.add_argument("--svg", help="SVG drawing to write")
    p.add_argument("--resolve", action=argparse.BooleanOptionalAction, default=True,
                   help="resolve circle fibers of sums (default on)")
    p.add_argument("--eps", type=_fraction, help="resolution offset, units of pi")
    p.add_argument("--earring-eps", type=_fraction, help="earring offset, units of pi")
    p.set_defaults(handler=cmd_eval)

    p = sub.add_parser("floer", help="Floer chain data of two curve files")
    p.add_argument("file1")
    p.add_argument("file2")
    p.add_argument("--cochain", type=int, help="index of a self-intersection used as cochain")
    p.add_argument("--witness", action="store_true", help="print polygon boundaries")
    p.add_argument("--budget", type=_fraction, help="path budget per polygon side")
    p.add_argument("--auto-shear", action="store_true",
                   help="shear the first curve until the pair is transverse")
    p.add_argument("--json", action="store_true", help="print the full chain data as JSON")
    p.set_defaults(handler=cmd_floer)

    p = sub.add_parser("oracle", help="numeric quaternion checks")
    p.add_argument("suite", choices=["c3", "hessian", "fiber", "coords"])
    p.add_argument("--t", type=float, default=0.1, help="perturbation parameter")
    p.add_argument("--t-range", nargs=2, type=float, metavar=("LOW", "HIGH"),
                   help="c3: draw t uniformly per sample")
    p.add_argument("--z2", type=_fraction, help="first fiber angle, units of pi")
    p.add_argument("--z3", type=_fraction, help="second fiber angle, units of pi")
    p.add_argument("--samples", type=int, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--grid", type=int, default=32, help="grid size for --csv sampling")
    p.add_argument("--csv", help="write sampled zeros of phi_t")
    p.set_defaults(handler=cmd_oracle)

    p = sub.add_parser("plot", help="draw curve files on one fundamental domain")
    p.add_argument("files", nargs="+")
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(handler=cmd_plot)

    p = sub.add_parser("pretzel", help="write the two curve files of a pretzel pairing")
    p.add_argument("twists", type=int, nargs="+")
    p.add_argument("-o", "--output", required=True, help="output prefix")
    p.add_argument("--eps", type=_fraction)
    p.add_argument("--earring-eps", type=_fraction)
    p.set_defaults(handler=cmd_pretzel)
    return parser


_DEFAULT_SAMPLES = {"c3": 100_000, "hessian": 0, "fiber": 64, "coords": 1000}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        level = (args.log_level or get_config().log_level).upper()
        logging.basicConfig(
            level=getattr(logging, level, logging.WARNING),
            format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        )
        if getattr(args, "samples", 0) is None:
            args.samples = _DEFAULT_SAMPLES[args.suite]
        return args.handler(args)
    except PillowcurveError as e:
        print(f"error: {e.message}", file=sys.stderr)
        logger.debug(f"Failure details: {e.to_dict()}")
        return e.exit_code

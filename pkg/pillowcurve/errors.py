"""
Errors - Failure Modes of the Pillowcase Pipeline

Every failure the library can report is a PillowcurveError. Each class carries the
exit code the command line maps it to, so scripts can tell a bad expression from a
non-transverse pair or an exhausted bigon budget.
"""

from typing import Any, Dict, Optional


class PillowcurveError(Exception):
    """Base class for all pillowcurve failures"""

    exit_code: int = 1

    def __init__(self, message: str, **context: Any):
        self.message = message
        self.context: Dict[str, Any] = context
        super().__init__(message)

    def to_dict(self) -> Dict:
        return {
            "error": type(self).__name__,
            "message": self.message,
            "exit_code": self.exit_code,
            "context": {k: str(v) for k, v in self.context.items()},
        }


class ParseError(PillowcurveError):
    """Tangle expression does not match the grammar"""

    exit_code = 1

    def __init__(self, message: str, position: Optional[int] = None, text: str = ""):
        self.position = position
        self.text = text
        where = f" at position {position}" if position is not None else ""
        super().__init__(f"{message}{where}", position=position)


class TangleError(PillowcurveError):
    """Expression is well-formed but invalid or unsupported"""

    exit_code = 1


class CurveFileError(PillowcurveError):
    """Malformed curve file"""

    exit_code = 1


class TransversalityError(PillowcurveError):
    """Curves are not in general position; a small shear is needed"""

    exit_code = 2

    def __init__(self, message: str, advice: str = "apply a small shear to one curve", **context: Any):
        self.advice = advice
        super().__init__(f"{message} ({advice})", **context)


class BudgetExceeded(PillowcurveError):
    """Polygon search stopped at the path budget without a verdict"""

    exit_code = 3


class OracleToleranceError(PillowcurveError):
    """Numerical check failed its tolerance"""

    exit_code = 4


class ChainComplexError(PillowcurveError):
    """Differential does not square to zero"""

    exit_code = 1

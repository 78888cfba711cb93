"""
Config - Runtime Settings

Defaults for the exact pipeline (resolution and earring offsets, polygon budget) and
the numeric oracle (tolerances, finite-difference step). Values come from the
environment once and can be overridden per call or replaced wholesale in tests.
"""

from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Dict, Optional, Tuple
import logging
import os

logger = logging.getLogger(__name__)


def _default_schedule() -> Tuple[Fraction, ...]:
    return tuple(Fraction(1, 2 ** k) for k in range(6, 13))


@dataclass(frozen=True)
class PillowConfig:
    """Settings shared by evaluation, Floer and oracle code"""

    # Geometry (units of pi)
    eps: Fraction = Fraction(1, 50)           # resolution offset around circle images
    earring_eps: Fraction = Fraction(1, 100)  # offset of earring copies
    budget: Fraction = Fraction(4)            # L-infinity path length per polygon side

    # Numerics
    tol: float = 1e-8                         # variety membership
    fd_step: float = 1e-5                     # Hessian finite differences

    # Shear search for corner circles and auto-shear
    shear_schedule: Tuple[Fraction, ...] = field(default_factory=_default_schedule)

    log_level: str = "WARNING"

    @classmethod
    def from_env(cls, environ: Optional[Dict[str, str]] = None) -> "PillowConfig":
        """Build from PILLOWCURVE_* environment variables"""
        env = os.environ if environ is None else environ
        config = cls()
        updates = {}
        if env.get("PILLOWCURVE_BUDGET"):
            updates["budget"] = Fraction(env["PILLOWCURVE_BUDGET"])
        if env.get("PILLOWCURVE_EPS"):
            updates["eps"] = Fraction(env["PILLOWCURVE_EPS"])
        if env.get("PILLOWCURVE_EARRING_EPS"):
            updates["earring_eps"] = Fraction(env["PILLOWCURVE_EARRING_EPS"])
        if env.get("PILLOWCURVE_LOG_LEVEL"):
            updates["log_level"] = env["PILLOWCURVE_LOG_LEVEL"].upper()
        if updates:
            logger.debug(f"Config overrides from environment: {sorted(updates)}")
        return replace(config, **updates)

    def to_dict(self) -> Dict:
        return {
            "eps": str(self.eps),
            "earring_eps": str(self.earring_eps),
            "budget": str(self.budget),
            "tol": self.tol,
            "fd_step": self.fd_step,
            "shear_schedule": [str(t) for t in self.shear_schedule],
            "log_level": self.log_level,
        }


# Process-wide configuration
_config: Optional[PillowConfig] = None


def get_config() -> PillowConfig:
    """Get or create the process-wide configuration"""
    global _config
    if _config is None:
        _config = PillowConfig.from_env()
    return _config


def set_config(config: Optional[PillowConfig]) -> None:
    """Replace the process-wide configuration (None re-reads the environment)"""
    global _config
    _config = config

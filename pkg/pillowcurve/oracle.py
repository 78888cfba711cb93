"""
Oracle - Floating-Point Quaternion Checks

An independent numeric engine over SU(2) viewed as unit quaternions. It recomputes
pillowcase coordinates from gauge-fixed representations, evaluates the perturbed trace
function of the three-punctured-sphere piece two ways (quaternion product and closed
form), samples its zero set, labels the components of 2-D slices through the corner,
and computes the corner Hessian. The exact pipeline is validated against it.

Quaternions are numpy arrays with the real part first: (w, x, y, z). Every function
broadcasts over leading axes, so grids are evaluated in one call.
"""

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union
import logging
import math

import numpy as np

from .config import get_config
from .errors import OracleToleranceError, PillowcurveError

logger = logging.getLogger(__name__)

ArrayLike = Union[float, np.ndarray]

AGREEMENT_TOL = 1e-10


# ============================================================================
# Quaternion arithmetic
# ============================================================================

def quat(w: float, x: float, y: float, z: float) -> np.ndarray:
    return np.array([w, x, y, z], dtype=float)


ONE = quat(1, 0, 0, 0)
I = quat(0, 1, 0, 0)
J = quat(0, 0, 1, 0)
K = quat(0, 0, 0, 1)


def re(q: np.ndarray) -> np.ndarray:
    return q[..., 0]


def im(q: np.ndarray) -> np.ndarray:
    return q[..., 1:]


def pure(v: np.ndarray) -> np.ndarray:
    """Imaginary quaternion with vector part v"""
    v = np.asarray(v, dtype=float)
    return np.concatenate([np.zeros(v.shape[:-1] + (1,)), v], axis=-1)


def conj(q: np.ndarray) -> np.ndarray:
    return q * np.array([1.0, -1.0, -1.0, -1.0])


def prod(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    a, b = np.broadcast_arrays(np.asarray(a, dtype=float), np.asarray(b, dtype=float))
    w = re(a) * re(b) - np.sum(im(a) * im(b), axis=-1)
    v = re(a)[..., None] * im(b) + re(b)[..., None] * im(a) + np.cross(im(a), im(b))
    return np.concatenate([w[..., None], v], axis=-1)


def norm(q: np.ndarray) -> np.ndarray:
    return np.linalg.norm(q, axis=-1)


def normalize(q: np.ndarray) -> np.ndarray:
    return q / norm(q)[..., None]


def sinc(n: ArrayLike) -> np.ndarray:
    """sin(n)/n with the series branch below 1e-4"""
    n = np.asarray(n, dtype=float)
    small = np.abs(n) < 1e-4
    safe = np.where(small, 1.0, n)
    return np.where(small, 1.0 - n ** 2 / 6.0 + n ** 4 / 120.0, np.sin(safe) / safe)


def exp(v: np.ndarray) -> np.ndarray:
    """Exponential of the pure quaternion with vector part v"""
    v = np.asarray(v, dtype=float)
    n = np.linalg.norm(v, axis=-1)
    return np.concatenate([np.cos(n)[..., None], sinc(n)[..., None] * v], axis=-1)


def equatorial(angle: ArrayLike) -> np.ndarray:
    """e^{angle k} i"""
    angle = np.asarray(angle, dtype=float)
    zero = np.zeros_like(angle)
    return np.stack([zero, np.cos(angle), np.sin(angle), zero], axis=-1)


def equatorial_angle(q: np.ndarray) -> np.ndarray:
    return np.arctan2(q[..., 2], q[..., 1])


def conjugate_by(g: np.ndarray, q: np.ndarray) -> np.ndarray:
    """g q g^-1 for a unit quaternion g"""
    return prod(prod(g, q), conj(g))


def random_unit(rng: np.random.Generator, size: Optional[int] = None) -> np.ndarray:
    shape = (4,) if size is None else (size, 4)
    return normalize(rng.normal(size=shape))


# ============================================================================
# Angles and pillowcase coordinates
# ============================================================================

def _check_traceless(tol: float, **quats: np.ndarray) -> None:
    for name, q in quats.items():
        if abs(float(re(q))) > tol or abs(float(norm(q)) - 1.0) > tol:
            raise OracleToleranceError(f"{name} is not a traceless unit quaternion",
                                       value=np.round(q, 12).tolist())


def angle(x: np.ndarray, y: np.ndarray) -> float:
    """Unoriented angle between two traceless unit quaternions"""
    return float(np.arccos(np.clip(np.dot(im(x), im(y)), -1.0, 1.0)))


def rel_angle(x: np.ndarray, y: np.ndarray, z: np.ndarray, tol: float = 1e-9) -> float:
    """Angle from x to y in [0, 2pi), oriented by the plane of x and z"""
    _check_traceless(tol, x=x, y=y, z=z)
    xv, yv, zv = im(x), im(y), im(z)
    axis = np.cross(xv, zv)
    length = float(np.linalg.norm(axis))
    if length < tol:
        raise OracleToleranceError("relative angle needs x and z independent")
    if abs(float(np.linalg.det(np.stack([xv, yv, zv])))) > tol:
        raise OracleToleranceError("relative angle needs coequatorial inputs")
    n = axis / length
    value = math.atan2(float(np.dot(n, np.cross(xv, yv))), float(np.dot(xv, yv)))
    return value % (2 * math.pi)


def pillowcase_coords(a: np.ndarray, b: np.ndarray, c: np.ndarray, d: np.ndarray,
                      tol: float = 1e-9) -> Tuple[float, float]:
    """(gamma, theta) in radians of a representation given by its boundary images"""
    _check_traceless(tol, a=a, b=b, c=c, d=d)
    residual = float(norm(prod(a, conj(c)) - prod(b, conj(d))))
    if residual > tol:
        raise OracleToleranceError("pillowcase relation a c^-1 = b d^-1 violated",
                                   residual=residual)
    gamma = angle(a, b)
    if float(np.linalg.norm(np.cross(im(a), im(b)))) < tol:
        return gamma, angle(a, c)
    return gamma, rel_angle(a, c, b, tol)


def representation(gamma: float, theta: float) -> Tuple[np.ndarray, ...]:
    """The gauge-fixed (a, b, c, d) at pillowcase coordinates (gamma, theta)"""
    return I, equatorial(gamma), equatorial(theta), equatorial(gamma + theta)


# ============================================================================
# Perturbed trace function
# ============================================================================

@dataclass(frozen=True)
class C3Point:
    """A point of the representation torus of the three-punctured sphere piece"""
    gamma: float
    theta: float
    alpha: float
    beta: float
    t: float = 0.0

    def iota(self) -> "C3Point":
        return C3Point(-self.gamma, -self.theta, self.alpha + math.pi, math.pi - self.beta, self.t)

    def as_tuple(self) -> Tuple[float, float, float, float]:
        return self.gamma, self.theta, self.alpha, self.beta


def _x_vector(alpha: ArrayLike, beta: ArrayLike) -> np.ndarray:
    alpha, beta = np.broadcast_arrays(np.asarray(alpha, dtype=float), np.asarray(beta, dtype=float))
    return np.stack([np.sin(alpha) * np.cos(beta), np.sin(alpha) * np.sin(beta), np.cos(alpha)],
                    axis=-1)


def phi_quaternion(t: ArrayLike, gamma: ArrayLike, theta: ArrayLike,
                   alpha: ArrayLike, beta: ArrayLike) -> np.ndarray:
    """Half trace of x p^-1 a^-1 p b with p = exp(t Im(a c x))"""
    t, gamma, theta, alpha, beta = np.broadcast_arrays(
        *(np.asarray(v, dtype=float) for v in (t, gamma, theta, alpha, beta)))
    a = np.broadcast_to(I, gamma.shape + (4,))
    b = equatorial(gamma)
    c = equatorial(theta)
    x = pure(_x_vector(alpha, beta))
    lam = prod(prod(a, c), x)
    p = exp(t[..., None] * im(lam))
    y = prod(prod(prod(prod(x, conj(p)), conj(a)), p), b)
    return re(y)


def phi_closed(t: ArrayLike, gamma: ArrayLike, theta: ArrayLike,
               alpha: ArrayLike, beta: ArrayLike) -> np.ndarray:
    """cos(gamma) F + sin(gamma) G"""
    t, gamma, theta, alpha, beta = np.broadcast_arrays(
        *(np.asarray(v, dtype=float) for v in (t, gamma, theta, alpha, beta)))
    ca, sa = np.cos(alpha), np.sin(alpha)
    cb, sb = np.cos(beta), np.sin(beta)
    ct, st = np.cos(theta), np.sin(theta)
    n = t * np.sqrt(np.clip(1.0 - ca ** 2 * st ** 2, 0.0, None))
    first = 2 * np.cos(n) * sinc(n) * t
    second = 2 * sinc(n) ** 2 * t ** 2
    f = (first * (sa ** 2 * sb * np.sin(theta - beta) - ca ** 2 * ct)
         + second * sa ** 2 * cb * ca * st * np.cos(beta - theta))
    g = (ca * np.cos(2 * n)
         - first * sa ** 2 * cb * np.sin(theta - beta)
         + second * ca * sa ** 2 * sb * st * np.cos(beta - theta))
    return np.cos(gamma) * f + np.sin(gamma) * g


def phi_t(point: C3Point, tol: float = AGREEMENT_TOL) -> Tuple[float, float]:
    """Both evaluations at one point; they must agree"""
    args = (point.t,) + point.as_tuple()
    by_product = float(phi_quaternion(*args))
    by_formula = float(phi_closed(*args))
    if abs(by_product - by_formula) > tol:
        raise OracleToleranceError("trace function evaluations disagree",
                                   point=point, quaternion=by_product, closed=by_formula)
    return by_product, by_formula


def s_sign(theta: ArrayLike, beta: ArrayLike) -> np.ndarray:
    return np.sin(beta) * np.sin(np.asarray(theta) - beta)


# ============================================================================
# Circle fibers of a tangle sum
# ============================================================================

def spherical_theta3(z2: ArrayLike, z3: ArrayLike, psi: ArrayLike) -> np.ndarray:
    """Third side of the spherical triangle with sides z2, z3 and angle psi between them"""
    cos3 = np.cos(z2) * np.cos(z3) + np.sin(z2) * np.sin(z3) * np.cos(psi)
    return np.arccos(np.clip(cos3, -1.0, 1.0))


Endpoint = Tuple[np.ndarray, np.ndarray]


def endpoint_representations(theta1: float, theta2: float) -> Tuple[Endpoint, Endpoint]:
    """(x, c) at psi = 0 and psi = pi, with a = i and b = +-i

    x sits at angle theta1 from a and c at angle theta2 from x; the configuration is
    reflected when needed so the angle of c stays in [0, pi].
    """
    if theta1 >= theta2:
        at_zero = (equatorial(theta1), equatorial(theta1 - theta2))
    else:
        at_zero = (equatorial(-theta1), equatorial(theta2 - theta1))
    if theta1 + theta2 <= math.pi:
        at_pi = (equatorial(theta1), equatorial(theta1 + theta2))
    else:
        at_pi = (equatorial(-theta1), equatorial(2 * math.pi - theta1 - theta2))
    return at_zero, at_pi


def endpoint_signs(theta1: float, theta2: float) -> Tuple[float, float]:
    """s at the two singular fiber points"""
    return tuple(float(s_sign(equatorial_angle(c), equatorial_angle(x)))
                 for x, c in endpoint_representations(theta1, theta2))


# ============================================================================
# Sampling the zero set
# ============================================================================

def sample_variety(t: float, grid_size: int = 32, tol: Optional[float] = None,
                   bisections: int = 60) -> np.ndarray:
    """Zeros of phi_t found by bisection along alpha on a regular grid

    Returns rows (gamma, theta, alpha, beta, |phi_t|) with |phi_t| < tol.
    """
    if grid_size < 16:
        raise PillowcurveError("sample grid needs at least 16 points per axis", grid_size=grid_size)
    tol = get_config().tol if tol is None else tol
    gammas = np.linspace(0.0, math.pi, grid_size)
    thetas = np.linspace(0.0, math.pi, grid_size)
    alphas = np.linspace(0.0, math.pi, grid_size)
    betas = np.linspace(0.0, 2 * math.pi, grid_size, endpoint=False)
    g, th, al, be = np.meshgrid(gammas, thetas, alphas, betas, indexing="ij")
    values = phi_closed(t, g, th, al, be)

    lower, upper = values[:, :, :-1, :], values[:, :, 1:, :]
    ig, it, ia, ib = np.nonzero(lower * upper <= 0)
    gamma, theta, beta = gammas[ig], thetas[it], betas[ib]
    lo, hi = alphas[ia], alphas[ia + 1]
    f_lo = lower[ig, it, ia, ib]
    for _ in range(bisections):
        mid = (lo + hi) / 2
        f_mid = phi_closed(t, gamma, theta, mid, beta)
        left = f_lo * f_mid <= 0
        hi = np.where(left, mid, hi)
        lo = np.where(left, lo, mid)
        f_lo = np.where(left, f_lo, f_mid)
    alpha = (lo + hi) / 2
    residual = np.abs(phi_closed(t, gamma, theta, alpha, beta))
    keep = residual < tol
    points = np.column_stack([gamma, theta, alpha, beta, residual])[keep]
    logger.debug(f"Sampled {len(points)} zeros of phi_t at t={t} on a {grid_size}^4 grid")
    return points


@dataclass(frozen=True)
class SliceComponent:
    """A connected piece of the zero set on a (gamma, alpha) slice"""
    size: int
    faces: frozenset  # subset of {"H-", "H+", "A-", "A+"}

    def to_dict(self) -> Dict:
        return {"size": self.size, "faces": sorted(self.faces)}


def slice_components(t: float, theta: float, beta: float, gamma0: float = 0.0,
                     size: int = 121, window: float = 0.6) -> List[SliceComponent]:
    """Components of {phi_t = 0} on the slice through (gamma0, pi/2) at fixed (theta, beta)

    Grid points adjacent to a sign change are marked and grouped by 8-connectivity. The
    H faces are the sides gamma = gamma0 -+ window, the A faces alpha = pi/2 -+ window.
    """
    gammas = np.linspace(gamma0 - window, gamma0 + window, size)
    alphas = np.linspace(math.pi / 2 - window, math.pi / 2 + window, size)
    g, al = np.meshgrid(gammas, alphas, indexing="ij")
    sign = np.sign(phi_closed(t, g, theta, al, beta))

    marked = sign == 0
    along_gamma = sign[:-1, :] != sign[1:, :]
    along_alpha = sign[:, :-1] != sign[:, 1:]
    marked[:-1, :] |= along_gamma
    marked[1:, :] |= along_gamma
    marked[:, :-1] |= along_alpha
    marked[:, 1:] |= along_alpha

    labels = np.full(marked.shape, -1, dtype=int)
    components: List[SliceComponent] = []
    for start in zip(*np.nonzero(marked)):
        if labels[start] >= 0:
            continue
        label = len(components)
        labels[start] = label
        queue, count, faces = [start], 0, set()
        while queue:
            i, j = queue.pop()
            count += 1
            if i == 0:
                faces.add("H-")
            if i == size - 1:
                faces.add("H+")
            if j == 0:
                faces.add("A-")
            if j == size - 1:
                faces.add("A+")
            for di in (-1, 0, 1):
                for dj in (-1, 0, 1):
                    ni, nj = i + di, j + dj
                    if 0 <= ni < size and 0 <= nj < size and marked[ni, nj] and labels[ni, nj] < 0:
                        labels[ni, nj] = label
                        queue.append((ni, nj))
        components.append(SliceComponent(count, frozenset(faces)))
    components.sort(key=lambda c: -c.size)
    logger.debug(f"Slice at theta={theta:.4f}, beta={beta:.4f}, t={t}: "
                 f"{len(components)} components")
    return components


# ============================================================================
# Corner Hessian
# ============================================================================

CORNER = np.array([0.0, 0.0, math.pi / 2, 0.0])


def _second_differences(f, point: np.ndarray, h: float) -> np.ndarray:
    dim = len(point)
    hess = np.zeros((dim, dim))
    steps = np.eye(dim) * h
    center = f(point)
    for i in range(dim):
        hess[i, i] = (f(point + steps[i]) - 2 * center + f(point - steps[i])) / h ** 2
        for j in range(i + 1, dim):
            value = (f(point + steps[i] + steps[j]) - f(point + steps[i] - steps[j])
                     - f(point - steps[i] + steps[j]) + f(point - steps[i] - steps[j])) / (4 * h ** 2)
            hess[i, j] = hess[j, i] = value
    return hess


def hessian(t: float, point: Sequence[float] = CORNER, step: Optional[float] = None) -> np.ndarray:
    """Richardson-extrapolated finite-difference Hessian of phi_t in (gamma, theta, alpha, beta)"""
    h = get_config().fd_step if step is None else step
    point = np.asarray(point, dtype=float)

    def f(p: np.ndarray) -> float:
        return float(phi_closed(t, *p))

    return (4 * _second_differences(f, point, h) - _second_differences(f, point, 2 * h)) / 3


def corner_hessian(t: float, step: Optional[float] = None,
                   singular_tol: float = 1e-6) -> Tuple[bool, int]:
    """(nonsingular, signature) of the Hessian at the corner (0, 0, pi/2, 0)"""
    if not 0 < t < math.pi / 4:
        raise PillowcurveError("corner Hessian needs 0 < t < pi/4", t=t)
    eigenvalues = np.linalg.eigvalsh(hessian(t, CORNER, step))
    nonsingular = bool(np.min(np.abs(eigenvalues)) > singular_tol)
    signature = int(np.sum(eigenvalues > 0) - np.sum(eigenvalues < 0))
    return nonsingular, signature


# ============================================================================
# Reports
# ============================================================================

@dataclass
class OracleReport:
    """Outcome of one oracle suite"""
    name: str
    passed: bool
    max_residual: float
    details: Dict[str, Any] = field(default_factory=dict)

    def summary(self) -> str:
        verdict = "PASS" if self.passed else "FAIL"
        return f"{self.name}: {verdict} (max residual {self.max_residual:.3e})"

    def to_dict(self) -> Dict:
        return {
            "name": self.name,
            "passed": self.passed,
            "max_residual": self.max_residual,
            "details": self.details,
        }


def c3_check(t: Union[float, Tuple[float, float]], samples: int = 100_000,
             seed: int = 0) -> OracleReport:
    """Two-way agreement of phi_t on random points, plus the t = 0 identity

    A (low, high) pair draws an independent t for every sample.
    """
    rng = np.random.default_rng(seed)
    gamma = rng.uniform(0, 2 * math.pi, samples)
    theta = rng.uniform(0, 2 * math.pi, samples)
    alpha = rng.uniform(0, math.pi, samples)
    beta = rng.uniform(0, 2 * math.pi, samples)
    if isinstance(t, tuple):
        low, high = t
        ts = rng.uniform(low, high, samples)
    else:
        ts = np.full(samples, float(t))
    by_product = phi_quaternion(ts, gamma, theta, alpha, beta)
    by_formula = phi_closed(ts, gamma, theta, alpha, beta)
    agreement = float(np.max(np.abs(by_product - by_formula)))
    details: Dict[str, Any] = {"t": t, "samples": samples, "agreement": agreement}
    passed = agreement < AGREEMENT_TOL
    residual = agreement
    unperturbed = ts == 0
    if np.any(unperturbed):
        expected = np.sin(gamma) * np.cos(alpha)
        identity = float(np.max(np.abs(by_product - expected)[unperturbed]))
        details["identity"] = identity
        passed = passed and identity < 1e-12
        residual = max(residual, identity)
    logger.info(f"c3 check at t={t}: agreement {agreement:.3e}")
    return OracleReport("c3", passed, residual, details)


def hessian_check(t: float, step: Optional[float] = None) -> OracleReport:
    """Corner Hessian: nonsingular, signature 0, and the (gamma, theta) entry"""
    matrix = hessian(t, CORNER, step)
    nonsingular, signature = corner_hessian(t, step)
    expected = -2 * math.cos(t) * math.sin(t)
    residual = abs(float(matrix[0, 1]) - expected)
    details = {
        "t": t,
        "nonsingular": nonsingular,
        "signature": signature,
        "eigenvalues": np.linalg.eigvalsh(matrix).tolist(),
        "hessian": matrix.tolist(),
    }
    return OracleReport("hessian", nonsingular and signature == 0 and residual < 1e-6,
                        residual, details)


def format_pi(x: Fraction) -> str:
    """A multiple of pi as text, e.g. 2π/15"""
    if x == 0:
        return "0"
    num = "π" if abs(x.numerator) == 1 else f"{abs(x.numerator)}π"
    sign = "-" if x < 0 else ""
    return f"{sign}{num}" if x.denominator == 1 else f"{sign}{num}/{x.denominator}"


def fiber_check(theta1: Fraction, theta2: Fraction, samples: int = 64) -> OracleReport:
    """Compare the exact circle-fiber range with the spherical law of cosines

    theta1 and theta2 are in units of pi and must lie in (0, 1).
    """
    from .charvar import CircleFiber

    if not (0 < theta1 < 1 and 0 < theta2 < 1):
        raise PillowcurveError("fiber angles must lie strictly between 0 and 1 (units of pi)")
    fiber = CircleFiber.from_crossings(Fraction(0), theta1, theta2)
    z2, z3 = float(theta1) * math.pi, float(theta2) * math.pi
    low = float(spherical_theta3(z2, z3, 0.0))
    high = float(spherical_theta3(z2, z3, math.pi))
    residuals = [abs(low - float(fiber.theta_min) * math.pi),
                 abs(high - float(fiber.theta_max) * math.pi)]

    sweep = spherical_theta3(z2, z3, np.linspace(0.0, math.pi, samples))
    outside = np.maximum(low - sweep, 0) + np.maximum(sweep - high, 0)
    residuals.append(float(np.max(outside)))
    residuals.append(float(np.max(np.maximum(-np.diff(sweep), 0))))

    (x0, c0), (xp, cp) = endpoint_representations(z2, z3)
    for x, c, target in ((x0, c0, low), (xp, cp, high)):
        residuals.append(abs(angle(I, x) - z2))
        residuals.append(abs(angle(x, c) - z3))
        residuals.append(abs(pillowcase_coords(I, I, c, c)[1] - target))
    s_zero, s_pi = endpoint_signs(z2, z3)
    residuals.append(abs(s_zero + s_pi))

    max_residual = max(residuals)
    details = {
        "theta1": str(theta1),
        "theta2": str(theta2),
        "theta_min": str(fiber.theta_min),
        "theta_max": str(fiber.theta_max),
        "endpoints": [format_pi(fiber.theta_min), format_pi(fiber.theta_max)],
        "corner_circle": fiber.corner_circle,
        "s": [s_zero, s_pi],
    }
    return OracleReport("fiber", max_residual < 1e-9, max_residual, details)


def coords_check(samples: int = 1000, seed: int = 0) -> OracleReport:
    """Pillowcase coordinates recovered from randomly conjugated representations"""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(samples):
        gamma0 = float(rng.uniform(0.01, math.pi - 0.01))
        theta0 = float(rng.uniform(0.0, 2 * math.pi))
        g = random_unit(rng)
        quats = [conjugate_by(g, q) for q in representation(gamma0, theta0)]
        gamma, theta = pillowcase_coords(*quats)
        d_theta = abs((theta - theta0 + math.pi) % (2 * math.pi) - math.pi)
        worst = max(worst, abs(gamma - gamma0), d_theta)
    return OracleReport("coords", worst < 1e-9, worst, {"samples": samples, "seed": seed})


def write_csv(points: np.ndarray, path: str) -> None:
    """Point cloud rows (gamma, theta, alpha, beta, |phi_t|)"""
    np.savetxt(path, np.asarray(points).reshape(-1, 5), delimiter=",",
               header="gamma,theta,alpha,beta,abs_phi", comments="", fmt="%.12g")
    logger.info(f"Wrote {len(points)} points to {path}")

import math
import logging
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Tuple

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from src.helpers import ArrayLike, as_output

logger = logging.getLogger("boost")


class BoostError(Exception):
    """Base exception for boost kinematics errors"""
    pass


class BoostDomainError(BoostError):
    """Raised when a boost speed or frame tag is outside its domain"""
    pass


class Frame(str, Enum):
    REST = "rest"
    BOOSTED = "boosted"


class Branch(str, Enum):
    STABLE = "stable"
    UNSTABLE = "unstable"


class Direction(str, Enum):
    REST_TO_BOOSTED = "rest-to-boosted"
    BOOSTED_TO_REST = "boosted-to-rest"


@dataclass(frozen=True)
class BoostParams:
    """Frame context: boost speed v and the quantities derived from it"""
    v: float
    gamma: float
    cutoff: float
    growth_rate: float

    @property
    def sigma(self) -> float:
        """Half-width of the rest-frame contour endpoints, sqrt(1 + 1/v)"""
        return math.sqrt(1.0 + 1.0 / self.v)

    @property
    def sampling_step(self) -> float:
        return math.pi / self.cutoff


@dataclass(frozen=True)
class WaveVector:
    omega: complex
    k: complex
    frame: Frame


def make_boost(v: float) -> BoostParams:
    """Build the boost parameters for 0 < v < 1"""
    try:
        v = float(v)
    except (TypeError, ValueError):
        raise BoostDomainError(f"v must lie in (0,1), got {v!r}")
    if not math.isfinite(v) or not 0.0 < v < 1.0:
        raise BoostDomainError(f"v must lie in (0,1), got {v}")

    # (1 - v)(1 + v) keeps gamma accurate near v -> 1
    gamma = 1.0 / math.sqrt((1.0 - v) * (1.0 + v))
    cutoff = (1.0 + 2.0 * v) / math.sqrt(v * (1.0 - v))
    return BoostParams(v=v, gamma=gamma, cutoff=cutoff, growth_rate=1.0 / (gamma * v))


def boost_point(t: ArrayLike, x: ArrayLike, p: BoostParams, direction: Direction) -> Tuple[ArrayLike, ArrayLike]:
    """Lorentz map of spacetime coordinates between the rest and boosted frames"""
    t_arr = np.asarray(t, dtype=float)
    x_arr = np.asarray(x, dtype=float)
    sign = 1.0 if direction == Direction.REST_TO_BOOSTED else -1.0
    t_new = p.gamma * (t_arr + sign * p.v * x_arr)
    x_new = p.gamma * (x_arr + sign * p.v * t_arr)
    return as_output(t_new, t, x), as_output(x_new, t, x)


def boost_wavevector(wv: WaveVector, p: BoostParams, direction: Optional[Direction] = None) -> WaveVector:
    """Apply the Lorentz map to (omega, k) and flip the frame tag"""
    if direction is None:
        direction = Direction.REST_TO_BOOSTED if wv.frame == Frame.REST else Direction.BOOSTED_TO_REST
    expected = Frame.REST if direction == Direction.REST_TO_BOOSTED else Frame.BOOSTED
    if wv.frame != expected:
        raise BoostDomainError(f"cannot apply {direction.value} to a {wv.frame.value}-frame wavevector")

    omega, k = complex(wv.omega), complex(wv.k)
    if direction == Direction.REST_TO_BOOSTED:
        return WaveVector(
            omega=p.gamma * (omega + p.v * k),
            k=p.gamma * (k + p.v * omega),
            frame=Frame.BOOSTED,
        )
    return WaveVector(
        omega=p.gamma * (omega - p.v * k),
        k=p.gamma * (k - p.v * omega),
        frame=Frame.REST,
    )


def _branch_root(k_tilde: ArrayLike, p: BoostParams) -> np.ndarray:
    k = np.asarray(k_tilde, dtype=float)
    # Re(radicand) = 1 for real k, so the principal root never meets its cut
    return np.sqrt(1.0 - 4j * p.v * k / p.gamma)


def stable_dispersion(k_tilde: ArrayLike, p: BoostParams) -> ArrayLike:
    """omega_tilde_minus(k): the admissible branch, Im <= 0 on the real axis"""
    k = np.asarray(k_tilde, dtype=float)
    scale = 0.5j / (p.gamma * p.v ** 2)
    omega = k / p.v + scale * (1.0 - _branch_root(k, p))
    return as_output(omega, k_tilde)


def stable_dispersion_slope(k_tilde: ArrayLike, p: BoostParams) -> ArrayLike:
    """d omega_minus / dk~ = 1/v - 1/(gamma^2 v sqrt(1 - 4ivk~/gamma))"""
    k = np.asarray(k_tilde, dtype=float)
    return as_output(1.0 / p.v - 1.0 / (p.gamma ** 2 * p.v * _branch_root(k, p)), k_tilde)


def unstable_dispersion(k_tilde: ArrayLike, p: BoostParams) -> ArrayLike:
    """omega_tilde_plus(k): the other root of the boosted quadratic"""
    k = np.asarray(k_tilde, dtype=float)
    scale = 0.5j / (p.gamma * p.v ** 2)
    omega = k / p.v + scale * (1.0 + _branch_root(k, p))
    return as_output(omega, k_tilde)


def dispersion(k_tilde: ArrayLike, p: BoostParams, branch: Branch = Branch.STABLE) -> ArrayLike:
    if branch == Branch.STABLE:
        return stable_dispersion(k_tilde, p)
    return unstable_dispersion(k_tilde, p)


def contour_endpoints(p: BoostParams) -> Tuple[complex, complex]:
    """Rest-frame images k(-cutoff), k(+cutoff) of the band edges"""
    return complex(-p.sigma, 1.0), complex(p.sigma, 1.0)


def is_kinetically_admissible(wv: WaveVector, p: Optional[BoostParams] = None) -> bool:
    """|Im k| < 1 in the rest frame; boosted vectors are mapped back first"""
    if wv.frame == Frame.BOOSTED:
        if p is None:
            raise BoostDomainError("boosted-frame admissibility needs the boost parameters")
        wv = boost_wavevector(wv, p, Direction.BOOSTED_TO_REST)
    return abs(complex(wv.k).imag) < 1.0


def admissible_mask(k_tilde: ArrayLike, p: BoostParams) -> ArrayLike:
    """Admissibility of the stable branch at real boosted wavenumbers"""
    k = np.asarray(k_tilde, dtype=float)
    omega = np.asarray(stable_dispersion(k, p))
    k_rest = p.gamma * (k - p.v * omega)
    return as_output(np.abs(k_rest.imag) < 1.0, k_tilde)


def cutoff_frequency(p: BoostParams) -> float:
    return p.cutoff * (2.0 + p.v) / (1.0 + 2.0 * p.v)


def cutoff_closure_residual(p: BoostParams) -> float:
    """Residual of i*gamma*(W - v*L) = gamma^2 (L - v*W)^2 with W = Omega - i/(gamma v)"""
    omega = cutoff_frequency(p) - 1j * p.growth_rate
    lhs = 1j * p.gamma * (omega - p.v * p.cutoff)
    rhs = p.gamma ** 2 * (p.cutoff - p.v * omega) ** 2
    return abs(lhs - rhs)


def solve_cutoff(p: BoostParams) -> float:
    """Locate the cutoff as the root of Im omega_minus(k) = -1/(gamma v)"""
    def saturation(k: float) -> float:
        return stable_dispersion(k, p).imag + p.growth_rate

    upper = 1.0
    while saturation(upper) > 0.0:
        upper *= 2.0
    root = brentq(saturation, 0.0, upper, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=200)
    logger.debug(f"cutoff root at v={p.v}: {root!r} (closed form {p.cutoff!r})")
    return root


def locate_cutoff_minimum(points: int = 10_000, lower: float = 0.01, upper: float = 0.99) -> Tuple[float, float]:
    """(v, lambda) at the smallest cutoff: a grid scan, polished by a bounded Brent search around the best node"""
    if not 0.0 < lower < upper < 1.0 or points < 3:
        raise BoostDomainError(f"cutoff scan needs 0 < lower < upper < 1 and at least 3 points, got [{lower}, {upper}] with {points}")
    speeds = np.linspace(lower, upper, points)
    cutoffs = np.array([make_boost(v).cutoff for v in speeds])
    best = int(np.argmin(cutoffs))
    step = speeds[1] - speeds[0]
    bracket = (max(lower, speeds[best] - step), min(upper, speeds[best] + step))
    result = minimize_scalar(lambda v: make_boost(v).cutoff, bounds=bracket, method="bounded", options={"xatol": 1e-12})
    logger.debug(f"cutoff minimum: grid node v={speeds[best]:.6g}, refined v={result.x!r}")
    return float(result.x), float(result.fun)

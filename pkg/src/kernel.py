"""
Fundamental solution of the boosted diffusion equation and the boosted heat kernel.

In the rest frame the kernel is a contour integral between the endpoints
k(-L) = i - sigma and k(+L) = i + sigma:

    K(t, x) = gamma/(2L) * integral (1 - 2ivk) exp(ikx - k^2 t) dk

Writing M_m for the moments of exp(ikx - k^2 t) along that contour, every
x-derivative is a combination of two moments. M_0 is the Gaussian-erf bracket;
higher moments follow from integrating d/dk[k^m E] by parts, which divides by
2t at every step. Where that recursion would lose more than a few digits (|t|
small against 1 + |x|) the moments are summed by Gauss-Legendre along the chord
Im k = 1 instead. Below SMALL_TIME_THRESHOLD the t = 0 closed form plus one
Taylor term is used.
"""
import math
import logging
from dataclasses import dataclass
from typing import List

import numpy as np

from src.boost import BoostParams, Direction, Frame, boost_point, contour_endpoints, stable_dispersion, unstable_dispersion
from src.helpers import ArrayLike, as_output
from src.quadrature import resolving_nodes, segment_rule
from src.special import asymptotic_parts, gaussian_erf_scaled, sinc_derivative

logger = logging.getLogger("kernel")

SMALL_TIME_THRESHOLD = 1e-6
GROWTH_LIMIT = 1e290
MAX_DERIVATIVE_ORDER = 3
RECURRENCE_AMPLIFICATION_LIMIT = 500.0
# sigma^2 t beyond which the chord integrand outgrows its endpoint values
CHORD_TIME_LIMIT = 4.0
CHORD_CHUNK = 1024

_LOG_GROWTH_LIMIT = math.log(GROWTH_LIMIT)
_SQRT_PI = math.sqrt(math.pi)


class KernelError(Exception):
    """Base exception for kernel evaluation"""
    pass


class KernelDomainError(KernelError):
    """Raised when an evaluation point is outside the operation's domain"""
    pass


class KernelOverflowError(KernelError):
    """Raised when the a-priori magnitude exp(|t~|/(gamma v)) exceeds GROWTH_LIMIT"""

    def __init__(self, exponent: float):
        self.exponent = exponent
        super().__init__(f"kernel magnitude bound exp({exponent:.6g}) exceeds {GROWTH_LIMIT:g}")


@dataclass(frozen=True)
class SpacetimePoint:
    t: float
    x: float
    frame: Frame

    def to_rest(self, p: BoostParams) -> "SpacetimePoint":
        if self.frame == Frame.REST:
            return self
        t, x = boost_point(self.t, self.x, p, Direction.BOOSTED_TO_REST)
        return SpacetimePoint(t=t, x=x, frame=Frame.REST)

    def to_boosted(self, p: BoostParams) -> "SpacetimePoint":
        if self.frame == Frame.BOOSTED:
            return self
        t, x = boost_point(self.t, self.x, p, Direction.REST_TO_BOOSTED)
        return SpacetimePoint(t=t, x=x, frame=Frame.BOOSTED)


def _check_growth(t_tilde: np.ndarray, p: BoostParams) -> None:
    if t_tilde.size == 0:
        return
    exponent = float(np.max(np.abs(t_tilde))) * p.growth_rate
    if exponent > _LOG_GROWTH_LIMIT:
        raise KernelOverflowError(exponent)


def _initial_derivative(x: np.ndarray, p: BoostParams, order: int) -> np.ndarray:
    """order-th derivative of exp(-x) sinc(sigma x)"""
    sigma = p.sigma
    total = np.zeros_like(x)
    for j in range(order + 1):
        total = total + math.comb(order, j) * (-1) ** (order - j) * sigma ** j * sinc_derivative(sigma * x, j)
    return np.exp(-x) * total


def _initial_slice(x: np.ndarray, p: BoostParams, order: int) -> np.ndarray:
    """order-th x-derivative of K(0, x) = (1 - 2v d/dx)[exp(-x) sinc(sigma x)] / (1 + 2v)"""
    value = _initial_derivative(x, p, order) - 2.0 * p.v * _initial_derivative(x, p, order + 1)
    return value / (1.0 + 2.0 * p.v)


def _contour_moments(t: np.ndarray, x: np.ndarray, p: BoostParams, count: int) -> List[np.ndarray]:
    """M_0 .. M_{count-1} for |t| >= SMALL_TIME_THRESHOLD"""
    k_minus, k_plus = contour_endpoints(p)
    s = np.sqrt(t.astype(complex))
    e_plus = np.exp(1j * k_plus * x - k_plus ** 2 * t)
    e_minus = np.exp(1j * k_minus * x - k_minus ** 2 * t)

    # exp(b) erf(u) = sign * (exp(b) - E w(i sign u)), with b = -x^2/4t and E = exp(b - u^2)
    u_plus = s * k_plus - 0.5j * x / s
    u_minus = s * k_minus - 0.5j * x / s
    sign_plus, w_plus = asymptotic_parts(u_plus)
    sign_minus, w_minus = asymptotic_parts(u_minus)
    f_plus = e_plus * w_plus
    f_minus = e_minus * w_minus

    same = sign_plus == sign_minus
    # opposite signs only occur for t > 0, where exp(b) <= 1
    gauss = np.exp(np.where(same, 0.0, -x * x / (4.0 * np.where(same, 1.0, t))))
    bracket = np.where(
        same,
        sign_plus * (f_minus - f_plus),
        (sign_plus - sign_minus) * gauss - sign_plus * f_plus + sign_minus * f_minus,
    )

    moments = [_SQRT_PI / (2.0 * s) * bracket]
    for m in range(count - 1):
        previous = m * moments[m - 1] if m > 0 else 0.0
        edge = k_plus ** m * e_plus - k_minus ** m * e_minus
        moments.append((previous + 1j * x * moments[m] - edge) / (2.0 * t))
    return moments


def _recurrence_is_lossy(t: np.ndarray, x: np.ndarray, p: BoostParams, order: int) -> np.ndarray:
    """Rounding in the moment recursion grows by about (order + 1 + |x|)/(2|t|) per step"""
    with np.errstate(divide="ignore"):
        amplification = np.maximum((order + 1.0 + np.abs(x)) / (2.0 * np.abs(t)), 1.0)
    lossy = (order + 1) * np.log(amplification) > math.log(RECURRENCE_AMPLIFICATION_LIMIT)
    return lossy & (t * p.sigma ** 2 <= CHORD_TIME_LIMIT)


def _chord_moments(t: np.ndarray, x: np.ndarray, p: BoostParams, count: int) -> List[np.ndarray]:
    """M_0 .. M_{count-1} by quadrature along k = i + s, |s| <= sigma"""
    moments = [np.empty(t.shape, dtype=complex) for _ in range(count)]
    for start in range(0, t.size, CHORD_CHUNK):
        chunk = slice(start, start + CHORD_CHUNK)
        ts, xs = t[chunk], x[chunk]
        span = 2.0 * p.sigma * float(np.max(np.abs(xs) + 2.0 * np.abs(ts)))
        s, w = segment_rule(resolving_nodes(span), -p.sigma, p.sigma)
        k = 1j + s
        terms = np.exp(1j * np.multiply.outer(xs, k) - np.multiply.outer(ts, k * k)) * w
        for m in range(count):
            moments[m][chunk] = terms @ k ** m
    return moments


def kernel_rest_derivative(t: ArrayLike, x: ArrayLike, p: BoostParams, order: int = 0) -> ArrayLike:
    """order-th x-derivative of the rest-frame fundamental solution"""
    if not 0 <= order <= MAX_DERIVATIVE_ORDER:
        raise KernelDomainError(f"derivative order must lie in [0, {MAX_DERIVATIVE_ORDER}], got {order}")
    t_arr, x_arr = np.broadcast_arrays(np.asarray(t, dtype=float), np.asarray(x, dtype=float))
    t_flat = np.atleast_1d(t_arr).ravel()
    x_flat = np.atleast_1d(x_arr).ravel()
    if not (np.all(np.isfinite(t_flat)) and np.all(np.isfinite(x_flat))):
        raise KernelDomainError("kernel arguments must be finite")
    _check_growth(p.gamma * (t_flat + p.v * x_flat), p)

    result = np.empty(t_flat.shape)
    small = np.abs(t_flat) < SMALL_TIME_THRESHOLD
    if np.any(small):
        ts, xs = t_flat[small], x_flat[small]
        # d/dt K = d^2/dx^2 K in the rest frame
        result[small] = _initial_slice(xs, p, order) + ts * _initial_slice(xs, p, order + 2)
    chord = ~small & _recurrence_is_lossy(t_flat, x_flat, p, order)
    closed = ~(small | chord)
    for mask, moment_source in ((chord, _chord_moments), (closed, _contour_moments)):
        if np.any(mask):
            moments = moment_source(t_flat[mask], x_flat[mask], p, order + 2)
            combination = (1j ** order) * (moments[order] - 2j * p.v * moments[order + 1])
            result[mask] = (p.gamma / (2.0 * p.cutoff) * combination).real

    return as_output(result.reshape(t_arr.shape), t, x)


def kernel_rest(t: ArrayLike, x: ArrayLike, p: BoostParams) -> ArrayLike:
    """Fundamental solution K(t, x) in the rest frame"""
    return kernel_rest_derivative(t, x, p, 0)


def kernel_initial(x: ArrayLike, p: BoostParams) -> ArrayLike:
    """K(0, x) in closed form"""
    arr = np.asarray(x, dtype=float)
    return as_output(_initial_slice(np.atleast_1d(arr), p, 0).reshape(arr.shape), x)


def kernel_rest_erfi(t: ArrayLike, x: ArrayLike, p: BoostParams) -> ArrayLike:
    """K(t, x) for t < 0 written with sqrt|t| and erfi instead of a complex sqrt(t)"""
    t_arr, x_arr = np.broadcast_arrays(np.asarray(t, dtype=float), np.asarray(x, dtype=float))
    if np.any(t_arr >= 0.0):
        raise KernelDomainError("the erfi form only applies to t < 0")
    _check_growth(p.gamma * (t_arr + p.v * x_arr), p)

    k_minus, k_plus = contour_endpoints(p)
    r = np.sqrt(-t_arr)
    gauss_exponent = x_arr * x_arr / (4.0 * r * r)
    y_plus = r * k_plus + 0.5j * x_arr / r
    y_minus = r * k_minus + 0.5j * x_arr / r
    # exp(b) erfi(y) = -i exp(b) erf(iy)
    bracket = -1j * (
        np.asarray(gaussian_erf_scaled(1j * y_plus, gauss_exponent))
        - np.asarray(gaussian_erf_scaled(1j * y_minus, gauss_exponent))
    )
    edges = np.exp(1j * k_plus * x_arr - k_plus ** 2 * t_arr) - np.exp(1j * k_minus * x_arr - k_minus ** 2 * t_arr)
    value = p.gamma * _SQRT_PI / (4.0 * p.cutoff * r) * (
        bracket * (1.0 - p.v * x_arr / (r * r)) - 2j * p.v / (r * _SQRT_PI) * edges
    )
    return as_output(value.real, t, x)


def kernel_boosted(t_tilde: ArrayLike, x_tilde: ArrayLike, p: BoostParams) -> ArrayLike:
    """Fundamental solution in the boosted frame, K(0, x~) = sinc(L x~)"""
    tb, xb = np.broadcast_arrays(np.asarray(t_tilde, dtype=float), np.asarray(x_tilde, dtype=float))
    _check_growth(np.atleast_1d(tb), p)
    t, x = boost_point(tb, xb, p, Direction.BOOSTED_TO_REST)
    return as_output(np.asarray(kernel_rest(t, x, p)), t_tilde, x_tilde)


def evaluate_kernel(pt: SpacetimePoint, p: BoostParams) -> float:
    if pt.frame == Frame.REST:
        return kernel_rest(pt.t, pt.x, p)
    return kernel_boosted(pt.t, pt.x, p)


def heat_kernel(t: ArrayLike, x: ArrayLike) -> ArrayLike:
    """exp(-x^2/4t)/sqrt(4 pi t) for t > 0, zero otherwise"""
    t_arr, x_arr = np.broadcast_arrays(np.asarray(t, dtype=float), np.asarray(x, dtype=float))
    positive = t_arr > 0.0
    safe_t = np.where(positive, t_arr, 1.0)
    value = np.where(positive, np.exp(-x_arr * x_arr / (4.0 * safe_t)) / np.sqrt(4.0 * math.pi * safe_t), 0.0)
    return as_output(value, t, x)


def green_boosted(t_tilde: ArrayLike, x_tilde: ArrayLike, p: BoostParams) -> ArrayLike:
    """Boosted retarded Green function, identically zero for x~ >= t~/v"""
    tb, xb = np.broadcast_arrays(np.asarray(t_tilde, dtype=float), np.asarray(x_tilde, dtype=float))
    tau = tb - p.v * xb
    inside = tau > 0.0
    safe_tau = np.where(inside, tau, 1.0)
    drift = xb - p.v * tb
    value = np.where(
        inside,
        np.exp(-p.gamma * drift * drift / (4.0 * safe_tau)) / np.sqrt(4.0 * math.pi * p.gamma * safe_tau),
        0.0,
    )
    return as_output(value, t_tilde, x_tilde)


def green_fourier(t_tilde: ArrayLike, k_tilde: ArrayLike, p: BoostParams) -> ArrayLike:
    """Spatial Fourier transform of the boosted Green function"""
    tb, kb = np.broadcast_arrays(np.asarray(t_tilde, dtype=float), np.asarray(k_tilde, dtype=float))
    if np.any(tb == 0.0):
        raise KernelDomainError("green_fourier is undefined at t~ = 0 (no branch selected)")
    prefactor = 1.0 / np.sqrt(p.gamma * (p.gamma - 4j * p.v * kb))
    omega = np.where(tb > 0.0, stable_dispersion(kb, p), unstable_dispersion(kb, p))
    return as_output(prefactor * np.exp(-1j * omega * tb), t_tilde, k_tilde)

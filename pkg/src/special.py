"""
Complex error functions in plain double precision.

erf is summed from its Maclaurin series inside SERIES_RADIUS. Outside, it is
written through the Faddeeva function w(z) = exp(-z^2) erfc(-iz), which stays
bounded in the closed upper half-plane. w itself uses the Laplace continued
fraction far from the origin and Weideman's rational approximation near it.
The same split lets callers fuse exp(b) with erf(a) when either factor alone
would overflow.
"""
import math
import logging
from functools import lru_cache
from typing import Tuple

import numpy as np

from src.helpers import ArrayLike, as_output

logger = logging.getLogger("special")

SERIES_RADIUS = 2.0
SERIES_TERMS = 60
WEIDEMAN_TERMS = 36
LOG_DOUBLE_MAX = math.log(np.finfo(float).max)

_TWO_OVER_SQRT_PI = 2.0 / math.sqrt(math.pi)
_INV_SQRT_PI = 1.0 / math.sqrt(math.pi)


class SpecialFunctionError(Exception):
    """Base exception for special function evaluation"""
    pass


class SpecialFunctionDomainError(SpecialFunctionError):
    """Raised for non-finite arguments"""
    pass


class SpecialFunctionOverflowError(SpecialFunctionError):
    """Raised when a result cannot be represented in double precision"""

    def __init__(self, exponent: float):
        self.exponent = exponent
        super().__init__(f"result overflows double precision: growth exponent {exponent:.6g} exceeds {LOG_DOUBLE_MAX:.6g}")


def _complex_input(z: ArrayLike) -> np.ndarray:
    arr = np.asarray(z, dtype=complex)
    if not np.all(np.isfinite(arr)):
        raise SpecialFunctionDomainError("argument must be finite")
    return arr


def _erf_series(z: np.ndarray) -> np.ndarray:
    z2 = z * z
    term = z.copy()
    total = z.copy()
    for n in range(1, SERIES_TERMS):
        term = -term * z2 / n
        total = total + term / (2 * n + 1)
    return _TWO_OVER_SQRT_PI * total


@lru_cache(maxsize=None)
def _weideman_coefficients(n_terms: int) -> Tuple[float, np.ndarray]:
    m = 2 * n_terms
    index = np.arange(-m + 1, m)
    length = math.sqrt(n_terms / math.sqrt(2.0))
    theta = index * math.pi / m
    t = length * np.tan(theta / 2.0)
    samples = np.concatenate(([0.0], np.exp(-t * t) * (length * length + t * t)))
    coefficients = np.real(np.fft.fft(np.fft.fftshift(samples))) / (2 * m)
    return length, np.flipud(coefficients[1:n_terms + 1])


def _faddeeva_rational(z: np.ndarray) -> np.ndarray:
    length, coefficients = _weideman_coefficients(WEIDEMAN_TERMS)
    denominator = length - 1j * z
    ratio = (length + 1j * z) / denominator
    polynomial = np.polyval(coefficients, ratio)
    return 2.0 * polynomial / denominator ** 2 + _INV_SQRT_PI / denominator


def _faddeeva_continued_fraction(z: np.ndarray, depth: np.ndarray) -> np.ndarray:
    remainder = np.zeros_like(z)
    for n in range(int(depth.max()), 0, -1):
        active = n <= depth
        remainder = np.where(active, (0.5 * n) / (z - remainder), remainder)
    return 1j * _INV_SQRT_PI / (z - remainder)


def _faddeeva_upper(z: np.ndarray) -> np.ndarray:
    """w(z) for Im z >= 0"""
    result = np.empty_like(z)
    ellipse = (z.real / 6.3) ** 2 + (z.imag / 4.4) ** 2
    far = ellipse >= 1.0
    if np.any(far):
        rho = np.sqrt(ellipse[far])
        depth = (4.0 + 1442.0 / (26.0 * rho + 77.0)).astype(int)
        result[far] = _faddeeva_continued_fraction(z[far], depth)
    if np.any(~far):
        result[~far] = _faddeeva_rational(z[~far])
    return result


def faddeeva(z: ArrayLike) -> ArrayLike:
    """w(z) = exp(-z^2) erfc(-iz) on the whole complex plane"""
    arr = _complex_input(z)
    upper = arr.imag >= 0.0
    mirrored = np.where(upper, arr, -arr)
    w = _faddeeva_upper(np.atleast_1d(mirrored)).reshape(arr.shape)
    if not np.all(upper):
        lower = ~upper
        with np.errstate(over="ignore", invalid="ignore"):
            w = np.where(lower, 2.0 * np.exp(-arr * arr) - w, w)
    return as_output(w, z)


def asymptotic_parts(z: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """sign(Re z) and w(i*sign*z), the bounded factor of erfc in the right half-plane"""
    sign = np.where(z.real >= 0.0, 1.0, -1.0)
    return sign, _faddeeva_upper(1j * sign * z)


def erf_complex(z: ArrayLike) -> ArrayLike:
    """Error function of complex argument, odd and conjugate-symmetric"""
    arr = np.atleast_1d(_complex_input(z))
    result = np.empty_like(arr)
    small = np.abs(arr) < SERIES_RADIUS
    if np.any(small):
        result[small] = _erf_series(arr[small])
    if np.any(~small):
        big = arr[~small]
        sign, w = asymptotic_parts(big)
        exponent = -(big * big)
        with np.errstate(divide="ignore"):
            growth = exponent.real + np.log(np.abs(w))
        if np.any(growth > LOG_DOUBLE_MAX):
            raise SpecialFunctionOverflowError(float(np.max(exponent.real)))
        result[~small] = sign * (1.0 - np.exp(exponent) * w)
    return as_output(result.reshape(np.shape(z)), z)


def erfi(z: ArrayLike) -> ArrayLike:
    """Imaginary error function -i*erf(iz)"""
    arr = _complex_input(z)
    return as_output(-1j * np.asarray(erf_complex(1j * arr)), z)


def gaussian_erf_scaled(a: ArrayLike, b: ArrayLike) -> ArrayLike:
    """exp(b) * erf(a) without overflowing either factor on its own"""
    a_arr, b_arr = np.broadcast_arrays(_complex_input(a), _complex_input(b))
    a_flat = np.atleast_1d(a_arr).ravel()
    b_flat = np.atleast_1d(b_arr).ravel()
    result = np.zeros_like(a_flat)
    growth = np.full(a_flat.shape, -np.inf)

    small = np.abs(a_flat) < SERIES_RADIUS
    if np.any(small):
        series = _erf_series(a_flat[small])
        nonzero = series != 0
        with np.errstate(divide="ignore"):
            log_erf = np.where(nonzero, np.log(np.where(nonzero, series, 1.0)), -np.inf)
        growth[small] = np.where(nonzero, b_flat[small].real + log_erf.real, -np.inf)
        exponent = b_flat[small] + log_erf
        safe = np.where(nonzero, exponent, 0.0)
        result[small] = np.where(nonzero & (growth[small] <= LOG_DOUBLE_MAX), np.exp(safe), 0.0)

    if np.any(~small):
        big_a = a_flat[~small]
        big_b = b_flat[~small]
        sign, w = asymptotic_parts(big_a)
        tail_exponent = big_b - big_a * big_a
        with np.errstate(divide="ignore", over="ignore", under="ignore", invalid="ignore"):
            growth[~small] = np.maximum(big_b.real, tail_exponent.real + np.log(np.abs(w)))
            result[~small] = sign * (np.exp(big_b) - np.exp(tail_exponent) * w)

    worst = float(np.max(growth))
    if worst > LOG_DOUBLE_MAX:
        raise SpecialFunctionOverflowError(worst)
    return as_output(result.reshape(a_arr.shape), a, b)


def sinc(x: ArrayLike) -> ArrayLike:
    """sin(x)/x with sinc(0) = 1"""
    arr = np.asarray(x, dtype=float)
    x2 = arr * arr
    near = np.abs(arr) < 1e-4
    with np.errstate(divide="ignore", invalid="ignore"):
        far_value = np.sin(arr) / np.where(near, 1.0, arr)
    value = np.where(near, 1.0 - x2 / 6.0 + x2 * x2 / 120.0, far_value)
    return as_output(value, x)


def sinc_derivative(u: ArrayLike, order: int) -> ArrayLike:
    """order-th derivative of sin(u)/u"""
    if order == 0:
        return sinc(u)
    arr = np.atleast_1d(np.asarray(u, dtype=float))
    near = np.abs(arr) < 8.0
    value = np.empty_like(arr)

    if np.any(near):
        un = arr[near]
        total = np.zeros_like(un)
        # sinc(u) = sum_m (-1)^m u^(2m) / (2m+1)!, differentiated term by term
        for m in range((order + 1) // 2, (order + 1) // 2 + 45):
            power = 2 * m - order
            coefficient = (-1) ** m * math.factorial(2 * m) / (math.factorial(power) * math.factorial(2 * m + 1))
            total = total + coefficient * un ** power
        value[near] = total

    if np.any(~near):
        uf = arr[~near]
        total = np.zeros_like(uf)
        for j in range(order + 1):
            inverse = (-1) ** (order - j) * math.factorial(order - j) / uf ** (order - j + 1)
            total = total + math.comb(order, j) * np.sin(uf + j * math.pi / 2.0) * inverse
        value[~near] = total

    return as_output(value.reshape(np.shape(u)), u)

import math

import mpmath
import numpy as np

from src.special import erf_complex, erfi, faddeeva, gaussian_erf_scaled, sinc_derivative
from src.suites.base_suite import BaseSuite, Outcome

WORKING_DIGITS = 40


def _sample_points(seed: int, count: int, radius: float) -> np.ndarray:
    rng = np.random.default_rng(seed)
    return rng.uniform(-radius, radius, count) + 1j * rng.uniform(-radius, radius, count)


def _disk_points(seed: int, count: int, radius: float) -> np.ndarray:
    rng = np.random.default_rng(seed)
    return radius * np.sqrt(rng.uniform(0.0, 1.0, count)) * np.exp(2j * math.pi * rng.uniform(0.0, 1.0, count))


def _worst(values: np.ndarray, reference) -> float:
    worst = 0.0
    for value, exact in zip(np.atleast_1d(values), reference):
        exact = complex(exact)
        worst = max(worst, abs(complex(value) - exact) / max(1.0, abs(exact)))
    return worst


class SpecialSuite(BaseSuite):
    """Double-precision error functions against mpmath at 40 digits"""
    per_speed = False

    @property
    def name(self) -> str:
        return "special"

    def register_checks(self) -> None:
        self._register("erf", "erf_complex against mpmath.erf", self.erf)
        self._register("erfi", "erfi against mpmath.erfi", self.erfi)
        self._register("faddeeva", "w(z) against exp(-z^2) erfc(-iz)", self.faddeeva)
        self._register("scaled-product", "exp(b) erf(a) without intermediate overflow", self.scaled_product)
        self._register("sinc-derivatives", "sinc derivatives against mpmath.diff", self.sinc_derivatives)
        self._register("symmetry", "erf(-z) = -erf(z) and erf(conj z) = conj erf(z) on 1000 points of |z| <= 10", self.symmetry)
        self._register("derivative", "centred difference of erf against 2/sqrt(pi) exp(-z^2) at 100 points", self.derivative)
        self._register("far-field", "erf_complex against mpmath.erf on 6 < |z| <= 12", self.far_field)

    def erf(self) -> Outcome:
        z = _sample_points(11, 200, 6.0)
        with mpmath.workdps(WORKING_DIGITS):
            reference = [mpmath.erf(mpmath.mpc(p.real, p.imag)) for p in z]
        return Outcome(_worst(erf_complex(z), reference), self.tol(1e-13))

    def erfi(self) -> Outcome:
        z = _sample_points(12, 200, 6.0)
        with mpmath.workdps(WORKING_DIGITS):
            reference = [mpmath.erfi(mpmath.mpc(p.real, p.imag)) for p in z]
        return Outcome(_worst(erfi(z), reference), self.tol(1e-13))

    def faddeeva(self) -> Outcome:
        z = _sample_points(13, 200, 8.0)
        z = z.real + 1j * np.abs(z.imag)
        with mpmath.workdps(WORKING_DIGITS):
            reference = []
            for p in z:
                zz = mpmath.mpc(p.real, p.imag)
                reference.append(mpmath.exp(-zz * zz) * mpmath.erfc(-1j * zz))
        worst = 0.0
        for value, exact in zip(np.asarray(faddeeva(z)), reference):
            exact = complex(exact)
            worst = max(worst, abs(complex(value) - exact) / abs(exact))
        return Outcome(worst, self.tol(1e-12))

    def scaled_product(self) -> Outcome:
        rng = np.random.default_rng(14)
        a = _sample_points(15, 100, 20.0)
        b = rng.uniform(-400.0, 400.0, 100)
        # keep the products representable
        b = np.minimum(b, 600.0 - np.maximum(0.0, -(a * a).real))
        with mpmath.workdps(WORKING_DIGITS):
            reference = [mpmath.exp(bb) * mpmath.erf(mpmath.mpc(aa.real, aa.imag)) for aa, bb in zip(a, b)]
        worst = 0.0
        for value, exact in zip(np.asarray(gaussian_erf_scaled(a, b)), reference):
            magnitude = abs(complex(exact))
            if magnitude == 0.0:
                continue
            worst = max(worst, abs(complex(value) - complex(exact)) / max(magnitude, 1e-300))
        return Outcome(worst, self.tol(1e-12))

    def sinc_derivatives(self) -> Outcome:
        u = np.concatenate((np.linspace(-12.0, 12.0, 49), [1e-3, -2e-5]))
        worst = 0.0
        with mpmath.workdps(WORKING_DIGITS):
            for order in range(1, 7):
                reference = [mpmath.diff(lambda s: mpmath.sinc(s), mpmath.mpf(float(x)), order) for x in u]
                values = np.asarray(sinc_derivative(u, order))
                worst = max(worst, _worst(values, reference))
        return Outcome(worst, self.tol(1e-12))

    def symmetry(self) -> Outcome:
        z = _disk_points(16, 1000, 10.0)
        value = np.asarray(erf_complex(z))
        scale = np.maximum(1.0, np.abs(value))
        odd = np.abs(np.asarray(erf_complex(-z)) + value) / scale
        conjugate = np.abs(np.asarray(erf_complex(np.conj(z))) - np.conj(value)) / scale
        return Outcome(float(max(np.max(odd), np.max(conjugate))), self.tol(1e-13))

    def derivative(self) -> Outcome:
        h = 1e-6
        # the series disk, and the wedge |Im z| >= |Re z| where exp(-z^2) is not small
        inner = _disk_points(17, 50, 1.5)
        rng = np.random.default_rng(18)
        angle = np.where(rng.uniform(size=50) < 0.5, 0.5, -0.5) * math.pi + rng.uniform(-0.25, 0.25, 50) * math.pi
        outer = rng.uniform(2.5, 4.0, 50) * np.exp(1j * angle)
        z = np.concatenate((inner, outer))
        difference = (np.asarray(erf_complex(z + h)) - np.asarray(erf_complex(z - h))) / (2.0 * h)
        exact = 2.0 / math.sqrt(math.pi) * np.exp(-z * z)
        return Outcome(float(np.max(np.abs(difference - exact) / np.abs(exact))), self.tol(1e-7))

    def far_field(self) -> Outcome:
        rng = np.random.default_rng(19)
        z = rng.uniform(6.0, 12.0, 200) * np.exp(2j * math.pi * rng.uniform(0.0, 1.0, 200))
        with mpmath.workdps(WORKING_DIGITS):
            reference = [mpmath.erf(mpmath.mpc(p.real, p.imag)) for p in z]
        worst = 0.0
        for value, exact in zip(np.asarray(erf_complex(z)), reference):
            exact = complex(exact)
            worst = max(worst, abs(complex(value) - exact) / abs(exact))
        return Outcome(worst, self.tol(1e-11))

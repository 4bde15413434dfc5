"""
Brute-force evaluators that every closed form is checked against.

Band integrals over [-L, L] use Gauss-Legendre nodes; the rest-frame kernel is
integrated along an explicit path between the contour endpoints; the Fourier
transform of the boosted Green function goes through scipy's adaptive quadrature.
Apart from the node tables in src/quadrature.py, none of this shares code with
the closed forms it verifies.
"""
import math
import logging
import warnings
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Optional, Tuple

import numpy as np
from scipy.integrate import IntegrationWarning, quad

from src.bandlimited import FieldSlice, Provenance
from src.boost import BoostParams, Frame, stable_dispersion, unstable_dispersion
from src.helpers import ArrayLike, as_output
from src.quadrature import resolving_nodes, segment_rule

logger = logging.getLogger("oracle")

MAX_REFINEMENTS = 6

Dispersion = Callable[[np.ndarray], np.ndarray]


class OracleError(Exception):
    """Base exception for oracle evaluation"""
    pass


class OracleConsistencyError(OracleError):
    """Raised when a quadrature that must be real leaves an imaginary residue"""
    pass


class OracleAccuracyError(OracleError):
    """Raised when a quadrature does not settle below the requested tolerance"""

    def __init__(self, estimate: float, message: str = "quadrature did not converge"):
        self.estimate = estimate
        super().__init__(f"{message}: achieved error estimate {estimate:.3g}")


class QuadratureScheme(str, Enum):
    GAUSS_LEGENDRE = "gauss-legendre"
    ADAPTIVE = "adaptive"


class ContourPath(str, Enum):
    PARABOLA = "parabola"
    CHORD = "chord"


@dataclass(frozen=True)
class QuadratureSpec:
    nodes: int = 400
    scheme: QuadratureScheme = QuadratureScheme.GAUSS_LEGENDRE
    tolerance: float = 1e-11

    def __post_init__(self):
        if self.nodes < 8:
            raise OracleError(f"quadrature needs at least 8 nodes, got {self.nodes}")
        if not self.tolerance > 0.0:
            raise OracleError(f"quadrature tolerance must be positive, got {self.tolerance}")

    def doubled(self) -> "QuadratureSpec":
        return QuadratureSpec(nodes=2 * self.nodes, scheme=self.scheme, tolerance=self.tolerance)


def node_count(q: QuadratureSpec, phase_span: float) -> int:
    """Enough nodes to resolve phase_span radians of oscillation, never fewer than q.nodes"""
    return resolving_nodes(phase_span, q.nodes)


def stable_branch(p: BoostParams) -> Dispersion:
    return lambda k: np.asarray(stable_dispersion(k, p))


def poisoned_dispersion(p: BoostParams) -> Dispersion:
    """Stable branch with the square-root sign flipped for k~ > 0

    Mimics a misplaced branch cut. The resulting integrand is no longer
    conjugate-symmetric, so kernel quadratures at t~ != 0 pick up an
    imaginary part.
    """
    def flipped(k: np.ndarray) -> np.ndarray:
        k = np.asarray(k, dtype=float)
        return np.where(k > 0.0, unstable_dispersion(k, p), stable_dispersion(k, p))

    return flipped


def _band_integral(phi: Callable[[np.ndarray], np.ndarray], t_tilde: float, x: np.ndarray, p: BoostParams, n: int, dispersion: Dispersion) -> np.ndarray:
    k, w = segment_rule(n, -p.cutoff, p.cutoff)
    amplitude = w * np.asarray(phi(k)) * np.exp(-1j * dispersion(k) * t_tilde) / (2.0 * math.pi)
    return np.exp(1j * np.multiply.outer(x, k)) @ amplitude


def spectral_synthesis(
    phi: Callable[[np.ndarray], np.ndarray],
    t_tilde: float,
    x_tilde: ArrayLike,
    p: BoostParams,
    q: QuadratureSpec = QuadratureSpec(),
    dispersion: Optional[Dispersion] = None,
    extent: float = 0.0,
) -> ArrayLike:
    """Complex band integral of (dk/2pi) phi(k) exp(ik x - i omega(k) t)

    extent is the half-width of the region phi is concentrated on; it adds to
    the phase the nodes have to resolve.
    """
    dispersion = dispersion or stable_branch(p)
    x = np.atleast_1d(np.asarray(x_tilde, dtype=float))
    span = p.cutoff * (float(np.max(np.abs(x))) + extent + abs(t_tilde) / p.v)
    n = node_count(q, span)

    value = _band_integral(phi, t_tilde, x, p, n, dispersion)
    if q.scheme == QuadratureScheme.ADAPTIVE:
        for _ in range(MAX_REFINEMENTS):
            n *= 2
            refined = _band_integral(phi, t_tilde, x, p, n, dispersion)
            change = float(np.max(np.abs(refined - value)))
            value = refined
            if change <= q.tolerance * max(1.0, float(np.max(np.abs(value)))):
                break
        else:
            raise OracleAccuracyError(change, f"band integral still moving after {n} nodes")
    logger.debug(f"band integral with {n} nodes, phase span {span:.3g}")
    return as_output(value.reshape(np.shape(x_tilde)), x_tilde)


def _require_real(value: np.ndarray, q: QuadratureSpec, what: str) -> np.ndarray:
    scale = np.maximum(1.0, np.abs(value.real))
    residue = float(np.max(np.abs(value.imag) / scale))
    if residue > q.tolerance:
        raise OracleConsistencyError(f"{what} left an imaginary residue {residue:.3g} (tolerance {q.tolerance:g})")
    return value.real


def oracle_kernel(
    t_tilde: float,
    x_tilde: ArrayLike,
    p: BoostParams,
    q: QuadratureSpec = QuadratureSpec(),
    dispersion: Optional[Dispersion] = None,
) -> ArrayLike:
    """Boosted kernel as the band integral of exp(ik~x~ - i omega(k~) t~) dk~/(2L)"""
    flat = lambda k: np.full(np.shape(k), math.pi / p.cutoff)
    value = np.asarray(spectral_synthesis(flat, t_tilde, x_tilde, p, q, dispersion))
    return as_output(_require_real(value, q, "kernel band integral"), x_tilde)


def _contour(path: ContourPath, sigma: float, tau: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    if path == ContourPath.PARABOLA:
        return tau + 1j * tau * tau / sigma ** 2, 1.0 + 2j * tau / sigma ** 2
    return tau + 1j, np.ones(tau.shape, dtype=complex)


def oracle_kernel_contour(
    t: float,
    x: ArrayLike,
    p: BoostParams,
    q: QuadratureSpec = QuadratureSpec(),
    path: ContourPath = ContourPath.PARABOLA,
) -> ArrayLike:
    """Rest-frame kernel as the integral of gamma(1 - 2ivk)/(2L) exp(ikx - k^2 t) along a path"""
    sigma = p.sigma
    x_arr = np.atleast_1d(np.asarray(x, dtype=float))
    span = sigma * float(np.max(np.abs(x_arr))) + 2.0 * sigma ** 2 * abs(t)
    n = node_count(q, span)

    tau, w = segment_rule(n, -sigma, sigma)
    k, dk = _contour(path, sigma, tau)
    amplitude = w * dk * p.gamma * (1.0 - 2j * p.v * k) * np.exp(-k * k * t) / (2.0 * p.cutoff)
    value = np.exp(1j * np.multiply.outer(x_arr, k)) @ amplitude
    real = _require_real(value, q, f"{path.value} contour integral")
    return as_output(real.reshape(np.shape(x)), x)


def oracle_evolve(
    phi: Callable[[np.ndarray], np.ndarray],
    t_tilde: float,
    x_grid: np.ndarray,
    p: BoostParams,
    q: QuadratureSpec = QuadratureSpec(),
    extent: float = 0.0,
) -> FieldSlice:
    """Evolve band amplitude phi to t~ by quadrature, checked against a doubled node count

    phi must be conjugate-symmetric (the amplitude of a real profile); an
    imaginary residue above the tolerance raises OracleConsistencyError.
    """
    x_grid = np.asarray(x_grid, dtype=float)
    coarse = np.atleast_1d(np.asarray(spectral_synthesis(phi, t_tilde, x_grid, p, q, extent=extent)))
    fine = np.atleast_1d(np.asarray(spectral_synthesis(phi, t_tilde, x_grid, p, q.doubled(), extent=extent)))
    estimate = float(np.max(np.abs(fine - coarse))) if fine.size else 0.0
    scale = max(1.0, float(np.max(np.abs(fine)))) if fine.size else 1.0
    if estimate > q.tolerance * scale:
        raise OracleAccuracyError(estimate, f"evolution to t~={t_tilde} changed under node doubling")
    return FieldSlice(
        time=float(t_tilde),
        frame=Frame.BOOSTED,
        positions=x_grid,
        values=_require_real(fine, q, f"evolution to t~={t_tilde}"),
        provenance=Provenance.SPECTRAL_ORACLE,
    )


def band_energy_fraction(
    phi: Callable[[np.ndarray], np.ndarray],
    t_tilde: float,
    p: BoostParams,
    q: QuadratureSpec = QuadratureSpec(),
    band: float = 0.8,
) -> float:
    """Share of |phi exp(-i omega t~)|^2 carried by band*L <= |k~| <= L"""
    if not 0.0 < band < 1.0:
        raise OracleError(f"band must lie in (0,1), got {band}")
    edge = band * p.cutoff

    def energy(a: float, b: float) -> float:
        k, w = segment_rule(q.nodes, a, b)
        amplitude = np.asarray(phi(k)) * np.exp(-1j * np.asarray(stable_dispersion(k, p)) * t_tilde)
        return float(np.sum(w * np.abs(amplitude) ** 2))

    outer = energy(-p.cutoff, -edge) + energy(edge, p.cutoff)
    total = outer + energy(-edge, edge)
    if total == 0.0:
        return 0.0
    return outer / total


def _green_upper_limit(c: float, p: BoostParams) -> float:
    """u beyond which the Gaussian factor of the transformed integrand is below exp(-60)"""
    a = 240.0 * p.v / p.gamma
    d = 0.5 * (a + math.sqrt(a * a + 4.0 * a * abs(c)))
    return math.sqrt(max(c, 0.0) + d)


def oracle_fourier_G(t_tilde: float, k_tilde: float, p: BoostParams, q: QuadratureSpec = QuadratureSpec(nodes=500, scheme=QuadratureScheme.ADAPTIVE, tolerance=1e-10)) -> complex:
    """Fourier transform of the boosted Green function over its support x~ < t~/v

    With y = t~/v - x~ = u^2 the 1/sqrt(y) edge singularity disappears and
    the integrand is smooth in u on [0, U].
    """
    if t_tilde == 0.0:
        raise OracleError("the Green function transform is taken at t~ != 0")
    c = t_tilde / (p.gamma ** 2 * p.v)
    prefactor = 2.0 / math.sqrt(4.0 * math.pi * p.gamma * p.v)
    upper = _green_upper_limit(c, p)

    def integrand(u: float) -> complex:
        u2 = u * u
        if u2 == 0.0:
            return 0.0
        gauss = math.exp(-p.gamma * (c - u2) ** 2 / (4.0 * p.v * u2))
        phase = -k_tilde * (t_tilde / p.v - u2)
        return prefactor * gauss * complex(math.cos(phase), math.sin(phase))

    breakpoints = [math.sqrt(c)] if 0.0 < c < upper * upper else None
    parts = []
    with warnings.catch_warnings():
        warnings.simplefilter("error", IntegrationWarning)
        try:
            for component in (lambda u: integrand(u).real, lambda u: integrand(u).imag):
                value, error = quad(component, 0.0, upper, limit=q.nodes, epsabs=q.tolerance, epsrel=q.tolerance, points=breakpoints)
                parts.append((value, error))
        except IntegrationWarning as e:
            raise OracleAccuracyError(float("nan"), f"Green function transform at t~={t_tilde}, k~={k_tilde}: {e}")
    estimate = max(error for _, error in parts)
    logger.debug(f"G transform at t~={t_tilde}, k~={k_tilde}: upper limit {upper:.4g}, error estimate {estimate:.3g}")
    return complex(parts[0][0], parts[1][0])

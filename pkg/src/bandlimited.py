"""
Band-limited data: profiles in PW_L stored as Shannon sampling coefficients.

A profile is the finite coefficient sequence c_a on the sampling points
x~_a = pi a / L. Its value at any boosted time follows from the sampling formula
dn(t~, x~) = sum_a c_a K(t~, x~ - x~_a), which at t~ = 0 is the
Shannon-Whittaker series.
"""
import math
import logging
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Callable, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.integrate import trapezoid

from src.boost import BoostDomainError, BoostParams, Frame, make_boost
from src.helpers import ArrayLike, as_output
from src.kernel import kernel_boosted
from src.special import sinc

logger = logging.getLogger("bandlimited")

# rows of the kernel matrix evaluated per block
_BLOCK_ROWS = 2048
_CUTOFF_MATCH = 1e-12

REFERENCE_FUNCTIONS = ["gaussian", "quartic", "sinc", "zero"]


class ProfileError(Exception):
    """Base exception for band-limited profiles"""
    pass


class ProfileInputError(ProfileError):
    """Raised for malformed coefficient data or sample values"""
    pass


class ProfileDomainError(ProfileError):
    """Raised when an operation is undefined for the given profile"""
    pass


class ProfileFormatError(ProfileError):
    """Raised when a profile file cannot be parsed"""

    def __init__(self, line: int, message: str):
        self.line = line
        super().__init__(f"line {line}: {message}")


class Provenance(str, Enum):
    CLOSED_FORM = "closed-form"
    SPECTRAL_ORACLE = "spectral-oracle"


@dataclass(frozen=True, eq=False)
class BandLimitedProfile:
    """Sampling coefficients c_a for a in indices, ascending

    truncation_bound is the l2 mass of the samples outside the stored window,
    None when it is not known.
    """
    indices: np.ndarray
    coefficients: np.ndarray
    cutoff: float
    v: float
    truncation_bound: Optional[float] = 0.0

    @property
    def window(self) -> int:
        return int(np.max(np.abs(self.indices))) if self.indices.size else 0

    @property
    def positions(self) -> np.ndarray:
        return math.pi * self.indices / self.cutoff

    def is_zero(self) -> bool:
        return not np.any(self.coefficients)

    def evaluation_tolerance(self) -> Optional[float]:
        """Worst-case reconstruction error from the discarded samples"""
        if self.truncation_bound is None:
            return None
        return self.truncation_bound * math.sqrt(self.cutoff / math.pi)


@dataclass(frozen=True, eq=False)
class FieldSlice:
    time: float
    frame: Frame
    positions: np.ndarray
    values: np.ndarray
    provenance: Provenance

    def __post_init__(self):
        if self.positions.shape != self.values.shape:
            raise ProfileInputError("positions and values must have the same length")
        if self.positions.size > 1 and np.any(np.diff(self.positions) <= 0.0):
            raise ProfileInputError("positions must be strictly increasing")
        if not np.all(np.isfinite(self.values)):
            raise ProfileInputError(f"non-finite values in the slice at time {self.time}")

    def max_norm(self) -> float:
        return float(np.max(np.abs(self.values))) if self.values.size else 0.0


@dataclass(frozen=True)
class SpacetimeGrid:
    """Evaluation grid: one uniform position window per requested time"""
    frame: Frame
    times: Tuple[float, ...]
    xmin: float
    xmax: float
    nx: int
    shift: bool = False

    def __post_init__(self):
        if self.nx < 2:
            raise ProfileInputError(f"nx must be at least 2, got {self.nx}")
        if not self.xmax > self.xmin:
            raise ProfileInputError(f"xmax must exceed xmin, got [{self.xmin}, {self.xmax}]")

    def positions_at(self, time: float, p: BoostParams) -> np.ndarray:
        """The window, moved along with the frame by v*t when shift is set"""
        offset = p.v * time if self.shift else 0.0
        return np.linspace(self.xmin, self.xmax, self.nx) + offset


@dataclass(frozen=True)
class BoundsReport:
    max_abs: float
    pointwise_bound: float
    pointwise_ok: bool
    spread: float
    spread_bound: float
    spread_ok: bool
    spread_converged: bool
    notes: List[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.pointwise_ok and self.spread_ok


def _profile(indices: Sequence[int], values: Sequence[float], p: BoostParams, truncation_bound: Optional[float]) -> BandLimitedProfile:
    idx = np.asarray(indices, dtype=np.int64)
    val = np.asarray(values, dtype=float)
    order = np.argsort(idx, kind="stable")
    return BandLimitedProfile(
        indices=idx[order],
        coefficients=val[order],
        cutoff=p.cutoff,
        v=p.v,
        truncation_bound=truncation_bound,
    )


def _check_params(prof: BandLimitedProfile, p: BoostParams) -> None:
    if abs(prof.cutoff - p.cutoff) > _CUTOFF_MATCH * p.cutoff:
        raise ProfileDomainError(f"profile was built for lambda={prof.cutoff!r}, got lambda={p.cutoff!r}")


def from_samples(c: Iterable[Tuple[int, float]], p: BoostParams) -> BandLimitedProfile:
    """Profile with the given (index, value) coefficients, taken as exact"""
    seen = set()
    indices, values = [], []
    for index, value in c:
        index = int(index)
        if index in seen:
            raise ProfileInputError(f"duplicate sampling index {index}")
        value = float(value)
        if not math.isfinite(value):
            raise ProfileInputError(f"non-finite coefficient at index {index}")
        seen.add(index)
        indices.append(index)
        values.append(value)
    return _profile(indices, values, p, 0.0)


def sample_function(g: Callable[[np.ndarray], ArrayLike], p: BoostParams, window: int, decaying: bool = False) -> BandLimitedProfile:
    """c_a = g(pi a / L) for |a| <= window

    With decaying=True the discarded l2 mass is estimated from the samples
    out to four times the window; otherwise it is left unknown.
    """
    if window < 1:
        raise ProfileInputError(f"window must be at least 1, got {window}")
    indices = np.arange(-window, window + 1)
    values = np.asarray(g(math.pi * indices / p.cutoff), dtype=float) * np.ones(indices.shape)
    bad = ~np.isfinite(values)
    if np.any(bad):
        raise ProfileInputError(f"reference function is not finite at sample index {int(indices[bad][0])}")

    bound = None
    if decaying:
        tail = np.concatenate((np.arange(-4 * window, -window), np.arange(window + 1, 4 * window + 1)))
        tail_values = np.asarray(g(math.pi * tail / p.cutoff), dtype=float) * np.ones(tail.shape)
        bound = math.sqrt(math.fsum(tail_values ** 2)) if np.all(np.isfinite(tail_values)) else None
    logger.debug(f"sampled {indices.size} coefficients, truncation bound {bound}")
    return _profile(indices, values, p, bound)


def _series_sum(prof: BandLimitedProfile, x: np.ndarray, basis: Callable[[np.ndarray], np.ndarray]) -> np.ndarray:
    """sum_a c_a basis(x - x~_a), large |a| first, compensated per point"""
    flat = np.atleast_1d(x).ravel()
    result = np.zeros(flat.shape)
    if prof.indices.size == 0:
        return result.reshape(np.shape(x))
    order = np.argsort(-np.abs(prof.indices), kind="stable")
    centers = prof.positions[order]
    weights = prof.coefficients[order]
    for start in range(0, flat.size, _BLOCK_ROWS):
        block = flat[start:start + _BLOCK_ROWS]
        terms = weights * basis(block[:, None] - centers[None, :])
        result[start:start + block.size] = [math.fsum(row) for row in terms]
    return result.reshape(np.shape(x))


def reconstruct(prof: BandLimitedProfile, x_tilde: ArrayLike) -> ArrayLike:
    """Shannon-Whittaker series sum_a c_a sinc(L(x~ - x~_a))"""
    x = np.asarray(x_tilde, dtype=float)
    value = _series_sum(prof, x, lambda d: np.asarray(sinc(prof.cutoff * d)))
    return as_output(value, x_tilde)


def eval_profile(prof: BandLimitedProfile, t_tilde: float, x_tilde: ArrayLike, p: BoostParams) -> ArrayLike:
    """Sampling-formula value of the evolved profile at boosted time t~"""
    _check_params(prof, p)
    x = np.asarray(x_tilde, dtype=float)
    t_tilde = float(t_tilde)
    value = _series_sum(prof, x, lambda d: np.asarray(kernel_boosted(np.full(d.shape, t_tilde), d, p)))
    return as_output(value, x_tilde)


def evolve_profile(prof: BandLimitedProfile, t_tilde: float, positions: np.ndarray, p: BoostParams) -> FieldSlice:
    positions = np.asarray(positions, dtype=float)
    values = np.atleast_1d(np.asarray(eval_profile(prof, t_tilde, positions, p)))
    return FieldSlice(
        time=float(t_tilde),
        frame=Frame.BOOSTED,
        positions=positions,
        values=values,
        provenance=Provenance.CLOSED_FORM,
    )


def resample_profile(prof: BandLimitedProfile, t_tilde: float, p: BoostParams, window: int) -> BandLimitedProfile:
    """The evolved field as a profile of its own: its values at x~_a, |a| <= window"""
    if window < 1:
        raise ProfileInputError(f"window must be at least 1, got {window}")
    indices = np.arange(-window, window + 1)
    values = np.asarray(eval_profile(prof, t_tilde, math.pi * indices / p.cutoff, p))
    return _profile(indices, values, p, None)


def l2_norm(prof: BandLimitedProfile, p: BoostParams) -> float:
    """Parseval for the sinc basis: sqrt(pi/L) * ||c||_2"""
    return math.sqrt(math.pi / p.cutoff) * math.sqrt(math.fsum(prof.coefficients ** 2))


def coefficient_spectrum(prof: BandLimitedProfile) -> Callable[[np.ndarray], np.ndarray]:
    """phi(k~) = (pi/L) sum_a c_a exp(-i k~ x~_a), the band amplitude of the profile"""
    positions = prof.positions
    weights = math.pi / prof.cutoff * prof.coefficients

    def phi(k_tilde: np.ndarray) -> np.ndarray:
        k = np.asarray(k_tilde, dtype=float)
        phases = np.exp(-1j * np.multiply.outer(k, positions))
        return phases @ weights

    return phi


def random_profile(rng: np.random.Generator, p: BoostParams, window: int, edge_order: int = 4) -> BandLimitedProfile:
    """Gaussian random coefficients with sum_a (-1)^a a^j c_a = 0 for j < edge_order

    The constraints make phi and its first edge_order - 1 derivatives vanish at
    the band edges, so the evolved field decays fast enough to be resampled on
    a finite window.
    """
    indices = np.arange(-window, window + 1)
    c = rng.standard_normal(indices.size)
    if edge_order > 0:
        scaled = indices / float(window)
        constraints = np.array([(-1.0) ** indices * scaled ** j for j in range(edge_order)])
        multipliers = np.linalg.solve(constraints @ constraints.T, constraints @ c)
        c = c - constraints.T @ multipliers
    return _profile(indices, c, p, 0.0)


def _variance(x: np.ndarray, density: np.ndarray) -> float:
    mass = trapezoid(density, x)
    mean = trapezoid(x * density, x) / mass
    return trapezoid((x - mean) ** 2 * density, x) / mass


def check_bounds(prof: BandLimitedProfile, p: BoostParams, growth_tolerance: float = 1e-3) -> BoundsReport:
    """Pointwise bound sqrt(L/pi)||dn|| and the spread bound 1/(4L) at t~ = 0

    The spread is the standard deviation of dn^2/||dn||^2 on a window that is
    doubled twice. A variance that keeps moving by more than growth_tolerance
    is reported as divergent.
    """
    _check_params(prof, p)
    if prof.indices.size == 0 or prof.is_zero():
        raise ProfileDomainError("bounds are undefined for the zero profile")

    step = math.pi / (4.0 * p.cutoff)
    base = (prof.window + 16) * math.pi / p.cutoff
    notes: List[str] = []

    variances = []
    max_abs = 0.0
    for level in range(3):
        half = base * 2 ** level
        count = int(round(half / step))
        x = step * np.arange(-count, count + 1)
        values = np.asarray(reconstruct(prof, x))
        if level == 0:
            max_abs = float(np.max(np.abs(values)))
        variances.append(_variance(x, values * values))

    changes = [abs(b - a) / abs(a) for a, b in zip(variances, variances[1:])]
    converged = changes[-1] < growth_tolerance
    if converged:
        spread = math.sqrt(variances[-1])
    else:
        spread = math.inf
        notes.append("spread = inf, bound trivially satisfied")

    pointwise_bound = math.sqrt(p.cutoff / math.pi) * l2_norm(prof, p)
    spread_bound = 1.0 / (4.0 * p.cutoff)
    logger.debug(f"variance across window doublings: {variances}")
    return BoundsReport(
        max_abs=max_abs,
        pointwise_bound=pointwise_bound,
        pointwise_ok=max_abs <= pointwise_bound * (1.0 + 1e-9),
        spread=spread,
        spread_bound=spread_bound,
        spread_ok=spread >= spread_bound * (1.0 - 1e-9),
        spread_converged=converged,
        notes=notes,
    )


def reference_function(name: str, p: BoostParams) -> Callable[[np.ndarray], np.ndarray]:
    """Named reference functions used to build sampled profiles"""
    scale = p.cutoff / (2.0 * math.pi)
    if name == "gaussian":
        return lambda x: np.exp(-(scale * np.asarray(x)) ** 2)
    if name == "quartic":
        return lambda x: np.exp(-(scale * np.asarray(x)) ** 4)
    if name == "sinc":
        return lambda x: np.asarray(sinc(p.cutoff * np.asarray(x, dtype=float)))
    if name == "zero":
        return lambda x: np.zeros(np.shape(x))
    raise ProfileInputError(f"unknown reference function '{name}', expected one of {', '.join(REFERENCE_FUNCTIONS)}")


def format_profile(prof: BandLimitedProfile) -> str:
    lines = [f"lambda={prof.cutoff!r} v={prof.v!r}"]
    lines += [f"{int(a)}\t{float(c)!r}" for a, c in zip(prof.indices, prof.coefficients)]
    return "\n".join(lines) + "\n"


def parse_profile(text: str) -> BandLimitedProfile:
    """Parse the 'lambda=<L> v=<v>' header and 'index<TAB>value' lines"""
    lines = text.splitlines()
    if not lines:
        raise ProfileFormatError(1, "missing 'lambda=<value> v=<value>' header")

    header = {}
    for item in lines[0].split():
        key, sep, value = item.partition("=")
        if not sep:
            raise ProfileFormatError(1, f"malformed header item '{item}'")
        header[key] = value
    missing = [key for key in ("lambda", "v") if key not in header]
    if missing:
        raise ProfileFormatError(1, f"header is missing: {', '.join(missing)}")
    try:
        p = make_boost(float(header["v"]))
        cutoff = float(header["lambda"])
    except (ValueError, BoostDomainError) as e:
        raise ProfileFormatError(1, str(e))
    if abs(cutoff - p.cutoff) > 1e-9 * p.cutoff:
        raise ProfileFormatError(1, f"lambda={cutoff} does not match v={p.v} (expected {p.cutoff!r})")

    seen = set()
    indices, values = [], []
    for number, line in enumerate(lines[1:], start=2):
        if not line.strip() or line.startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) != 2:
            raise ProfileFormatError(number, "expected 'index<TAB>value'")
        try:
            index = int(parts[0])
            value = float(parts[1])
        except ValueError:
            raise ProfileFormatError(number, f"cannot parse '{line.strip()}'")
        if index in seen:
            raise ProfileFormatError(number, f"duplicate sampling index {index}")
        if not math.isfinite(value):
            raise ProfileFormatError(number, "non-finite coefficient")
        seen.add(index)
        indices.append(index)
        values.append(value)
    return _profile(indices, values, p, 0.0)


def write_profile(prof: BandLimitedProfile, path: Union[str, Path]) -> None:
    Path(path).write_text(format_profile(prof))


def read_profile(path: Union[str, Path]) -> BandLimitedProfile:
    return parse_profile(Path(path).read_text())

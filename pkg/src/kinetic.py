"""
Kinetic reference layer for the boosted diffusion kernel.

Two pieces live here. The first checks that the kernel is the density of a
massless Fokker-Planck distribution, f ~ (1/2) exp(-|xi|) (1 - d_xi^2) K(t, x + xi)
with xi = -beta p, by integrating over xi. The second is the two-stream
(Cattaneo) model: right and left movers at unit speed exchanging particles at
rate 1/2, which is an independent causal diffusion model to compare against.
"""
import math
import logging
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Callable, Optional, Tuple, Union

import numpy as np

from src.boost import BoostParams
from src.export import DataTable, read_csv_table, write_table
from src.helpers import ArrayLike, as_output
from src.kernel import kernel_rest_derivative
from src.oracle import QuadratureSpec
from src.quadrature import gauss_legendre

logger = logging.getLogger("kinetic")

# relative agreement demanded between the full and the halved xi window
EXTENT_TOLERANCE = 1e-8
GRID_TOLERANCE = 1e-9

Field = Callable[[float, np.ndarray, int], np.ndarray]


class KineticError(Exception):
    """Base exception for the kinetic models"""
    pass


class KineticStabilityError(KineticError):
    """Raised when a two-stream step would outrun the characteristics"""
    pass


class KineticAccuracyError(KineticError):
    """Raised when the embedding integral changes across a window doubling"""
    pass


@dataclass(frozen=True)
class KineticSliceSpec:
    beta: float = 1.0
    xi_extent: float = 60.0
    quad: QuadratureSpec = QuadratureSpec()

    def __post_init__(self):
        if not self.beta > 0.0:
            raise KineticError(f"beta must be positive, got {self.beta}")
        if not self.xi_extent > 0.0:
            raise KineticError(f"xi_extent must be positive, got {self.xi_extent}")


@dataclass(frozen=True)
class RateComparison:
    two_stream: float
    fokker_planck: float

    @property
    def normalized_difference(self) -> float:
        scale = max(abs(self.two_stream), abs(self.fokker_planck))
        return abs(self.fokker_planck - self.two_stream) / scale if scale > 0.0 else 0.0


def kernel_field(p: BoostParams) -> Field:
    """The rest-frame kernel and its x-derivatives as an embedding field"""
    return lambda t, x, order: np.asarray(kernel_rest_derivative(np.full(np.shape(x), t), x, p, order))


def _half_line(t: float, x: float, extent: float, side: float, spec: KineticSliceSpec, f: Field) -> float:
    """(1/2) int exp(-|xi|)(f - f'')(t, x + xi) over [0, extent] (side=+1) or [-extent, 0] (side=-1)"""
    nodes, weights = gauss_legendre(spec.quad.nodes)
    xi = side * 0.5 * extent * (nodes + 1.0)
    w = 0.5 * extent * weights
    points = x + xi
    integrand = 0.5 * np.exp(-np.abs(xi)) * (f(t, points, 0) - f(t, points, 2))
    return math.fsum(w * integrand)


def _edge(t: float, x: float, extent: float, side: float, f: Field) -> float:
    """Boundary term left over by integrating the half-line by parts twice"""
    point = np.array([x + side * extent])
    value = float(f(t, point, 0)[0])
    slope = float(f(t, point, 1)[0])
    return 0.5 * math.exp(-extent) * (value + side * slope)


def embedding_defect(t: float, x: float, spec: KineticSliceSpec, p: BoostParams, field: Optional[Field] = None) -> float:
    """K(t, x) minus the embedding integral truncated to |xi| <= xi_extent"""
    f = field or kernel_field(p)
    return _edge(t, x, spec.xi_extent, -1.0, f) + _edge(t, x, spec.xi_extent, 1.0, f)


def _stream_pair(t: float, x: float, extent: float, spec: KineticSliceSpec, f: Field) -> Tuple[float, float]:
    right = _half_line(t, x, extent, -1.0, spec, f) + _edge(t, x, extent, -1.0, f)
    left = _half_line(t, x, extent, 1.0, spec, f) + _edge(t, x, extent, 1.0, f)
    return right, left


def stream_densities(t: float, x: float, spec: KineticSliceSpec, p: BoostParams, field: Optional[Field] = None) -> Tuple[float, float]:
    """(n_plus, n_minus): the embedding restricted to right movers (xi < 0) and left movers (xi > 0)"""
    return _stream_pair(t, x, spec.xi_extent, spec, field or kernel_field(p))


def embedding_density(t: float, x: float, spec: KineticSliceSpec, p: BoostParams, field: Optional[Field] = None) -> float:
    """Particle density carried by the kinetic embedding of the field at (t, x)

    The truncated xi-integral is closed with its boundary remainder, then
    compared with the same construction on half the window.
    """
    f = field or kernel_field(p)
    full = sum(_stream_pair(t, x, spec.xi_extent, spec, f))
    half = sum(_stream_pair(t, x, 0.5 * spec.xi_extent, spec, f))
    change = abs(full - half)
    if change > EXTENT_TOLERANCE * max(1.0, abs(full)):
        raise KineticAccuracyError(f"embedding density at (t={t}, x={x}) moved by {change:.3g} across a window doubling")
    return full


def conversion_rates(t: float, x: float, spec: KineticSliceSpec, p: BoostParams, field: Optional[Field] = None) -> RateComparison:
    """Two-stream exchange rate (n_minus - n_plus)/2 against the Fokker-Planck flux rate at p = 0"""
    f = field or kernel_field(p)
    n_plus, n_minus = stream_densities(t, x, spec, p, f)
    point = np.array([x])
    # -f_eq d_p(f/f_eq)/(2 pi beta^2) at p = 0 in terms of the field
    fokker_planck = 0.5 * (float(f(t, point, 1)[0]) - float(f(t, point, 3)[0]))
    return RateComparison(two_stream=0.5 * (n_minus - n_plus), fokker_planck=fokker_planck)


@dataclass(frozen=True, eq=False)
class TwoStreamState:
    grid: np.ndarray
    n_plus: np.ndarray
    n_minus: np.ndarray
    time: float = 0.0
    periodic: bool = False

    def __post_init__(self):
        if self.grid.size < 2:
            raise KineticError("a two-stream grid needs at least two points")
        if not (self.n_plus.shape == self.n_minus.shape == self.grid.shape):
            raise KineticError("grid, n_plus and n_minus must have the same length")
        spacing = np.diff(self.grid)
        if np.any(np.abs(spacing - spacing[0]) > GRID_TOLERANCE * abs(spacing[0])) or spacing[0] <= 0.0:
            raise KineticError("the two-stream grid must be uniform and increasing")
        if not (np.all(np.isfinite(self.n_plus)) and np.all(np.isfinite(self.n_minus))):
            raise KineticError(f"non-finite densities at t={self.time}")

    @property
    def h(self) -> float:
        return float(self.grid[1] - self.grid[0])

    @property
    def density(self) -> np.ndarray:
        return self.n_plus + self.n_minus

    @property
    def flux(self) -> np.ndarray:
        return self.n_plus - self.n_minus

    def particle_number(self) -> float:
        return math.fsum(self.density) * self.h


def _transport(values: np.ndarray, cells: float, direction: int, periodic: bool) -> np.ndarray:
    """Move values by cells (<= 1) grid cells towards +x (direction=1) or -x (direction=-1)"""
    upstream = np.roll(values, direction)
    if not periodic:
        upstream[0 if direction == 1 else -1] = 0.0
    if cells == 1.0:
        return upstream
    # first-order upwind, smears a profile by about one cell per step
    return values - cells * (values - upstream)


def cattaneo_step(state: TwoStreamState, dt: float) -> TwoStreamState:
    """Transport along the characteristics, then the exact exchange over dt

    The transport is an exact one-cell shift when dt equals the grid spacing
    and first-order upwind for smaller dt.
    """
    h = state.h
    if not dt > 0.0:
        raise KineticStabilityError(f"time step must be positive, got {dt}")
    if dt > h * (1.0 + 1e-12):
        raise KineticStabilityError(f"time step {dt} exceeds the grid spacing {h}")
    cells = 1.0 if abs(dt - h) <= 1e-12 * h else dt / h

    n_plus = _transport(state.n_plus, cells, 1, state.periodic)
    n_minus = _transport(state.n_minus, cells, -1, state.periodic)

    # d/dt (n+ - n-) = -(n+ - n-), n+ + n- unchanged
    density = n_plus + n_minus
    flux = (n_plus - n_minus) * math.exp(-dt)
    return replace(state, n_plus=0.5 * (density + flux), n_minus=0.5 * (density - flux), time=state.time + dt)


def evolve_two_stream(state: TwoStreamState, dt: float, steps: int) -> TwoStreamState:
    for _ in range(steps):
        state = cattaneo_step(state, dt)
    return state


def cattaneo_dispersion(k: ArrayLike) -> Tuple[ArrayLike, ArrayLike]:
    """(hydrodynamic, gapped) roots of omega^2 + i omega - k^2 = 0"""
    k_arr = np.asarray(k, dtype=float)
    root = np.sqrt((4.0 * k_arr * k_arr - 1.0).astype(complex))
    hydrodynamic = 0.5 * (-1j + root)
    gapped = 0.5 * (-1j - root)
    return as_output(hydrodynamic, k), as_output(gapped, k)


def two_stream_from_density(grid: np.ndarray, n: np.ndarray, flux: Optional[np.ndarray] = None, periodic: bool = False) -> TwoStreamState:
    grid = np.asarray(grid, dtype=float)
    n = np.asarray(n, dtype=float)
    flux = np.zeros_like(n) if flux is None else np.asarray(flux, dtype=float)
    return TwoStreamState(grid=grid, n_plus=0.5 * (n + flux), n_minus=0.5 * (n - flux), periodic=periodic)


def gaussian_two_stream(grid: np.ndarray, width: float, periodic: bool = False) -> TwoStreamState:
    """Gaussian density of standard deviation width carrying its Fick flux -dn/dx"""
    grid = np.asarray(grid, dtype=float)
    n = np.exp(-grid * grid / (2.0 * width * width))
    return two_stream_from_density(grid, n, grid / (width * width) * n, periodic)


def fick_gaussian(grid: np.ndarray, width: float, time: float) -> np.ndarray:
    """Heat-kernel evolution of exp(-x^2/2W^2) with unit diffusivity"""
    variance = width * width + 2.0 * time
    return width / math.sqrt(variance) * np.exp(-np.asarray(grid) ** 2 / (2.0 * variance))


def write_two_stream(state: TwoStreamState, path: Union[str, Path]) -> Path:
    table = DataTable(
        metadata={"time": state.time, "periodic": state.periodic, "h": state.h},
        columns={"x": state.grid, "n_plus": state.n_plus, "n_minus": state.n_minus},
    )
    return write_table(table, path)


def read_two_stream(path: Union[str, Path]) -> TwoStreamState:
    table = read_csv_table(path)
    missing = [name for name in ("x", "n_plus", "n_minus") if name not in table.columns]
    if missing:
        raise KineticError(f"{path} is missing columns: {', '.join(missing)}")
    return TwoStreamState(
        grid=table.columns["x"],
        n_plus=table.columns["n_plus"],
        n_minus=table.columns["n_minus"],
        time=float(table.metadata.get("time", 0.0)),
        periodic=bool(table.metadata.get("periodic", False)),
    )

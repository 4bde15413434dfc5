import math

import numpy as np

from src.kernel import kernel_rest, kernel_rest_derivative
from src.kinetic import (
    KineticSliceSpec,
    cattaneo_dispersion,
    cattaneo_step,
    conversion_rates,
    embedding_defect,
    embedding_density,
    evolve_two_stream,
    fick_gaussian,
    gaussian_two_stream,
    stream_densities,
    two_stream_from_density,
)
from src.suites.base_suite import BaseSuite, Outcome, at_least

SMALL_TIMES = np.array([1e-5, 1e-5, 1e-4, 1e-4, 1e-3, 1e-3])
DECAY_EXTENT = 40.0


class KineticSuite(BaseSuite):
    """Fokker-Planck embedding of the kernel"""

    @property
    def name(self) -> str:
        return "kinetic"

    def register_checks(self) -> None:
        self._register("embedding", "embedding density equals the kernel at 20 points, 6 of them with |t| <= 1e-3", self.embedding)
        self._register("streams", "n_minus - n_plus reproduces dK/dx", self.streams)
        self._register("defect-decay", "boundary defect halves when the window doubles", self.defect_decay)
        self._register("rates-differ", "Fokker-Planck and two-stream rates differ", self.rates_differ)

    def _points(self):
        rng = np.random.default_rng(41)
        # both signs of t, from near the initial slice out to |t| = 0.5
        magnitude = np.concatenate((SMALL_TIMES, rng.uniform(0.1, 0.5, 14)))
        signs = np.where(np.arange(magnitude.size) % 2 == 0, 1.0, -1.0)
        return zip(signs * magnitude, rng.uniform(-2.0, 2.0, magnitude.size))

    def embedding(self) -> Outcome:
        spec = KineticSliceSpec(xi_extent=60.0)
        worst = 0.0
        for t, x in self._points():
            kernel = kernel_rest(t, x, self.p)
            worst = max(worst, abs(embedding_density(t, x, spec, self.p) - kernel) / max(1.0, abs(kernel)))
        return Outcome(worst, self.tol(1e-6))

    def streams(self) -> Outcome:
        spec = KineticSliceSpec(xi_extent=30.0)
        t, x = 0.2, 0.5
        n_plus, n_minus = stream_densities(t, x, spec, self.p)
        slope = kernel_rest_derivative(t, x, self.p, 1)
        return Outcome(abs((n_minus - n_plus) - slope) / max(1.0, abs(slope)), self.tol(1e-6))

    def _envelope(self, extent: float) -> float:
        """Largest |defect| over one oscillation period, with the exp(-x) profile divided out"""
        spec = KineticSliceSpec(xi_extent=extent)
        period = 2.0 * math.pi / self.p.sigma
        x = 0.5 + np.linspace(0.0, period, 96, endpoint=False)
        return max(abs(embedding_defect(0.2, xi, spec, self.p)) * math.exp(xi) for xi in x)

    def defect_decay(self) -> Outcome:
        ratio = self._envelope(DECAY_EXTENT) / self._envelope(2.0 * DECAY_EXTENT)
        return Outcome(abs(ratio - 2.0), 0.3, detail=f"envelope ratio {ratio:.4f}")

    def rates_differ(self) -> Outcome:
        rates = conversion_rates(0.2, 0.5, KineticSliceSpec(xi_extent=30.0), self.p)
        return at_least(rates.normalized_difference, 1e-3,
                        detail=f"two-stream {rates.two_stream:.6g}, Fokker-Planck {rates.fokker_planck:.6g}")


class CattaneoSuite(BaseSuite):
    """Two-stream comparator: conservation, causality, relaxation and the Fick limit"""
    per_speed = False

    @property
    def name(self) -> str:
        return "cattaneo"

    def register_checks(self) -> None:
        self._register("fixed-point", "homogeneous equilibrium does not move", self.fixed_point)
        self._register("flux-decay", "homogeneous flux decays as exp(-t)", self.flux_decay)
        self._register("conservation", "particle number is conserved", self.conservation)
        self._register("causality", "a compact bump spreads at most at unit speed", self.causality)
        self._register("fick-limit", "a broad Gaussian follows the heat kernel", self.fick_limit)
        self._register("dispersion", "roots of omega^2 + i omega - k^2 = 0", self.dispersion)

    def fixed_point(self) -> Outcome:
        grid = np.linspace(0.0, 9.9, 100)
        state = two_stream_from_density(grid, np.full(grid.shape, 2.0), periodic=True)
        final = evolve_two_stream(state, state.h, 50)
        return Outcome(float(np.max(np.abs(final.n_plus - 1.0)) + np.max(np.abs(final.n_minus - 1.0))), self.tol(1e-14))

    def flux_decay(self) -> Outcome:
        grid = np.linspace(0.0, 9.9, 100)
        state = two_stream_from_density(grid, np.ones(grid.shape), np.ones(grid.shape), periodic=True)
        worst = 0.0
        for _ in range(40):
            state = cattaneo_step(state, state.h)
            worst = max(worst, float(np.max(np.abs(state.flux - math.exp(-state.time)))))
            worst = max(worst, float(np.max(np.abs(state.density - 1.0))))
        return Outcome(worst, self.tol(1e-10))

    def _bump(self, h: float):
        grid = h * np.arange(-400, 401)
        n = np.where(np.abs(grid) <= 1.0, np.cos(0.5 * math.pi * grid) ** 2, 0.0)
        return two_stream_from_density(grid, n, 0.3 * n)

    def conservation(self) -> Outcome:
        state = self._bump(0.05)
        initial = state.particle_number()
        final = evolve_two_stream(state, state.h, 100)
        drift = abs(final.particle_number() - initial) / initial / final.time
        return Outcome(drift, self.tol(1e-10))

    def causality(self) -> Outcome:
        state = self._bump(0.05)
        final = evolve_two_stream(state, state.h, 100)
        reach = 1.0 + final.time + 2.0 * state.h
        outside = np.abs(final.grid) > reach
        leak = float(np.max(np.abs(final.density[outside]))) if np.any(outside) else 0.0
        return Outcome(leak, 1e-12)

    def fick_limit(self) -> Outcome:
        h, width = 0.05, 5.0
        grid = h * np.arange(-1000, 1001)
        final = evolve_two_stream(gaussian_two_stream(grid, width), h, 100)
        expected = fick_gaussian(grid, width, final.time)
        error = float(np.linalg.norm(final.density - expected) / np.linalg.norm(expected))
        return Outcome(error, 0.02)

    def dispersion(self) -> Outcome:
        k = np.linspace(-3.0, 3.0, 61)
        hydrodynamic, gapped = cattaneo_dispersion(k)
        worst = 0.0
        for omega in (np.asarray(hydrodynamic), np.asarray(gapped)):
            worst = max(worst, float(np.max(np.abs(omega * omega + 1j * omega - k * k))))
        at_rest = cattaneo_dispersion(0.0)
        worst = max(worst, abs(at_rest[0]), abs(at_rest[1] + 1j))
        return Outcome(worst, self.tol(1e-13))

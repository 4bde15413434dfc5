import math
from typing import Any, Dict

import numpy as np

from src.boost import Direction, boost_point, stable_dispersion
from src.kernel import green_fourier
from src.oracle import (
    ContourPath,
    QuadratureSpec,
    oracle_evolve,
    oracle_fourier_G,
    oracle_kernel,
    oracle_kernel_contour,
    poisoned_dispersion,
    spectral_synthesis,
)
from src.suites.base_suite import BaseSuite, Outcome, at_least


class OracleSuite(BaseSuite):
    """The quadrature oracles against each other and against the Green function closed form

    With poison_branch set, the realness check runs on a dispersion with a
    misplaced square-root sign and is expected to fail.
    """

    def validate_config(self, config: Dict[str, Any]) -> Dict[str, Any]:
        config = super().validate_config(config)
        config.setdefault("poison_branch", False)
        return config

    @property
    def name(self) -> str:
        return "oracle"

    def register_checks(self) -> None:
        self._register("realness", "band integral of the kernel is real", self.realness)
        self._register("self-convergence", "400 and 800 nodes agree", self.self_convergence)
        self._register("contour-independence", "parabola and chord paths agree at 50 points", self.contour_independence)
        self._register("contour-vs-band", "rest contour integral equals the band integral at the boosted image", self.contour_vs_band)
        self._register("flat-evolution", "evolving a flat spectrum reproduces the kernel", self.flat_evolution)
        self._register("evolve-realness", "evolving a conjugate-symmetric spectrum leaves no imaginary residue", self.evolve_realness)
        self._register("green-transform", "closed-form G transform against quadrature at t~ = +-0.5 and 20 k~", self.green_transform)
        self._register("green-normalization", "G transform at k~ = 0, t~ = 1 is 1/gamma", self.green_normalization)
        self._register("green-branch", "t~ < 0 selects the unstable branch", self.green_branch)
        self._register("green-beyond-cutoff", "G(1, .) has content at k~ = 2L", self.green_beyond_cutoff)

    def realness(self) -> Outcome:
        dispersion = poisoned_dispersion(self.p) if self.config["poison_branch"] else None
        x = np.linspace(-3.0, 3.0, 31)
        worst = 0.0
        for t_tilde in (-0.5, 0.5):
            flat = lambda k: np.full(np.shape(k), math.pi / self.p.cutoff)
            value = np.asarray(spectral_synthesis(flat, t_tilde, x, self.p, dispersion=dispersion))
            worst = max(worst, float(np.max(np.abs(value.imag) / np.maximum(1.0, np.abs(value.real)))))
        detail = "poisoned dispersion" if self.config["poison_branch"] else ""
        return Outcome(worst, self.tol(1e-11), detail=detail)

    def self_convergence(self) -> Outcome:
        x = np.linspace(-4.0, 4.0, 41)
        worst = 0.0
        for t_tilde in (-0.5, 0.5):
            coarse = np.asarray(oracle_kernel(t_tilde, x, self.p, QuadratureSpec(nodes=400)))
            fine = np.asarray(oracle_kernel(t_tilde, x, self.p, QuadratureSpec(nodes=800)))
            worst = max(worst, float(np.max(np.abs(fine - coarse) / np.maximum(1.0, np.abs(fine)))))
        return Outcome(worst, self.tol(1e-12))

    def contour_independence(self) -> Outcome:
        rng = np.random.default_rng(31)
        worst = 0.0
        for t, x in zip(rng.uniform(-1.0, 1.0, 50), rng.uniform(-6.0, 6.0, 50)):
            parabola = oracle_kernel_contour(t, x, self.p, path=ContourPath.PARABOLA)
            chord = oracle_kernel_contour(t, x, self.p, path=ContourPath.CHORD)
            worst = max(worst, abs(parabola - chord) / max(1.0, abs(chord)))
        return Outcome(worst, self.tol(1e-10))

    def contour_vs_band(self) -> Outcome:
        rng = np.random.default_rng(32)
        points = [(0.3, 1.2)] + list(zip(rng.uniform(-1.0, 1.0, 20), rng.uniform(-4.0, 4.0, 20)))
        worst = 0.0
        for t, x in points:
            t_tilde, x_tilde = boost_point(t, x, self.p, Direction.REST_TO_BOOSTED)
            contour = oracle_kernel_contour(t, x, self.p)
            band = oracle_kernel(t_tilde, x_tilde, self.p)
            worst = max(worst, abs(contour - band) / max(1.0, abs(band)))
        return Outcome(worst, self.tol(1e-10))

    def flat_evolution(self) -> Outcome:
        x = np.linspace(-3.0, 3.0, 61)
        flat = lambda k: np.full(np.shape(k), math.pi / self.p.cutoff)
        evolved = oracle_evolve(flat, 0.25, x, self.p)
        kernel = np.asarray(oracle_kernel(0.25, x, self.p))
        return Outcome(float(np.max(np.abs(evolved.values - kernel))), self.tol(1e-12))

    def evolve_realness(self) -> Outcome:
        # phi(-k) = conj(phi(k)): the band amplitude of a real profile centred at x~ = 0.3
        shifted = lambda k: np.exp(-(k / self.p.cutoff) ** 2 - 0.3j * k)
        x = np.linspace(-3.0, 3.0, 31)
        worst = 0.0
        for t_tilde in (-0.5, 0.5):
            value = np.asarray(spectral_synthesis(shifted, t_tilde, x, self.p))
            worst = max(worst, float(np.max(np.abs(value.imag) / np.maximum(1.0, np.abs(value.real)))))
            oracle_evolve(shifted, t_tilde, x, self.p)
        return Outcome(worst, self.tol(1e-11))

    def green_transform(self) -> Outcome:
        worst = 0.0
        for t_tilde in (-0.5, 0.5):
            for k_tilde in np.linspace(-3.0, 3.0, 20):
                numeric = oracle_fourier_G(t_tilde, k_tilde, self.p)
                closed = green_fourier(t_tilde, k_tilde, self.p)
                worst = max(worst, abs(numeric - closed))
        return Outcome(worst, self.tol(1e-6))

    def green_normalization(self) -> Outcome:
        return Outcome(abs(oracle_fourier_G(1.0, 0.0, self.p) - 1.0 / self.p.gamma), self.tol(1e-8))

    def green_branch(self) -> Outcome:
        # the stable branch at t~ < 0 must visibly miss the quadrature
        t_tilde, k_tilde = -0.5, 1.0
        numeric = oracle_fourier_G(t_tilde, k_tilde, self.p)
        prefactor = 1.0 / np.sqrt(self.p.gamma * (self.p.gamma - 4j * self.p.v * k_tilde))
        wrong = prefactor * np.exp(-1j * stable_dispersion(k_tilde, self.p) * t_tilde)
        selected = abs(numeric - green_fourier(t_tilde, k_tilde, self.p))
        missed = abs(numeric - wrong)
        return Outcome(selected, self.tol(1e-6), passed=selected <= self.tol(1e-6) and missed > 1e-3,
                       detail=f"stable branch would miss by {missed:.3g}")

    def green_beyond_cutoff(self) -> Outcome:
        return at_least(abs(green_fourier(1.0, 2.0 * self.p.cutoff, self.p)), 1e-8)

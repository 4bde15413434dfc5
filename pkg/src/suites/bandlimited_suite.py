import math

import numpy as np
from scipy.integrate import trapezoid

from src.bandlimited import (
    check_bounds,
    coefficient_spectrum,
    eval_profile,
    from_samples,
    l2_norm,
    random_profile,
    reconstruct,
    reference_function,
    resample_profile,
    sample_function,
)
from src.oracle import band_energy_fraction, spectral_synthesis
from src.suites.base_suite import BaseSuite, Outcome

PROFILE_COUNT = 10
ROUND_TRIP_WINDOW = 20
RESAMPLE_WINDOW = 400


class BandlimitedSuite(BaseSuite):
    """Sampling formula, norm growth, well-posedness both ways and the localization bounds"""

    @property
    def name(self) -> str:
        return "bandlimited"

    def register_checks(self) -> None:
        self._register("sampling-formula", "sampling series at t~ = 0 equals the spectral synthesis", self.sampling_formula)
        self._register("l2-growth", "||dn(t~)|| <= exp(|t~|/(gamma v)) ||dn(0)||", self.l2_growth)
        self._register("round-trip", "forward to +0.5, resample, back to -0.5 recovers the profile", self.round_trip)
        self._register("sinc-zeros", "single-sample profile vanishes at the other sampling points", self.sinc_zeros)
        self._register("bounds", "pointwise and spread bounds hold for the Gaussian-sample profile", self.bounds)
        self._register("forward-smoothing", "forward evolution lowers the max-norm", self.forward_smoothing)
        self._register("backward-roughening", "backward evolution feeds the band edge", self.backward_roughening)

    def _gaussian_profile(self):
        return sample_function(reference_function("gaussian", self.p), self.p, 20, decaying=True)

    def sampling_formula(self) -> Outcome:
        rng = np.random.default_rng(21)
        worst = 0.0
        for _ in range(PROFILE_COUNT):
            prof = random_profile(rng, self.p, 8, edge_order=0)
            x = np.linspace(-12.0, 12.0, 200) * math.pi / self.p.cutoff
            series = np.asarray(eval_profile(prof, 0.0, x, self.p))
            synthesis = np.asarray(spectral_synthesis(coefficient_spectrum(prof), 0.0, x, self.p, extent=float(np.max(np.abs(prof.positions)))))
            worst = max(worst, float(np.max(np.abs(series - synthesis.real))))
        return Outcome(worst, self.tol(1e-8))

    def l2_growth(self) -> Outcome:
        rng = np.random.default_rng(22)
        step = math.pi / (4.0 * self.p.cutoff)
        count = int(round((10 + 60) * math.pi / self.p.cutoff / step))
        x = step * np.arange(-count, count + 1)
        worst = 0.0
        for _ in range(PROFILE_COUNT):
            prof = random_profile(rng, self.p, 10)
            initial = l2_norm(prof, self.p)
            for t_tilde in (-0.5, -0.25, 0.25, 0.5):
                values = np.asarray(eval_profile(prof, t_tilde, x, self.p))
                evolved = math.sqrt(trapezoid(values * values, x))
                allowed = math.exp(abs(t_tilde) * self.p.growth_rate) * initial
                worst = max(worst, evolved / allowed)
        return Outcome(worst, 1.0 + self.tol(1e-6), detail="largest ratio of the norm to its bound")

    def round_trip(self) -> Outcome:
        prof = random_profile(np.random.default_rng(23), self.p, ROUND_TRIP_WINDOW)
        forward = resample_profile(prof, 0.5, self.p, RESAMPLE_WINDOW)
        half = 0.5 * ROUND_TRIP_WINDOW * math.pi / self.p.cutoff
        x = np.linspace(-half, half, 101)
        recovered = np.asarray(eval_profile(forward, -0.5, x, self.p))
        original = np.asarray(reconstruct(prof, x))
        error = float(np.max(np.abs(recovered - original))) / max(1.0, float(np.max(np.abs(original))))
        return Outcome(error, self.tol(1e-6))

    def sinc_zeros(self) -> Outcome:
        prof = from_samples([(0, 1.0)], self.p)
        a = np.concatenate((np.arange(-20, 0), np.arange(1, 21)))
        values = np.asarray(eval_profile(prof, 0.0, math.pi * a / self.p.cutoff, self.p))
        return Outcome(float(np.max(np.abs(values))), self.tol(1e-14))

    def bounds(self) -> Outcome:
        report = check_bounds(self._gaussian_profile(), self.p)
        detail = f"max {report.max_abs:.6g} <= {report.pointwise_bound:.6g}, spread {report.spread:.6g} >= {report.spread_bound:.6g}"
        return Outcome(0.0 if report.passed else 1.0, 0.0, passed=report.passed, detail=detail)

    def forward_smoothing(self) -> Outcome:
        prof = self._gaussian_profile()
        x = np.linspace(-1.0, 1.0, 401) * 20 * math.pi / self.p.cutoff
        norms = [float(np.max(np.abs(np.asarray(eval_profile(prof, t, x, self.p))))) for t in (0.0, 0.25, 0.5)]
        steps = [later - earlier for earlier, later in zip(norms, norms[1:])]
        return Outcome(max(steps), 0.0, passed=all(step < 0.0 for step in steps), detail=f"max-norms {norms}")

    def backward_roughening(self) -> Outcome:
        phi = coefficient_spectrum(self._gaussian_profile())
        fractions = [band_energy_fraction(phi, t, self.p) for t in (0.0, -0.25, -0.5)]
        steps = [later - earlier for earlier, later in zip(fractions, fractions[1:])]
        return Outcome(min(steps), 0.0, passed=all(step > 0.0 for step in steps), detail=f"edge fractions {fractions}")

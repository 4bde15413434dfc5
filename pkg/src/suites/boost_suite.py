import math

import numpy as np

from src.boost import (
    Frame,
    WaveVector,
    admissible_mask,
    boost_wavevector,
    contour_endpoints,
    cutoff_closure_residual,
    is_kinetically_admissible,
    locate_cutoff_minimum,
    make_boost,
    solve_cutoff,
    stable_dispersion,
    stable_dispersion_slope,
    unstable_dispersion,
)
from src.suites.base_suite import BaseSuite, Outcome

BRANCH_SAMPLES = 10_000


class BoostSuite(BaseSuite):
    """Kinematics: cutoff golden values, closure, endpoints and frame round trips"""

    @property
    def name(self) -> str:
        return "boost"

    def register_checks(self) -> None:
        self._register("golden-cutoffs", "L(1/2) = 4 and L(1/4) = 2 sqrt(3)", self.golden_cutoffs)
        self._register("cutoff-closure", "(L, Omega) solve the complex cutoff equation", self.cutoff_closure)
        self._register("cutoff-root", "numerical saturation root equals the closed-form cutoff", self.cutoff_root)
        self._register("endpoints", "band edges map to i -/+ sigma in the rest frame", self.endpoints)
        self._register("round-trip", "rest -> boosted -> rest recovers wavevectors", self.round_trip)
        self._register("admissibility-edge", "admissibility flips exactly at |k~| = L", self.admissibility_edge)
        self._register("unstable-floor", "Im omega_plus stays above 1/(gamma v^2) on the real axis", self.unstable_floor)
        self._register("dispersion-consistency", "boosting (omega~(k~), k~) to rest gives omega = -ik^2 at 100 random k~", self.dispersion_consistency)
        self._register("cutoff-saturation", "Im omega~(+-L) = -1/(gamma v) for 20 random v", self.cutoff_saturation)
        self._register("cutoff-minimum", "lambda(v) is smallest at v = 1/4 with value 2 sqrt(3)", self.cutoff_minimum)
        self._register("branch-continuity", "no jump in omega~ beyond the mesh-scaled slope on [-L, L]", self.branch_continuity)
        self._register("branch-admissibility", "admissible for |k~| < L and not beyond, 1000 points each side", self.branch_admissibility)

    def golden_cutoffs(self) -> Outcome:
        error = max(abs(make_boost(0.5).cutoff - 4.0), abs(make_boost(0.25).cutoff - 2.0 * math.sqrt(3.0)))
        return Outcome(error, self.tol(1e-12))

    def cutoff_closure(self) -> Outcome:
        # both sides of the closure scale like gamma^2 L^2
        scale = max(1.0, (self.p.gamma * self.p.cutoff) ** 2)
        return Outcome(cutoff_closure_residual(self.p) / scale, self.tol(1e-11))

    def cutoff_root(self) -> Outcome:
        root = solve_cutoff(self.p)
        return Outcome(abs(root - self.p.cutoff) / self.p.cutoff, self.tol(1e-10))

    def endpoints(self) -> Outcome:
        k_minus, k_plus = contour_endpoints(self.p)
        error = 0.0
        for k_tilde, expected in ((-self.p.cutoff, k_minus), (self.p.cutoff, k_plus)):
            edge = WaveVector(omega=stable_dispersion(k_tilde, self.p), k=k_tilde, frame=Frame.BOOSTED)
            image = boost_wavevector(edge, self.p)
            error = max(error, abs(image.k - expected) / abs(expected))
        return Outcome(error, self.tol(1e-12))

    def round_trip(self) -> Outcome:
        rng = np.random.default_rng(5)
        error = 0.0
        for omega_re, omega_im, k_re, k_im in rng.uniform(-5.0, 5.0, size=(50, 4)):
            start = WaveVector(omega=complex(omega_re, omega_im), k=complex(k_re, k_im), frame=Frame.REST)
            back = boost_wavevector(boost_wavevector(start, self.p), self.p)
            scale = self.p.gamma ** 2 * max(abs(start.omega), abs(start.k))
            error = max(error, abs(back.omega - start.omega) / scale, abs(back.k - start.k) / scale)
        return Outcome(error, self.tol(1e-12))

    def admissibility_edge(self) -> Outcome:
        lam = self.p.cutoff
        inside = np.array([-lam, lam]) * (1.0 - 1e-9)
        outside = np.array([-lam, lam]) * (1.0 + 1e-9)
        flips = bool(np.all(admissible_mask(inside, self.p))) and not bool(np.any(admissible_mask(outside, self.p)))
        return Outcome(0.0 if flips else 1.0, 0.0, detail="" if flips else "admissibility does not flip at the cutoff")

    def unstable_floor(self) -> Outcome:
        floor = 1.0 / (self.p.gamma * self.p.v ** 2)
        k = np.linspace(-4.0 * self.p.cutoff, 4.0 * self.p.cutoff, 801)
        lowest = float(np.min(np.imag(unstable_dispersion(k, self.p))))
        return Outcome(max(0.0, floor - lowest) / floor, self.tol(1e-12), detail=f"min Im omega_plus {lowest:.12g}, floor {floor:.12g}")

    def dispersion_consistency(self) -> Outcome:
        rng = np.random.default_rng(7)
        worst = 0.0
        for k_tilde in rng.uniform(-self.p.cutoff, self.p.cutoff, 100):
            boosted = WaveVector(omega=stable_dispersion(k_tilde, self.p), k=k_tilde, frame=Frame.BOOSTED)
            rest = boost_wavevector(boosted, self.p)
            worst = max(worst, abs(rest.omega + 1j * rest.k ** 2) / max(1.0, abs(rest.k) ** 2))
        return Outcome(worst, self.tol(1e-12))

    def cutoff_saturation(self) -> Outcome:
        rng = np.random.default_rng(8)
        worst = 0.0
        for v in rng.uniform(0.05, 0.95, 20):
            p = make_boost(v)
            for edge in (-p.cutoff, p.cutoff):
                worst = max(worst, abs(stable_dispersion(edge, p).imag + p.growth_rate))
        return Outcome(worst, self.tol(1e-12))

    def cutoff_minimum(self) -> Outcome:
        v_min, lambda_min = locate_cutoff_minimum(BRANCH_SAMPLES)
        step = 0.98 / (BRANCH_SAMPLES - 1)
        error = abs(lambda_min - 2.0 * math.sqrt(3.0))
        located = abs(v_min - 0.25) <= step
        return Outcome(error, self.tol(1e-9), passed=located and error <= self.tol(1e-9),
                       detail=f"minimum at v = {v_min:.9g}")

    def branch_continuity(self) -> Outcome:
        k = np.linspace(-self.p.cutoff, self.p.cutoff, BRANCH_SAMPLES)
        omega = np.asarray(stable_dispersion(k, self.p))
        slope = np.abs(np.asarray(stable_dispersion_slope(k, self.p)))
        bound = np.diff(k) * np.maximum(slope[1:], slope[:-1])
        worst = float(np.max(np.abs(np.diff(omega)) / bound))
        return Outcome(worst, 1.0 + 1e-6, detail="largest jump over mesh-scaled slope")

    def branch_admissibility(self) -> Outcome:
        lam = self.p.cutoff
        inside = np.linspace(-lam, lam, 1002)[1:-1]
        beyond = lam * (1.0 + np.linspace(1e-3, 3.0, 1000))
        wrong = 0
        for k_tilde, expected in [(k, True) for k in inside] + [(s * k, False) for k in beyond for s in (-1.0, 1.0)]:
            wv = WaveVector(omega=stable_dispersion(k_tilde, self.p), k=k_tilde, frame=Frame.BOOSTED)
            wrong += is_kinetically_admissible(wv, self.p) != expected
        return Outcome(float(wrong), 0.0, detail=f"{wrong} misclassified wavenumbers")

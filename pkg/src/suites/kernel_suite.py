import numpy as np

from src.boost import Direction, boost_point
from src.kernel import green_boosted, heat_kernel, kernel_boosted, kernel_initial, kernel_rest, kernel_rest_erfi
from src.oracle import oracle_kernel, oracle_kernel_contour
from src.special import sinc
from src.suites.base_suite import BaseSuite, Outcome

# rows and columns of the boosted grid the PDE residual is taken on
RESIDUAL_GRID = 50


def _relative(a: np.ndarray, b: np.ndarray) -> float:
    return float(np.max(np.abs(a - b) / np.maximum(1.0, np.abs(b))))


class KernelSuite(BaseSuite):
    """Closed-form kernel against its defining identities, the PDE and the quadrature oracles"""

    @property
    def name(self) -> str:
        return "kernel"

    def register_checks(self) -> None:
        self._register("initial-slice", "K(0, x~) = sinc(L x~) at 100 points", self.initial_slice)
        self._register("rest-slice", "rest-frame line t = -vx carries sinc(L x / gamma)", self.rest_slice)
        self._register("rest-initial", "t = 0 closed form matches the contour quadrature", self.rest_initial)
        self._register("oracle-agreement", "closed form vs band quadrature at 200 random points", self.oracle_agreement)
        self._register("erfi-form", "sqrt|t| erfi form agrees with the complex-sqrt form for t < 0", self.erfi_form)
        self._register("pde-residual", "boosted diffusion residual at h = 5e-4", self.pde_residual)
        self._register("pde-order", "finite-difference residual converges at second order", self.pde_order)
        self._register("green-heat", "boosted Green function equals the rest heat kernel", self.green_heat)
        self._register("green-support", "boosted Green function is exactly 0 at 1000 points with x~ > t~/v", self.green_support)

    def initial_slice(self) -> Outcome:
        x = np.linspace(-6.0, 6.0, 100)
        return Outcome(_relative(np.asarray(kernel_boosted(np.zeros_like(x), x, self.p)), np.asarray(sinc(self.p.cutoff * x))), self.tol(1e-11))

    def rest_slice(self) -> Outcome:
        x = np.linspace(-6.0, 6.0, 100)
        value = np.asarray(kernel_rest(-self.p.v * x, x, self.p))
        expected = np.asarray(sinc(self.p.cutoff * x / self.p.gamma))
        return Outcome(_relative(value, expected), self.tol(1e-11))

    def rest_initial(self) -> Outcome:
        x = np.linspace(-4.0, 4.0, 81)
        return Outcome(_relative(np.asarray(kernel_initial(x, self.p)), np.asarray(oracle_kernel_contour(0.0, x, self.p))), self.tol(1e-10))

    def oracle_agreement(self) -> Outcome:
        rng = np.random.default_rng(3)
        t = rng.uniform(-1.0, 1.0, 200)
        x = rng.uniform(-6.0, 6.0, 200)
        t_tilde, x_tilde = boost_point(t, x, self.p, Direction.REST_TO_BOOSTED)
        closed = np.asarray(kernel_rest(t, x, self.p))
        quadrature = np.array([oracle_kernel(tb, xb, self.p) for tb, xb in zip(t_tilde, x_tilde)])
        return Outcome(_relative(closed, quadrature), self.tol(1e-9))

    def erfi_form(self) -> Outcome:
        rng = np.random.default_rng(4)
        t = rng.uniform(-1.0, -0.25, 50)
        x = rng.uniform(-1.0, 1.0, 50)
        return Outcome(_relative(np.asarray(kernel_rest_erfi(t, x, self.p)), np.asarray(kernel_rest(t, x, self.p))), self.tol(1e-10))

    def _residual(self, h: float):
        t_axis = np.linspace(-1.0, 1.0, RESIDUAL_GRID)
        x_axis = np.linspace(-5.0, 5.0, RESIDUAL_GRID)
        tt, xx = np.meshgrid(t_axis, x_axis, indexing="ij")
        p = self.p

        def k(dt: float, dx: float) -> np.ndarray:
            return np.asarray(kernel_boosted(tt + dt, xx + dx, p))

        centre = k(0.0, 0.0)
        k_t = (k(h, 0.0) - k(-h, 0.0)) / (2.0 * h)
        k_x = (k(0.0, h) - k(0.0, -h)) / (2.0 * h)
        k_tt = (k(h, 0.0) - 2.0 * centre + k(-h, 0.0)) / h ** 2
        k_xx = (k(0.0, h) - 2.0 * centre + k(0.0, -h)) / h ** 2
        k_tx = (k(h, h) - k(h, -h) - k(-h, h) + k(-h, -h)) / (4.0 * h ** 2)

        # (d_t + v d_x) n = gamma (d_x + v d_t)^2 n
        lhs = k_t + p.v * k_x
        rhs = p.gamma * (k_xx + 2.0 * p.v * k_tx + p.v ** 2 * k_tt)
        scale = np.abs(k_t) + p.v * np.abs(k_x) + p.gamma * (np.abs(k_xx) + 2.0 * p.v * np.abs(k_tx) + p.v ** 2 * np.abs(k_tt))
        return float(np.max(np.abs(lhs - rhs))), float(np.max(scale))

    def pde_residual(self) -> Outcome:
        residual, scale = self._residual(5e-4)
        return Outcome(residual / scale, self.tol(1e-4), detail=f"field scale {scale:.3g}")

    def pde_order(self) -> Outcome:
        coarse, _ = self._residual(1e-3)
        fine, _ = self._residual(5e-4)
        ratio = coarse / fine
        return Outcome(abs(ratio - 4.0), 0.5, detail=f"residual ratio {ratio:.3f} on halving h")

    def green_heat(self) -> Outcome:
        rng = np.random.default_rng(6)
        t = rng.uniform(0.05, 2.0, 100)
        x = rng.uniform(-3.0, 3.0, 100)
        t_tilde, x_tilde = boost_point(t, x, self.p, Direction.REST_TO_BOOSTED)
        boosted = np.asarray(green_boosted(t_tilde, x_tilde, self.p))
        rest = np.asarray(heat_kernel(t, x))
        return Outcome(float(np.max(np.abs(boosted - rest) / np.abs(rest))), self.tol(1e-12))

    def green_support(self) -> Outcome:
        rng = np.random.default_rng(9)
        t_tilde = rng.uniform(-3.0, 3.0, 1000)
        x_tilde = t_tilde / self.p.v + rng.uniform(1e-9, 5.0, 1000)
        values = np.asarray(green_boosted(t_tilde, x_tilde, self.p))
        outside = int(np.count_nonzero(values))
        return Outcome(float(np.max(np.abs(values))), 0.0, detail=f"{outside} nonzero values beyond the support")

import math

import numpy as np
import pytest

from src.kernel import kernel_rest, kernel_rest_derivative
from src.kinetic import (
    KineticError,
    KineticSliceSpec,
    KineticStabilityError,
    TwoStreamState,
    cattaneo_dispersion,
    cattaneo_step,
    conversion_rates,
    embedding_defect,
    embedding_density,
    evolve_two_stream,
    fick_gaussian,
    gaussian_two_stream,
    read_two_stream,
    stream_densities,
    two_stream_from_density,
    write_two_stream,
)


def cosine_field(t, x, order):
    return np.cos(np.asarray(x) + order * math.pi / 2.0)


def test_embedding_reproduces_smooth_field(half):
    for x in (-1.0, 0.0, 0.7, 3.0):
        value = embedding_density(0.0, x, KineticSliceSpec(xi_extent=30.0), half, field=cosine_field)
        assert value == pytest.approx(math.cos(x), abs=1e-12)


def test_streams_split_density_and_slope(half):
    n_plus, n_minus = stream_densities(0.0, 0.4, KineticSliceSpec(xi_extent=30.0), half, field=cosine_field)
    assert n_plus + n_minus == pytest.approx(math.cos(0.4), abs=1e-12)
    assert n_minus - n_plus == pytest.approx(-math.sin(0.4), abs=1e-12)


def test_defect_is_the_boundary_remainder(half):
    defect = embedding_defect(0.0, 0.0, KineticSliceSpec(xi_extent=5.0), half, field=cosine_field)
    assert defect != 0.0
    assert abs(defect) <= 2.0 * math.exp(-5.0)


def test_kernel_embedding(half):
    t, x = 0.2, 0.5
    density = embedding_density(t, x, KineticSliceSpec(xi_extent=60.0), half)
    kernel = kernel_rest(t, x, half)
    assert abs(density - kernel) <= 1e-6 * max(1.0, abs(kernel))


@pytest.mark.parametrize("t", [-1e-3, -1e-4, -1e-5, 1e-5, 1e-4, 1e-3])
def test_kernel_embedding_near_the_initial_slice(half, t):
    spec = KineticSliceSpec(xi_extent=60.0)
    for x in (-1.3, 0.5, 1.8):
        density = embedding_density(t, x, spec, half)
        kernel = kernel_rest(t, x, half)
        assert abs(density - kernel) <= 1e-6 * max(1.0, abs(kernel))


@pytest.mark.parametrize("t", [-1e-4, 1e-5, 1e-3])
def test_rates_near_the_initial_slice(half, t):
    rates = conversion_rates(t, 0.5, KineticSliceSpec(xi_extent=30.0), half)
    assert math.isfinite(rates.two_stream) and math.isfinite(rates.fokker_planck)
    slope = kernel_rest_derivative(t, 0.5, half, 1)
    assert rates.two_stream == pytest.approx(0.5 * slope, abs=1e-6 * max(1.0, abs(slope)))


def _scaled_envelope(extent, p):
    spec = KineticSliceSpec(xi_extent=extent)
    x = 0.5 + np.linspace(0.0, 2.0 * math.pi / p.sigma, 96, endpoint=False)
    return max(abs(embedding_defect(0.2, xi, spec, p)) * math.exp(xi) for xi in x)


def test_kernel_defect_falls_off_as_inverse_window(boost):
    # the far edge sees K ~ exp(-x) / |x|, so exp(x) * defect halves when the window doubles
    ratio = _scaled_envelope(40.0, boost) / _scaled_envelope(80.0, boost)
    assert ratio == pytest.approx(2.0, abs=0.3)


def test_kernel_streams_reproduce_slope(half):
    n_plus, n_minus = stream_densities(0.2, 0.5, KineticSliceSpec(xi_extent=30.0), half)
    slope = kernel_rest_derivative(0.2, 0.5, half, 1)
    assert abs((n_minus - n_plus) - slope) <= 1e-6 * max(1.0, abs(slope))


def test_fokker_planck_rate_differs_from_two_stream(half):
    rates = conversion_rates(0.2, 0.5, KineticSliceSpec(xi_extent=30.0), half)
    assert rates.normalized_difference >= 1e-3


def test_slice_spec_validation():
    with pytest.raises(KineticError):
        KineticSliceSpec(beta=0.0)
    with pytest.raises(KineticError):
        KineticSliceSpec(xi_extent=-1.0)


def test_equilibrium_is_a_fixed_point():
    grid = np.linspace(0.0, 9.9, 100)
    state = two_stream_from_density(grid, np.full(grid.shape, 2.0), periodic=True)
    final = evolve_two_stream(state, state.h, 50)
    assert np.allclose(final.n_plus, 1.0, rtol=0.0, atol=1e-14)
    assert np.allclose(final.n_minus, 1.0, rtol=0.0, atol=1e-14)
    assert final.time == pytest.approx(50 * state.h)


def test_homogeneous_flux_relaxes():
    grid = np.linspace(0.0, 9.9, 100)
    state = two_stream_from_density(grid, np.ones(grid.shape), np.ones(grid.shape), periodic=True)
    for _ in range(40):
        state = cattaneo_step(state, state.h)
        assert np.allclose(state.flux, math.exp(-state.time), rtol=0.0, atol=1e-12)
        assert np.allclose(state.density, 1.0, rtol=0.0, atol=1e-12)


def _bump(h):
    grid = h * np.arange(-400, 401)
    n = np.where(np.abs(grid) <= 1.0, np.cos(0.5 * math.pi * grid) ** 2, 0.0)
    return two_stream_from_density(grid, n, 0.3 * n)


def test_full_cell_step_is_an_exact_shift():
    grid = np.arange(20, dtype=float)
    spike = np.zeros(20)
    spike[5] = 1.0
    state = TwoStreamState(grid=grid, n_plus=spike, n_minus=np.zeros(20))
    density = cattaneo_step(state, 1.0).density
    assert density[6] == pytest.approx(1.0, abs=1e-15)
    assert np.count_nonzero(density) == 1


def test_partial_cell_step_is_upwind():
    grid = np.arange(20, dtype=float)
    spike = np.zeros(20)
    spike[5] = 1.0
    state = TwoStreamState(grid=grid, n_plus=spike, n_minus=np.zeros(20))
    density = cattaneo_step(state, 0.5).density
    assert density[5] == pytest.approx(0.5, abs=1e-15)
    assert density[6] == pytest.approx(0.5, abs=1e-15)


def test_particle_number_is_conserved():
    state = _bump(0.05)
    final = evolve_two_stream(state, state.h, 100)
    assert final.particle_number() == pytest.approx(state.particle_number(), rel=1e-12)


def test_upwind_substeps_conserve_on_a_ring():
    grid = np.linspace(0.0, 9.9, 100)
    n = 1.0 + 0.5 * np.sin(2.0 * math.pi * grid / 10.0)
    state = two_stream_from_density(grid, n, periodic=True)
    final = evolve_two_stream(state, 0.5 * state.h, 40)
    assert final.particle_number() == pytest.approx(state.particle_number(), rel=1e-12)


def test_signal_speed_is_one():
    state = _bump(0.05)
    final = evolve_two_stream(state, state.h, 100)
    outside = np.abs(final.grid) > 1.0 + final.time + 2.0 * state.h
    assert np.max(np.abs(final.density[outside])) <= 1e-12


def test_broad_gaussian_follows_fick():
    h, width = 0.05, 5.0
    grid = h * np.arange(-1000, 1001)
    final = evolve_two_stream(gaussian_two_stream(grid, width), h, 100)
    expected = fick_gaussian(grid, width, final.time)
    assert np.linalg.norm(final.density - expected) / np.linalg.norm(expected) <= 0.02


def test_time_step_cannot_exceed_grid_spacing():
    state = _bump(0.05)
    with pytest.raises(KineticStabilityError):
        cattaneo_step(state, 0.06)
    with pytest.raises(KineticStabilityError):
        cattaneo_step(state, 0.0)


def test_state_validation():
    with pytest.raises(KineticError):
        TwoStreamState(grid=np.array([0.0, 1.0, 3.0]), n_plus=np.zeros(3), n_minus=np.zeros(3))
    with pytest.raises(KineticError):
        TwoStreamState(grid=np.array([0.0, 1.0]), n_plus=np.zeros(2), n_minus=np.zeros(3))


def test_dispersion_roots():
    k = np.linspace(-3.0, 3.0, 61)
    for omega in cattaneo_dispersion(k):
        omega = np.asarray(omega)
        assert np.max(np.abs(omega * omega + 1j * omega - k * k)) <= 1e-13
    hydrodynamic, gapped = cattaneo_dispersion(0.0)
    assert hydrodynamic == pytest.approx(0.0, abs=1e-15)
    assert gapped == pytest.approx(-1j, abs=1e-15)
    # long wavelengths diffuse with unit diffusivity
    assert cattaneo_dispersion(0.01)[0] == pytest.approx(-1e-4j, rel=1e-3)


def test_state_file_round_trip(tmp_path):
    state = evolve_two_stream(_bump(0.05), 0.05, 10)
    path = write_two_stream(state, tmp_path / "state.csv")
    back = read_two_stream(path)
    assert np.array_equal(back.n_plus, state.n_plus)
    assert np.array_equal(back.n_minus, state.n_minus)
    assert back.time == pytest.approx(state.time, rel=1e-15)
    assert back.periodic is False

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from src.boost import (
    Branch,
    BoostDomainError,
    Direction,
    Frame,
    WaveVector,
    admissible_mask,
    boost_point,
    boost_wavevector,
    contour_endpoints,
    cutoff_closure_residual,
    cutoff_frequency,
    dispersion,
    is_kinetically_admissible,
    locate_cutoff_minimum,
    make_boost,
    solve_cutoff,
    stable_dispersion,
    stable_dispersion_slope,
    unstable_dispersion,
)

speeds = st.floats(min_value=0.01, max_value=0.99)


def test_golden_cutoffs():
    assert make_boost(0.5).cutoff == pytest.approx(4.0, abs=1e-12)
    assert make_boost(0.25).cutoff == pytest.approx(2.0 * math.sqrt(3.0), abs=1e-12)


def test_params_at_half():
    p = make_boost(0.5)
    assert p.gamma == pytest.approx(1.0 / math.sqrt(0.75), rel=1e-15)
    assert p.growth_rate == pytest.approx(math.sqrt(3.0), rel=1e-15)
    assert p.sigma == pytest.approx(math.sqrt(3.0), rel=1e-15)
    assert p.sampling_step == pytest.approx(math.pi / 4.0, rel=1e-15)


@pytest.mark.parametrize("v", [0.0, 1.0, -0.1, 1.5, float("nan"), float("inf"), "fast"])
def test_make_boost_rejects(v):
    with pytest.raises(BoostDomainError):
        make_boost(v)


def test_gamma_near_light_speed():
    p = make_boost(1.0 - 1e-12)
    assert math.isfinite(p.gamma)
    assert p.gamma == pytest.approx(1.0 / math.sqrt(2e-12), rel=1e-3)


@given(speeds, st.floats(-50, 50), st.floats(-50, 50))
def test_point_round_trip(v, t, x):
    p = make_boost(v)
    tb, xb = boost_point(t, x, p, Direction.REST_TO_BOOSTED)
    t2, x2 = boost_point(tb, xb, p, Direction.BOOSTED_TO_REST)
    scale = p.gamma ** 2 * (abs(t) + abs(x) + 1.0)
    assert abs(t2 - t) <= 1e-13 * scale
    assert abs(x2 - x) <= 1e-13 * scale


def test_boost_point_arrays_keep_shape(half):
    t, x = boost_point(np.zeros((3, 4)), np.ones((3, 4)), half, Direction.REST_TO_BOOSTED)
    assert t.shape == (3, 4) and x.shape == (3, 4)
    assert np.allclose(t, half.gamma * half.v)


def test_wavevector_frame_tags(half):
    wv = WaveVector(omega=1.0, k=0.5, frame=Frame.REST)
    boosted = boost_wavevector(wv, half)
    assert boosted.frame == Frame.BOOSTED
    back = boost_wavevector(boosted, half)
    assert back.frame == Frame.REST
    assert back.omega == pytest.approx(1.0) and back.k == pytest.approx(0.5)
    with pytest.raises(BoostDomainError):
        boost_wavevector(wv, half, Direction.BOOSTED_TO_REST)


@given(speeds, st.floats(-20, 20))
def test_branches_solve_boosted_quadratic(v, k):
    # rest dispersion omega = -i k^2 in boosted coordinates
    p = make_boost(v)
    for omega in (stable_dispersion(k, p), unstable_dispersion(k, p)):
        rest_omega = p.gamma * (omega - v * k)
        rest_k = p.gamma * (k - v * omega)
        residual = abs(rest_omega + 1j * rest_k ** 2)
        assert residual <= 1e-9 * (1.0 + abs(rest_k) ** 2)


@given(speeds, st.floats(-100, 100))
def test_stable_branch_is_damped(v, k):
    p = make_boost(v)
    assert stable_dispersion(k, p).imag <= 1e-12
    floor = 1.0 / (p.gamma * v ** 2)
    assert unstable_dispersion(k, p).imag >= floor * (1.0 - 1e-12)


def test_dispersion_selects_branch(half):
    k = np.linspace(-3, 3, 7)
    assert np.array_equal(dispersion(k, half), stable_dispersion(k, half))
    assert np.array_equal(dispersion(k, half, Branch.UNSTABLE), unstable_dispersion(k, half))


def test_endpoints(boost):
    lower, upper = contour_endpoints(boost)
    assert lower == complex(-boost.sigma, 1.0)
    assert upper == complex(boost.sigma, 1.0)
    rest_k = boost.gamma * (boost.cutoff - boost.v * stable_dispersion(boost.cutoff, boost))
    assert rest_k == pytest.approx(upper, abs=1e-10)


def test_admissibility_flips_at_cutoff(boost):
    inside = np.array([0.0, 0.5, 0.99]) * boost.cutoff
    outside = np.array([1.01, 2.0, 5.0]) * boost.cutoff
    assert np.all(admissible_mask(inside, boost))
    assert not np.any(admissible_mask(outside, boost))
    assert not np.any(admissible_mask(-outside, boost))


def test_is_kinetically_admissible_needs_params_for_boosted():
    wv = WaveVector(omega=0.0, k=0.0, frame=Frame.BOOSTED)
    with pytest.raises(BoostDomainError):
        is_kinetically_admissible(wv)
    assert is_kinetically_admissible(WaveVector(omega=0.0, k=0.5j, frame=Frame.REST))
    assert not is_kinetically_admissible(WaveVector(omega=0.0, k=1.5j, frame=Frame.REST))
    assert not is_kinetically_admissible(WaveVector(omega=-1j * (3 + 2j) ** 2, k=3 + 2j, frame=Frame.REST))


@given(speeds)
@settings(max_examples=50)
def test_numeric_cutoff_matches_closed_form(v):
    p = make_boost(v)
    assert solve_cutoff(p) == pytest.approx(p.cutoff, rel=1e-10)


def test_cutoff_closure(boost):
    assert cutoff_closure_residual(boost) <= 1e-12 * (boost.gamma * boost.cutoff) ** 2
    assert cutoff_frequency(boost) == pytest.approx(
        boost.cutoff * (2.0 + boost.v) / (1.0 + 2.0 * boost.v), rel=1e-15
    )


@pytest.mark.parametrize("v", [0.1, 0.25, 0.5, 0.9])
def test_cutoff_closure_across_speeds(v):
    p = make_boost(v)
    assert cutoff_closure_residual(p) <= 1e-11 * max(1.0, (p.gamma * p.cutoff) ** 2)


def test_cutoff_is_smallest_at_quarter_speed():
    v_min, lambda_min = locate_cutoff_minimum()
    assert v_min == pytest.approx(0.25, abs=0.98 / 9999)
    assert lambda_min == pytest.approx(2.0 * math.sqrt(3.0), abs=1e-9)
    with pytest.raises(BoostDomainError):
        locate_cutoff_minimum(lower=0.5, upper=0.2)


def test_stable_branch_has_no_jumps(boost):
    k = np.linspace(-boost.cutoff, boost.cutoff, 10_000)
    omega = np.asarray(stable_dispersion(k, boost))
    slope = np.abs(np.asarray(stable_dispersion_slope(k, boost)))
    assert np.all(np.abs(np.diff(omega)) <= np.diff(k) * np.maximum(slope[1:], slope[:-1]) * (1.0 + 1e-6))


def test_dispersion_slope_matches_difference(half):
    k, h = np.linspace(-3.0, 3.0, 13), 1e-6
    difference = (np.asarray(stable_dispersion(k + h, half)) - np.asarray(stable_dispersion(k - h, half))) / (2.0 * h)
    assert np.allclose(stable_dispersion_slope(k, half), difference, rtol=1e-8, atol=0.0)


def test_whole_branch_admissibility(boost):
    inside = np.linspace(-boost.cutoff, boost.cutoff, 1002)[1:-1]
    beyond = boost.cutoff * (1.0 + np.linspace(1e-3, 3.0, 1000))
    for k_tilde in inside:
        assert is_kinetically_admissible(WaveVector(omega=stable_dispersion(k_tilde, boost), k=k_tilde, frame=Frame.BOOSTED), boost)
    for k_tilde in np.concatenate((beyond, -beyond)):
        assert not is_kinetically_admissible(WaveVector(omega=stable_dispersion(k_tilde, boost), k=k_tilde, frame=Frame.BOOSTED), boost)


def test_rest_frame_dispersion_consistency(boost):
    rng = np.random.default_rng(7)
    for k_tilde in rng.uniform(-boost.cutoff, boost.cutoff, 100):
        rest = boost_wavevector(WaveVector(omega=stable_dispersion(k_tilde, boost), k=k_tilde, frame=Frame.BOOSTED), boost)
        assert abs(rest.omega + 1j * rest.k ** 2) <= 1e-12 * max(1.0, abs(rest.k) ** 2)

import math

import numpy as np
import pytest
from scipy.integrate import trapezoid

from src.bandlimited import (
    FieldSlice,
    ProfileDomainError,
    ProfileFormatError,
    ProfileInputError,
    Provenance,
    SpacetimeGrid,
    check_bounds,
    coefficient_spectrum,
    eval_profile,
    evolve_profile,
    format_profile,
    from_samples,
    l2_norm,
    parse_profile,
    random_profile,
    read_profile,
    reconstruct,
    reference_function,
    resample_profile,
    sample_function,
    write_profile,
)
from src.boost import Frame, make_boost
from src.oracle import band_energy_fraction


@pytest.fixture
def gaussian_profile(half):
    return sample_function(reference_function("gaussian", half), half, 20, decaying=True)


def test_from_samples_sorts_and_validates(half):
    prof = from_samples([(2, 0.5), (-1, 1.0), (0, -2.0)], half)
    assert prof.indices.tolist() == [-1, 0, 2]
    assert prof.coefficients.tolist() == [1.0, -2.0, 0.5]
    assert prof.window == 2
    assert prof.truncation_bound == 0.0
    with pytest.raises(ProfileInputError):
        from_samples([(1, 1.0), (1, 2.0)], half)
    with pytest.raises(ProfileInputError):
        from_samples([(0, float("inf"))], half)


def test_single_sample_vanishes_at_other_sampling_points(boost):
    prof = from_samples([(0, 1.0)], boost)
    a = np.concatenate((np.arange(-20, 0), np.arange(1, 21)))
    assert np.max(np.abs(np.asarray(eval_profile(prof, 0.0, math.pi * a / boost.cutoff, boost)))) <= 1e-12
    assert eval_profile(prof, 0.0, 0.0, boost) == pytest.approx(1.0, abs=1e-14)


def test_reconstruct_interpolates_coefficients(half):
    rng = np.random.default_rng(3)
    prof = random_profile(rng, half, 6, edge_order=0)
    assert np.allclose(reconstruct(prof, prof.positions), prof.coefficients, rtol=0.0, atol=1e-14)


def test_sampling_formula_at_zero_time_is_reconstruction(half):
    prof = random_profile(np.random.default_rng(4), half, 8)
    x = np.linspace(-10.0, 10.0, 57)
    assert np.max(np.abs(np.asarray(eval_profile(prof, 0.0, x, half)) - np.asarray(reconstruct(prof, x)))) <= 1e-12


def test_evolve_profile_returns_closed_form_slice(half, gaussian_profile):
    x = np.linspace(-5.0, 5.0, 21)
    field = evolve_profile(gaussian_profile, 0.25, x, half)
    assert field.provenance == Provenance.CLOSED_FORM
    assert field.frame == Frame.BOOSTED
    assert field.time == 0.25
    assert field.values.shape == x.shape


def test_profile_rejects_other_speed(gaussian_profile):
    with pytest.raises(ProfileDomainError):
        eval_profile(gaussian_profile, 0.0, 0.0, make_boost(0.25))


def test_parseval(half):
    prof = random_profile(np.random.default_rng(5), half, 10)
    step = math.pi / (4.0 * half.cutoff)
    count = int(round(70.0 * math.pi / half.cutoff / step))
    x = step * np.arange(-count, count + 1)
    values = np.asarray(reconstruct(prof, x))
    assert math.sqrt(trapezoid(values * values, x)) == pytest.approx(l2_norm(prof, half), rel=1e-5)


def test_norm_growth_is_bounded(half):
    prof = random_profile(np.random.default_rng(6), half, 10)
    step = math.pi / (4.0 * half.cutoff)
    count = int(round(70.0 * math.pi / half.cutoff / step))
    x = step * np.arange(-count, count + 1)
    initial = l2_norm(prof, half)
    for t_tilde in (-0.5, 0.5):
        values = np.asarray(eval_profile(prof, t_tilde, x, half))
        assert math.sqrt(trapezoid(values * values, x)) <= math.exp(abs(t_tilde) * half.growth_rate) * initial * (1.0 + 1e-6)


def test_forward_then_backward_recovers_profile(half):
    prof = random_profile(np.random.default_rng(23), half, 20)
    forward = resample_profile(prof, 0.5, half, 400)
    assert forward.truncation_bound is None
    half_width = 10.0 * math.pi / half.cutoff
    x = np.linspace(-half_width, half_width, 101)
    recovered = np.asarray(eval_profile(forward, -0.5, x, half))
    original = np.asarray(reconstruct(prof, x))
    assert np.max(np.abs(recovered - original)) <= 1e-6 * max(1.0, float(np.max(np.abs(original))))


def test_random_profile_edge_constraints(half):
    prof = random_profile(np.random.default_rng(8), half, 12, edge_order=4)
    scaled = prof.indices / 12.0
    for j in range(4):
        assert abs(np.sum((-1.0) ** prof.indices * scaled ** j * prof.coefficients)) <= 1e-12


def test_coefficient_spectrum_at_zero(half):
    prof = from_samples([(-1, 1.0), (0, 2.0), (3, -0.5)], half)
    assert coefficient_spectrum(prof)(np.array([0.0]))[0] == pytest.approx(math.pi / half.cutoff * 2.5)


def test_sample_function_window_and_tail(half):
    with pytest.raises(ProfileInputError):
        sample_function(reference_function("gaussian", half), half, 0)
    undecided = sample_function(reference_function("gaussian", half), half, 5)
    assert undecided.truncation_bound is None
    decaying = sample_function(reference_function("gaussian", half), half, 5, decaying=True)
    assert 0.0 < decaying.truncation_bound < 1e-3
    sinc_profile = sample_function(reference_function("sinc", half), half, 5, decaying=True)
    assert sinc_profile.coefficients[5] == 1.0
    assert np.max(np.abs(np.delete(sinc_profile.coefficients, 5))) <= 1e-15


def test_reference_functions(half):
    assert sample_function(reference_function("zero", half), half, 3).is_zero()
    quartic = reference_function("quartic", half)
    assert quartic(np.array([0.0]))[0] == 1.0
    with pytest.raises(ProfileInputError):
        reference_function("cosine", half)


def test_bounds_hold_for_gaussian_samples(half, gaussian_profile):
    report = check_bounds(gaussian_profile, half)
    assert report.pointwise_ok and report.spread_ok and report.spread_converged
    assert report.passed
    assert report.max_abs <= report.pointwise_bound
    assert report.spread >= 1.0 / (4.0 * half.cutoff)


def test_bounds_reject_zero_profile(half):
    with pytest.raises(ProfileDomainError):
        check_bounds(sample_function(reference_function("zero", half), half, 3), half)


def test_forward_evolution_smooths(half, gaussian_profile):
    x = np.linspace(-1.0, 1.0, 401) * 20 * math.pi / half.cutoff
    norms = [float(np.max(np.abs(np.asarray(eval_profile(gaussian_profile, t, x, half))))) for t in (0.0, 0.25, 0.5)]
    assert norms[0] > norms[1] > norms[2]


def test_backward_evolution_feeds_band_edge(half, gaussian_profile):
    phi = coefficient_spectrum(gaussian_profile)
    fractions = [band_energy_fraction(phi, t, half) for t in (0.0, -0.25, -0.5)]
    assert fractions[0] < fractions[1] < fractions[2]


def test_profile_text_round_trip(half, tmp_path, gaussian_profile):
    path = tmp_path / "gaussian.profile"
    write_profile(gaussian_profile, path)
    text = path.read_text()
    assert text.splitlines()[0] == f"lambda={half.cutoff!r} v={half.v!r}"
    back = read_profile(path)
    assert np.array_equal(back.indices, gaussian_profile.indices)
    assert np.array_equal(back.coefficients, gaussian_profile.coefficients)
    assert format_profile(back) == text


@pytest.mark.parametrize(
    "text, line",
    [
        ("", 1),
        ("v=0.5\n0\t1.0\n", 1),
        ("lambda=3.0 v=0.5\n0\t1.0\n", 1),
        ("lambda=4.0 v=1.5\n", 1),
        ("lambda=4.0 v=0.5\n0\t1.0\n1 2.0\n", 3),
        ("lambda=4.0 v=0.5\n0\t1.0\n0\t2.0\n", 3),
        ("lambda=4.0 v=0.5\n0\tnan\n", 2),
        ("lambda=4.0 v=0.5\nx\t1.0\n", 2),
    ],
)
def test_parse_errors_name_the_line(text, line):
    with pytest.raises(ProfileFormatError) as excinfo:
        parse_profile(text)
    assert excinfo.value.line == line
    assert f"line {line}" in str(excinfo.value)


def test_parse_skips_comments_and_blank_lines():
    prof = parse_profile("lambda=4.0 v=0.5\n# samples\n\n-1\t0.25\n1\t0.75\n")
    assert prof.indices.tolist() == [-1, 1]


def test_field_slice_validation():
    with pytest.raises(ProfileInputError):
        FieldSlice(time=0.0, frame=Frame.BOOSTED, positions=np.array([0.0, 0.0]), values=np.zeros(2), provenance=Provenance.CLOSED_FORM)
    with pytest.raises(ProfileInputError):
        FieldSlice(time=0.0, frame=Frame.BOOSTED, positions=np.array([0.0, 1.0]), values=np.array([1.0, np.nan]), provenance=Provenance.CLOSED_FORM)


def test_grid_shift(half):
    grid = SpacetimeGrid(frame=Frame.BOOSTED, times=(0.0, 2.0), xmin=-1.0, xmax=1.0, nx=3, shift=True)
    assert np.allclose(grid.positions_at(2.0, half), [0.0, 1.0, 2.0])
    assert np.allclose(SpacetimeGrid(Frame.BOOSTED, (2.0,), -1.0, 1.0, 3).positions_at(2.0, half), [-1.0, 0.0, 1.0])
    with pytest.raises(ProfileInputError):
        SpacetimeGrid(Frame.REST, (0.0,), 0.0, 1.0, 1)

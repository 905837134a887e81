"""Measurement: speed fits, profile comparison, plateau and switch detection."""

import numpy as np
import pytest

from ripplewave.errors import IncomparableError, UsageError
from ripplewave.measure import (
    WaveMeasurement,
    compare_profiles,
    estimate_switch_points,
    measure_wave_speed,
    plateau_fit,
)
from ripplewave.sim import FieldState, Grid
from ripplewave.waves import construct_admissible_wave

N = 100
DT = 0.05


def _snapshots(base, cells_per_frame, n_frames=15, dt=DT):
    """Rigidly translating snapshots: roll by ``cells_per_frame`` each frame."""
    grid = Grid(len(base))
    out = []
    for i in range(n_frames):
        prof = np.roll(base, round(i * cells_per_frame))
        out.append(FieldState(grid, prof.copy(), prof[::-1].copy(),
                              t=i * dt))
    return out


@pytest.fixture
def bumpy():
    rng = np.random.default_rng(11)
    return 1.0 + 0.4 * rng.random(N)


def test_speed_positive_roll(bumpy):
    meas = measure_wave_speed(_snapshots(bumpy, 2), field="u")
    grid_dx = 1.0 / N
    assert meas.is_traveling
    assert meas.speed == pytest.approx(2 * grid_dx / DT, rel=1e-9)
    assert meas.speed_ci < 1e-9
    assert meas.comoving_std < 1e-12
    assert meas.periodicity_error < 1e-12


def test_speed_negative_roll(bumpy):
    meas = measure_wave_speed(_snapshots(bumpy, -1), field="u")
    assert meas.speed == pytest.approx(-1.0 / N / DT, rel=1e-9)


def test_speed_fractional_cells_per_frame(bumpy):
    # one cell every other frame: the fit averages the staircase
    snaps = _snapshots(bumpy, 0.5, n_frames=21)
    meas = measure_wave_speed(snaps, field="u")
    assert meas.speed == pytest.approx(0.5 / N / DT, rel=0.05)


def test_flat_profile_reports_not_traveling():
    grid = Grid(64)
    snaps = [FieldState(grid, np.ones(64), np.ones(64), t=i * DT)
             for i in range(12)]
    meas = measure_wave_speed(snaps, field="u")
    assert not meas.is_traveling
    assert meas.speed == 0.0
    np.testing.assert_allclose(meas.profile, 1.0)


def test_too_few_snapshots(bumpy):
    with pytest.raises(UsageError):
        measure_wave_speed(_snapshots(bumpy, 1, n_frames=9), field="u")


def test_zero_time_span(bumpy):
    snaps = _snapshots(bumpy, 1, n_frames=12, dt=0.0)
    with pytest.raises(UsageError):
        measure_wave_speed(snaps, field="u")


def test_ratio_field_handles_zero_denominator(bumpy):
    grid = Grid(N)
    snaps = []
    for i in range(12):
        u = np.roll(bumpy, i).copy()
        u[3] = 0.0  # empty cell: ratio undefined there
        u1 = 0.5 * u
        snaps.append(FieldState(grid, u, u.copy(), u1, 0.5 * u, t=i * DT))
    meas = measure_wave_speed(snaps, field="u1_over_u")
    assert np.all(np.isfinite(meas.profile))
    # away from the patched cell the ratio is exactly one half
    assert np.median(meas.profile) == pytest.approx(0.5, abs=1e-9)


def test_ratio_field_requires_memory(bumpy):
    snaps = _snapshots(bumpy, 1)
    with pytest.raises(UsageError):
        measure_wave_speed(snaps, field="u1_over_u")


def test_unknown_field(bumpy):
    with pytest.raises(UsageError):
        measure_wave_speed(_snapshots(bumpy, 1), field="w")


def _measurement_from_profile(profile, n):
    grid = Grid(n)
    return WaveMeasurement(
        "u", 1.0, 0.0, True, np.asarray(profile, dtype=float), grid.x,
        np.zeros(12), np.linspace(0.0, 1.0, 12), 0.0, 0.0,
    )


def test_compare_profiles_recovers_own_samples(ramp_model):
    wave = construct_admissible_wave(ramp_model, r=1.670578,
                                     xi1=0.49438, xi2=1.0)
    n = 512
    x = Grid(n).x
    sampled = wave.sample_P(np.mod(x * wave.period, wave.period))
    shifted = np.roll(sampled, 7)
    report = compare_profiles(wave, _measurement_from_profile(shifted, n))
    assert report.n_waves == 1
    assert report.l1_error < 1e-6
    assert report.amplitude == pytest.approx(float(wave.P.max() - wave.P.min()))
    assert report.excluded_cells > 0
    # the shift is recovered modulo the period
    assert (report.optimal_shift / (1.0 / n)) % n == pytest.approx(7, abs=0.51)


def test_compare_profiles_scores_distortion(ramp_model):
    wave = construct_admissible_wave(ramp_model, r=1.670578,
                                     xi1=0.49438, xi2=1.0)
    n = 512
    x = Grid(n).x
    sampled = wave.sample_P(np.mod(x * wave.period, wave.period))
    warped = sampled + 0.05 * np.sin(2 * np.pi * 3 * x)
    report = compare_profiles(wave, _measurement_from_profile(warped, n))
    amp = float(wave.P.max() - wave.P.min())
    assert 0.01 < report.l1_error < 0.1
    assert report.linf_error == pytest.approx(0.05 / amp, rel=0.2)


def test_compare_rejects_non_tiling_period(ramp_model):
    wave = construct_admissible_wave(ramp_model, r=1.670578,
                                     xi1=0.35, xi2=0.7)
    n = 256
    profile = 1.0 + 0.3 * np.sin(2 * np.pi * Grid(n).x)
    with pytest.raises(IncomparableError):
        compare_profiles(wave, _measurement_from_profile(profile, n))


def test_plateau_fit_two_levels():
    rng = np.random.default_rng(4)
    profile = np.where(np.arange(1000) < 620, 0.3, 0.8)
    profile = profile + 1e-3 * rng.standard_normal(1000)
    (lo, hi), residual = plateau_fit(profile)
    assert lo == pytest.approx(0.3, abs=0.01)
    assert hi == pytest.approx(0.8, abs=0.01)
    assert residual < 0.02


def test_plateau_fit_flat():
    (lo, hi), residual = plateau_fit(np.full(100, 1.7))
    assert lo == hi == pytest.approx(1.7)
    assert residual == 0.0


def test_switch_points_single_crest():
    n = 1000
    x = Grid(n).x
    profile = np.where((x >= 0.2) & (x < 0.45), 1.4, 0.7)
    xi1, xi2 = estimate_switch_points(profile, 1.0 / n)
    assert xi2 == pytest.approx(1.0)
    assert xi1 == pytest.approx(0.25, abs=2.0 / n)


def test_switch_points_two_crests():
    n = 1000
    x = Grid(n).x
    phase = np.mod(x, 0.5)
    profile = np.where((phase >= 0.1) & (phase < 0.25), 1.4, 0.7)
    xi1, xi2 = estimate_switch_points(profile, 1.0 / n)
    assert xi2 == pytest.approx(0.5)
    assert xi1 == pytest.approx(0.15, abs=2.0 / n)

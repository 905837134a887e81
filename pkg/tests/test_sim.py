"""Solver: transport accuracy, conservation, positivity, blow-up guards."""

import numpy as np
import pytest

from oracles import roll_advect
from ripplewave.errors import BlowUpError, ConfigError, ParameterError
from ripplewave.model import ModelParams
from ripplewave.ode import OdeState, integrate_ode
from ripplewave.rates import Constant, SigmoidExp
from ripplewave.sim import (
    FieldState,
    Grid,
    SimConfig,
    initial_condition,
    simulate,
    step,
)


def test_grid_properties():
    grid = Grid(100)
    assert grid.dx == pytest.approx(0.01)
    assert len(grid.x) == 100
    assert grid.x[0] == pytest.approx(0.005)
    with pytest.raises(ConfigError):
        Grid(8)


def test_initial_condition_sine_mass(trivial_model):
    grid = Grid(64)
    state = initial_condition("isotropic_plus_sine", grid, trivial_model,
                              amplitude=0.3)
    assert state.total_mass == pytest.approx(2.0, rel=1e-12)
    # sine perturbs the direction split, not the local total
    np.testing.assert_allclose(state.u + state.v, 2.0, rtol=1e-12)
    assert np.ptp(state.u) > 0.5
    # refractory fields start at the pointwise relaxed fractions
    gam = trivial_model.aging.value(state.v)
    lam = trivial_model.turning.value(state.v)
    np.testing.assert_allclose(state.u1, state.u * gam / (gam + lam))


def test_initial_condition_cosine_pair(trivial_model):
    grid = Grid(64)
    state = initial_condition("isotropic_plus_cosine_pair", grid,
                              trivial_model, amplitude=0.3)
    # in-phase perturbation: u = v pointwise, total density varies
    np.testing.assert_allclose(state.u, state.v, rtol=1e-12)
    assert np.ptp(state.u + state.v) > 0.5


def test_initial_condition_memory_free(trivial_model):
    grid = Grid(64)
    state = initial_condition("isotropic_plus_sine", grid, trivial_model,
                              memory=False)
    assert state.memory_free
    assert state.u1 is None


def test_initial_condition_custom_csv(tmp_path, trivial_model):
    grid = Grid(16)
    rows = np.column_stack([
        grid.x, np.full(16, 0.9), np.full(16, 1.1),
        np.full(16, 0.45), np.full(16, 0.55),
    ])
    path = tmp_path / "ic.csv"
    np.savetxt(path, rows, delimiter=",", header="x,u,v,u1,v1")
    state = initial_condition("custom_csv", grid, trivial_model, path=path)
    np.testing.assert_allclose(state.u, 0.9)
    np.testing.assert_allclose(state.v1, 0.55)

    bad = tmp_path / "bad.csv"
    np.savetxt(bad, rows[:10], delimiter=",", header="x,u,v,u1,v1")
    with pytest.raises(ConfigError):
        initial_condition("custom_csv", grid, trivial_model, path=bad)


def test_unknown_initial_condition(trivial_model):
    with pytest.raises(ParameterError):
        initial_condition("vortex", Grid(32), trivial_model)


def test_cfl_guard(trivial_model):
    grid = Grid(32)
    config = SimConfig(dt=0.05, t_end=1.0)  # dx = 0.03125 < dt
    with pytest.raises(ConfigError):
        config.resolved_dt(grid)
    relaxed = SimConfig(dt=0.05, t_end=1.0, allow_unsafe_dt=True)
    with pytest.warns(UserWarning):
        assert relaxed.resolved_dt(grid) == 0.05


def test_diffusion_cfl_always_enforced(trivial_model):
    grid = Grid(32)
    config = SimConfig(dt=0.03, t_end=1.0, diffusion_eps=0.5,
                       allow_unsafe_dt=True)
    with pytest.raises(ConfigError):
        config.resolved_dt(grid)


def test_transport_exact_at_unit_courant(trivial_model):
    """At Courant 1 the upwind update is an exact cell shift."""
    grid = Grid(50)
    rng = np.random.default_rng(3)
    u = 1.0 + 0.5 * rng.random(50)
    v = 1.0 + 0.5 * rng.random(50)
    state = FieldState(grid, u.copy(), v.copy())

    class NoReaction:
        def value(self, rho):
            return np.zeros_like(np.asarray(rho, dtype=float)) + 1e-300

        def derivative(self, rho):
            return np.zeros_like(np.asarray(rho, dtype=float))

    quiet = ModelParams.__new__(ModelParams)
    object.__setattr__(quiet, "turning", NoReaction())
    object.__setattr__(quiet, "aging", NoReaction())
    object.__setattr__(quiet, "total_mass", 2.0)
    object.__setattr__(quiet, "domain_length", 1.0)
    object.__setattr__(quiet, "speed", 1.0)

    out = step(state, quiet, dt=grid.dx)
    np.testing.assert_allclose(out.u, np.roll(u, 1), rtol=1e-12)
    np.testing.assert_allclose(out.v, np.roll(v, -1), rtol=1e-12)


def test_transport_matches_reference_stencil(trivial_model):
    """Sub-unit Courant upwind agrees with the reference implementation."""
    grid = Grid(64)
    rng = np.random.default_rng(5)
    u = 1.0 + 0.3 * rng.random(64)
    from ripplewave.sim import _advect

    courant = 0.7
    got = u.copy()
    for _ in range(10):
        got = _advect(got, courant, +1)
    expected = roll_advect(u, courant, +1, 10)
    np.testing.assert_allclose(got, expected, rtol=1e-12)


def test_mass_conserved_exactly(onset_model):
    grid = Grid(128)
    state = initial_condition("isotropic_plus_sine", grid, onset_model,
                              amplitude=0.2)
    result = simulate(state, onset_model, SimConfig(t_end=5.0))
    assert result.mass_drift < 1e-12


def test_mass_conserved_memory_free(selection_model):
    grid = Grid(128)
    state = initial_condition("isotropic_plus_sine", grid, selection_model,
                              amplitude=0.5, memory=False)
    result = simulate(state, selection_model, SimConfig(t_end=5.0))
    assert result.mass_drift < 1e-12


def test_refractory_stays_below_family(onset_model):
    grid = Grid(128)
    state = initial_condition("isotropic_plus_sine", grid, onset_model,
                              amplitude=0.3)
    result = simulate(state, onset_model, SimConfig(t_end=3.0))
    final = result.final
    assert np.all(final.u1 <= final.u + 1e-9)
    assert np.all(final.v1 <= final.v + 1e-9)
    assert result.min_density > -1e-12


def test_uniform_state_tracks_ode(cycle_model):
    """A spatially uniform run must follow the well-mixed dynamics."""
    grid = Grid(64)
    d0 = 0.05
    u = np.full(64, 1.0 + d0)
    v = np.full(64, 1.0 - d0)
    state = FieldState(grid, u, v, np.zeros(64), np.zeros(64))
    t_end = 8.0
    result = simulate(state, cycle_model,
                      SimConfig(t_end=t_end, dt=0.99 * grid.dx / 4,
                                scheme="splitting_rk4_reaction"))
    traj = integrate_ode(OdeState(d0, 0.0, 0.0), cycle_model, t_end)
    d_sim = 0.5 * float(result.final.u[0] - result.final.v[0])
    assert d_sim == pytest.approx(traj.final.d, abs=1e-4)
    # and stays uniform
    assert np.ptp(result.final.u) < 1e-10


def test_snapshots_cadence(trivial_model):
    grid = Grid(32)
    state = initial_condition("isotropic_plus_sine", grid, trivial_model)
    result = simulate(state, trivial_model,
                      SimConfig(t_end=0.5, snapshot_every=4))
    assert len(result.snapshots) == len(result.times)
    assert result.times[0] == 0.0
    assert result.times[-1] == pytest.approx(0.5)
    spacing = np.diff(result.times)[:-1]
    np.testing.assert_allclose(spacing, spacing[0], rtol=1e-9)


def test_final_time_exact(trivial_model):
    grid = Grid(32)
    state = initial_condition("isotropic_plus_sine", grid, trivial_model)
    result = simulate(state, trivial_model, SimConfig(t_end=0.123))
    assert result.final.t == pytest.approx(0.123, abs=1e-12)


def test_blow_up_reported_with_location(trivial_model):
    grid = Grid(32)
    u = np.full(32, 1.0)
    u[7] = np.nan
    state = FieldState(grid, u, np.ones(32))
    with pytest.raises(BlowUpError) as err:
        simulate(state, trivial_model, SimConfig(t_end=0.5))
    assert err.value.cell == 7


def test_rk4_reaction_scheme_close_to_euler(trivial_model):
    # stable dynamics: scheme differences must not amplify
    grid = Grid(128)
    state = initial_condition("isotropic_plus_sine", grid, trivial_model,
                              amplitude=0.3)
    cfg_e = SimConfig(t_end=2.0, scheme="splitting_euler")
    cfg_r = SimConfig(t_end=2.0, scheme="splitting_rk4_reaction")
    out_e = simulate(state, trivial_model, cfg_e)
    out_r = simulate(state, trivial_model, cfg_r)
    assert out_r.mass_drift < 1e-12
    np.testing.assert_allclose(out_r.final.u, out_e.final.u, atol=5e-3)


def test_diffusion_damps_wiggles(onset_model):
    grid = Grid(256)
    state = initial_condition("isotropic_plus_sine", grid, onset_model,
                              amplitude=0.2)
    plain = simulate(state, onset_model, SimConfig(t_end=2.0))
    smoothed = simulate(state, onset_model,
                        SimConfig(t_end=2.0, diffusion_eps=0.02))
    assert smoothed.mass_drift < 1e-12
    assert np.ptp(smoothed.final.u) < np.ptp(plain.final.u)


def test_step_returns_new_state(trivial_model):
    grid = Grid(32)
    state = initial_condition("isotropic_plus_sine", grid, trivial_model)
    before = state.u.copy()
    out = step(state, trivial_model, dt=grid.dx * 0.5)
    assert out is not state
    np.testing.assert_allclose(state.u, before)
    assert out.t == pytest.approx(grid.dx * 0.5)

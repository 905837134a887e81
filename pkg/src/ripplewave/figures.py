"""Parameter studies behind the headline results, exported as CSV/JSON.

Each study writes plain data files into an output directory so they can be
plotted with any tool (the demo scripts show matplotlib renderings).  The
``fast`` flag shrinks grids and horizons by roughly an order of magnitude
for smoke testing; published-quality settings are the defaults.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .dispersion import isotropic_transport_stability
from .measure import measure_wave_speed, plateau_fit
from .model import ModelParams
from .ode import (
    OdeState,
    find_steady_states,
    hopf_thresholds,
    integrate_ode,
)
from .rates import Constant, PiecewiseLinearStep, Quadratic, SigmoidExp, SigmoidRational, TripleStep
from .sim import Grid, SimConfig, initial_condition, simulate
from .waves import construct_admissible_wave, find_stable_tuples

__all__ = ["reproduce_figure", "FIGURES"]


def _onset_model(gamma):
    return ModelParams(SigmoidExp(2.5, 8.0, 10.0), Constant(gamma))


def _fig_cycle_onset(out_dir: Path, fast: bool, seed: int):
    """Reversal-rate sweep through the oscillation window.

    For each aging rate the isotropic steady state is classified and, past
    the first threshold, the attracting orbit is sampled to record the
    oscillation envelope of the direction imbalance.
    """
    gammas = np.linspace(1.0, 17.0, 9 if fast else 65)
    t_end = 30.0 if fast else 120.0
    dt = 4e-3 if fast else 1e-3
    rows = []
    for gamma in gammas:
        m = _onset_model(float(gamma))
        states = find_steady_states(m)
        iso = next(s for s in states if s.kind == "isotropic")
        traj = integrate_ode(
            OdeState(0.05, 0.0, 0.0), m, t_end, dt=dt, store_every=50,
        )
        rows.append({
            "gamma": float(gamma),
            "n_fixed_points": len(states),
            "isotropic_stable": iso.stable,
            "cycle": traj.limit_cycle,
            "cycle_min_d": traj.tail_min_d,
            "cycle_max_d": traj.tail_max_d,
        })
    with open(out_dir / "hopf_sweep.csv", "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(rows[0]))
        writer.writeheader()
        writer.writerows(rows)
    th = hopf_thresholds(_onset_model(1.0))
    with open(out_dir / "thresholds.json", "w") as fh:
        json.dump({
            "gamma_star": th.gamma_star,
            "gamma_hat": th.gamma_hat,
            "gamma_star2": th.gamma_star2,
            "applicable": th.applicable,
        }, fh, indent=2)
    return ["hopf_sweep.csv", "thresholds.json"]


def _fig_pattern_selection(out_dir: Path, fast: bool, seed: int):
    """Memory-free runs from four starting states settling on one pattern."""
    m = ModelParams(SigmoidRational(0.5, 10.0, 0.125), Constant(1.0))
    n = 400 if fast else 1600
    t_end = 20.0 if fast else 98.0
    grid = Grid(n)
    config = SimConfig(t_end=t_end, snapshot_every=0)
    starts = [
        ("sine", initial_condition("isotropic_plus_sine", grid, m,
                                   amplitude=0.5, memory=False)),
        ("cosine_pair", initial_condition("isotropic_plus_cosine_pair", grid, m,
                                          amplitude=0.5, memory=False)),
        ("step", initial_condition("step_profile", grid, m, amplitude=0.6,
                                   memory=False)),
        ("random", initial_condition("random", grid, m, amplitude=0.5,
                                     memory=False, seed=seed)),
    ]
    table = [grid.x]
    header = ["x"]
    levels = {}
    for name, state in starts:
        result = simulate(state, m, config)
        table.append(result.final.u)
        header.append(f"u_{name}")
        levels[name] = plateau_fit(result.final.u)[0]
    np.savetxt(
        out_dir / "final_profiles.csv", np.column_stack(table),
        delimiter=",", header=",".join(header), comments="",
    )
    tuples = find_stable_tuples(m)
    with open(out_dir / "tuples.json", "w") as fh:
        json.dump({
            "tuples": [
                {"values": list(t.values), "r": t.r, "selected": t.selected}
                for t in tuples
            ],
            "measured_levels": levels,
        }, fh, indent=2)
    return ["final_profiles.csv", "tuples.json"]


def _fig_memory_waves(out_dir: Path, fast: bool, seed: int):
    """Full-system run past the transport instability: ripple space-time plot."""
    m = ModelParams(SigmoidExp(2.5, 8.0, 10.0), Constant(1.5))
    n = 400 if fast else 1600
    t_end = 12.0 if fast else 50.0
    window = 2.0
    grid = Grid(n)
    snap_dt = 0.05
    every = max(1, int(round(snap_dt / (0.99 * grid.dx))))
    config = SimConfig(t_end=t_end, snapshot_every=every)
    state = initial_condition("isotropic_plus_sine", grid, m, amplitude=0.1,
                              seed=seed)
    result = simulate(state, m, config)
    keep = [s for s in result.snapshots if s.t >= t_end - window]
    times = np.array([s.t for s in keep])
    u_block = np.array([s.u for s in keep])
    total_block = np.array([s.u + s.v for s in keep])
    np.savetxt(out_dir / "spacetime_u.csv", u_block, delimiter=",")
    np.savetxt(out_dir / "spacetime_total.csv", total_block, delimiter=",")
    np.savetxt(out_dir / "spacetime_times.csv", times, delimiter=",")
    report = isotropic_transport_stability(m)
    with open(out_dir / "stability.json", "w") as fh:
        json.dump({
            "verdict": report.verdict,
            "most_unstable_mode": report.most_unstable_k,
            "growth_rate": report.most_unstable_growth,
        }, fh, indent=2)
    return [
        "spacetime_u.csv", "spacetime_total.csv", "spacetime_times.csv",
        "stability.json",
    ]


def _fig_wave_zoo(out_dir: Path, fast: bool, seed: int):
    """Settled wave profiles for three turning/aging combinations."""
    cases = [
        ("ramp_step", ModelParams(PiecewiseLinearStep(1.0, 2.0, 0.2),
                                  Constant(1.0))),
        ("ramp_step_quadratic_aging",
         ModelParams(PiecewiseLinearStep(1.0, 2.0, 0.2), Quadratic(0.5, 0.5))),
        ("triple_step", ModelParams(
            TripleStep(1.0, (0.6, 0.6, 0.6), (0.7, 1.0, 1.3), 0.1),
            Constant(1.0))),
    ]
    n = 400 if fast else 1600
    t_end = 30.0 if fast else 100.0
    written = []
    summary = {}
    for name, m in cases:
        grid = Grid(n)
        snap_dt = 0.05
        every = max(1, int(round(snap_dt / (0.99 * grid.dx))))
        config = SimConfig(t_end=t_end, snapshot_every=every)
        state = initial_condition("isotropic_plus_sine", grid, m,
                                  amplitude=0.1, seed=seed)
        result = simulate(state, m, config)
        tail = [s for s in result.snapshots if s.t >= t_end - 5.0]
        meas = measure_wave_speed(tail, "u")
        np.savetxt(
            out_dir / f"profile_{name}.csv",
            np.column_stack([grid.x, meas.profile]),
            delimiter=",", header="x,u", comments="",
        )
        written.append(f"profile_{name}.csv")
        summary[name] = {
            "speed": meas.speed,
            "traveling": meas.is_traveling,
            "u_range": [float(meas.profile.min()), float(meas.profile.max())],
        }
        try:
            wave = construct_admissible_wave(m, target_mass=1.0)
            summary[name]["constructed"] = {
                "r": wave.r, "period": wave.period, "mass": wave.mass,
                "P_range": [float(wave.P.min()), float(wave.P.max())],
            }
        except Exception as exc:  # record rather than fail the whole study
            summary[name]["constructed"] = {"error": str(exc)}
    with open(out_dir / "wave_zoo.json", "w") as fh:
        json.dump(summary, fh, indent=2)
    written.append("wave_zoo.json")
    return written


FIGURES = {
    "fig1": _fig_cycle_onset,
    "fig2": _fig_pattern_selection,
    "fig4": _fig_memory_waves,
    "fig5": _fig_wave_zoo,
}


def reproduce_figure(fig_id, out_dir, fast=False, seed=0):
    """Regenerate the data behind one parameter study.

    Returns the list of files written into ``out_dir``.
    """
    if fig_id not in FIGURES:
        raise ValueError(
            f"unknown study {fig_id!r}; available: {sorted(FIGURES)}"
        )
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return FIGURES[fig_id](out, fast, seed)

"""Command-line front end.

Every subcommand reads the model from a small JSON file (``--model``) with
two rate-function blocks, e.g.::

    {"turning": {"kind": "sigmoid_exp", "lam_lo": 2.5, "lam_hi": 8.0,
                 "alpha": 10.0},
     "aging":   {"kind": "constant", "value": 1.5}}

and writes its results as CSV/JSON files into ``--out``.  Exit codes:
0 success, 2 bad input or configuration, 3 numerical failure, 4 no result
(no wave, empty tuple list, incomparable profiles).
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .dispersion import isotropic_transport_stability
from .errors import (
    ConfigError,
    ConstructionError,
    DomainError,
    IncomparableError,
    NoWaveError,
    NumericError,
    ParameterError,
    UsageError,
)
from .figures import FIGURES, reproduce_figure
from .measure import compare_profiles, estimate_switch_points, measure_wave_speed
from .model import ModelParams, load_model
from .ode import OdeState, find_steady_states, hopf_thresholds, integrate_ode
from .rates import Constant
from .sim import FieldState, Grid, SimConfig, initial_condition, simulate
from .waves import AdmissibleWave, construct_admissible_wave, find_stable_tuples

_NO_RESULT = (NoWaveError, IncomparableError)
_BAD_INPUT = (ParameterError, ConfigError, UsageError, DomainError)
_NUMERIC = (NumericError, ConstructionError)


def _out_dir(args):
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_json(path, payload):
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2)


def _state_table(state: FieldState):
    cols = [state.grid.x, state.u, state.v]
    header = ["x", "u", "v"]
    if state.u1 is not None:
        cols += [state.u1, state.v1]
        header += ["u1", "v1"]
    return np.column_stack(cols), ",".join(header)


# --------------------------------------------------------------------------
# subcommands


_INIT_ALIASES = {
    "sine": "isotropic_plus_sine",
    "cosine": "isotropic_plus_cosine_pair",
    "cosine_pair": "isotropic_plus_cosine_pair",
    "step": "step_profile",
    "custom": "custom_csv",
}

# one source of truth for simulate settings: command line > --sim file > these
_SIM_DEFAULTS = {
    "n": 400, "t_end": 10.0, "dt": None, "ic": "isotropic_plus_sine",
    "ic_file": None, "amplitude": 0.1, "wavenumber": 1, "seed": None,
    "memory_free": False, "snapshot_every": 0, "diffusion_eps": 0.0,
    "scheme": "splitting_euler", "allow_unsafe_dt": False,
}


def _sim_settings(args):
    """Resolve simulate settings from flags, ``--sim`` file, and defaults."""
    settings = dict(_SIM_DEFAULTS)
    if args.sim:
        with open(args.sim) as fh:
            values = json.load(fh)
        for key, value in values.items():
            if key not in _SIM_DEFAULTS:
                raise ConfigError(
                    f"unknown simulate setting {key!r} in {args.sim}"
                )
            settings[key] = value
    for key in _SIM_DEFAULTS:
        given = getattr(args, key)
        if given is not None:
            settings[key] = given
    if args.init:
        kind, _, amp = args.init.partition(":")
        settings["ic"] = _INIT_ALIASES.get(kind, kind)
        if amp:
            settings["amplitude"] = float(amp)
    return settings


def _cmd_simulate(args):
    m = load_model(args.model)
    out = _out_dir(args)
    s = _sim_settings(args)
    grid = Grid(s["n"])
    config = SimConfig(
        dt=s["dt"], t_end=s["t_end"], diffusion_eps=s["diffusion_eps"],
        scheme=s["scheme"], snapshot_every=s["snapshot_every"],
        allow_unsafe_dt=bool(s["allow_unsafe_dt"]),
    )
    state = initial_condition(
        s["ic"], grid, m, amplitude=s["amplitude"],
        wavenumber=s["wavenumber"], memory=not s["memory_free"],
        seed=s["seed"], path=s["ic_file"],
    )
    result = simulate(state, m, config)

    table, header = _state_table(result.final)
    np.savetxt(out / "final_state.csv", table, delimiter=",", header=header,
               comments="")
    if config.snapshot_every:
        names = ["u", "v"] + ([] if result.final.u1 is None else ["u1", "v1"])
        for name in names:
            block = np.array([getattr(snap, name) for snap in result.snapshots])
            np.savetxt(out / f"spacetime_{name}.csv", block, delimiter=",")
        np.savetxt(out / "snapshot_times.csv", result.times, delimiter=",")
        rows = []
        for snap in result.snapshots:
            cols = [np.full(grid.n_cells, snap.t), grid.x, snap.u, snap.v]
            if snap.u1 is not None:
                cols += [snap.u1, snap.v1]
            rows.append(np.column_stack(cols))
        long_header = "t,x,u,v" + ("" if result.final.u1 is None else ",u1,v1")
        np.savetxt(out / "snapshots.csv", np.vstack(rows), delimiter=",",
                   header=long_header, comments="")
    _write_json(out / "meta.json", {
        "n_cells": grid.n_cells,
        "dt": config.resolved_dt(grid),
        "t_end": config.t_end,
        "steps": result.steps,
        "scheme": config.scheme,
        "memory_free": result.final.u1 is None,
        "mass_drift": result.mass_drift,
        "min_density": result.min_density,
        "final_mass": result.final.total_mass,
    })
    print(f"simulated {result.steps} steps; final mass "
          f"{result.final.total_mass:.12g} (drift {result.mass_drift:.3e})")
    return 0


def _cmd_steady_states(args):
    m = load_model(args.model)
    out = _out_dir(args)
    states = find_steady_states(m)
    payload = []
    for ss in states:
        payload.append({
            "kind": ss.kind,
            "d": ss.d, "u1": ss.u1, "v1": ss.v1,
            "stable": ss.stable,
        })
    _write_json(out / "steady_states.json", {"steady_states": payload})
    for row in payload:
        print(f"{row['kind']:>11}  d={row['d']:+.6f}  stable={row['stable']}")
    return 0


def _cmd_stability(args):
    m = load_model(args.model)
    out = _out_dir(args)
    report = isotropic_transport_stability(m, n_max=args.n_max)
    rows = []
    for n, rh, point in report.rh_points:
        row = {"n": n, "k": point.k}
        for idx, ev in enumerate(point.eigenvalues):
            row[f"re_{idx + 1}"] = float(ev.real)
            row[f"im_{idx + 1}"] = float(ev.imag)
        row["max_real"] = point.max_real
        row["rh_pass"] = point.rh_pass
        rows.append(row)
    with open(out / "dispersion.csv", "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(rows[0]))
        writer.writeheader()
        writer.writerows(rows)
    _write_json(out / "stability.json", {
        "verdict": report.verdict,
        "conditions": report.isotropic_conditions,
        "most_unstable_mode": report.most_unstable_k,
        "growth_rate": report.most_unstable_growth,
    })
    print(f"verdict: {report.verdict}")
    if report.most_unstable_k is not None:
        print(f"most unstable wavenumber {report.most_unstable_k:.4f} "
              f"(growth {report.most_unstable_growth:.4e})")
    return 0


def _cmd_hopf_sweep(args):
    m = load_model(args.model)
    out = _out_dir(args)
    gammas = np.linspace(args.gamma_from, args.gamma_to, args.steps)
    rows = []
    for gamma in gammas:
        mg = ModelParams(m.turning, Constant(float(gamma)),
                         m.total_mass, m.domain_length, m.speed)
        states = find_steady_states(mg)
        iso = next(s for s in states if s.kind == "isotropic")
        traj = integrate_ode(OdeState(0.05, 0.0, 0.0), mg, args.t_end,
                             store_every=50)
        rows.append({
            "gamma": float(gamma),
            "d_fixed_points": ";".join(
                f"{ss.d:.6g}" for ss in states
            ),
            "stability": "stable" if iso.stable else "unstable",
            "cycle_min_d": traj.tail_min_d if traj.limit_cycle else "",
            "cycle_max_d": traj.tail_max_d if traj.limit_cycle else "",
        })
    with open(out / "hopf_sweep.csv", "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(rows[0]))
        writer.writeheader()
        writer.writerows(rows)
    th = hopf_thresholds(ModelParams(m.turning, Constant(1.0)))
    _write_json(out / "thresholds.json", {
        "gamma_star": th.gamma_star, "gamma_hat": th.gamma_hat,
        "gamma_star2": th.gamma_star2, "applicable": th.applicable,
        "checks": th.checks,
    })
    n_cycling = sum(r["cycle_min_d"] != "" for r in rows)
    print(f"swept {len(rows)} aging levels; {n_cycling} show a limit cycle")
    return 0


def _cmd_tuples(args):
    m = load_model(args.model)
    out = _out_dir(args)
    tuples = find_stable_tuples(m, rho_max=args.rho_max)
    _write_json(out / "tuples.json", {
        "tuples": [
            {
                "values": list(t.values),
                "r": t.r,
                "linear_stable": list(t.linear_stable),
                "selected": t.selected,
            }
            for t in tuples
        ]
    })
    if not tuples:
        print("no plateau tuples on the scanned range")
        return 4
    for t in tuples:
        marks = "selected" if t.selected else "unselected"
        print(f"r={t.r:.6f}  values={[round(v, 6) for v in t.values]}  {marks}")
    return 0


def _cmd_construct_wave(args):
    m = load_model(args.model)
    out = _out_dir(args)
    wave = construct_admissible_wave(
        m, target_mass=args.mass, r=args.r, xi1=args.xi1, xi2=args.xi2,
        trough_range=(
            tuple(args.trough_range) if args.trough_range else None
        ),
        force_generic=args.force_generic,
    )
    _write_json(out / "wave.json", wave.to_dict())
    np.savetxt(
        out / "wave.csv",
        np.column_stack([wave.xi, wave.P, wave.B]),
        delimiter=",", header="xi,P,B", comments="",
    )
    print(f"constructed wave: r={wave.r:.6f} period={wave.period:.6f} "
          f"mass={wave.mass:.6f} ({wave.meta.get('path')})")
    return 0


def _load_run(run_dir):
    run = Path(run_dir)
    times = np.loadtxt(run / "snapshot_times.csv", delimiter=",")
    u_block = np.loadtxt(run / "spacetime_u.csv", delimiter=",", ndmin=2)
    v_block = np.loadtxt(run / "spacetime_v.csv", delimiter=",", ndmin=2)
    u1_path = run / "spacetime_u1.csv"
    with_memory = u1_path.exists()
    if with_memory:
        u1_block = np.loadtxt(u1_path, delimiter=",", ndmin=2)
        v1_block = np.loadtxt(run / "spacetime_v1.csv", delimiter=",", ndmin=2)
    grid = Grid(u_block.shape[1])
    snapshots = []
    for i in range(u_block.shape[0]):
        snapshots.append(FieldState(
            grid, u_block[i], v_block[i],
            u1_block[i] if with_memory else None,
            v1_block[i] if with_memory else None,
            float(times[i]),
        ))
    return snapshots


def _cmd_measure(args):
    snapshots = _load_run(args.run_dir)
    if args.t_min is not None:
        snapshots = [s for s in snapshots if s.t >= args.t_min]
    out = _out_dir(args)
    meas = measure_wave_speed(snapshots, field=args.field)
    xi1, xi2 = estimate_switch_points(meas.profile, snapshots[0].grid.dx)
    _write_json(out / "measurement.json", {
        "field": meas.field,
        "speed": meas.speed,
        "speed_ci": meas.speed_ci,
        "is_traveling": meas.is_traveling,
        "comoving_std": meas.comoving_std,
        "periodicity_error": meas.periodicity_error,
        "switch_xi1": xi1,
        "switch_xi2": xi2,
        "profile_min": float(meas.profile.min()),
        "profile_max": float(meas.profile.max()),
    })
    np.savetxt(
        out / "comoving_profile.csv",
        np.column_stack([meas.x, meas.profile]),
        delimiter=",", header=f"x,{args.field}", comments="",
    )
    state = "traveling" if meas.is_traveling else "not traveling"
    print(f"{args.field}: {state}, speed {meas.speed:+.6f} "
          f"(+/- {meas.speed_ci:.4f})")
    return 0


def _cmd_compare(args):
    with open(args.wave) as fh:
        wave = AdmissibleWave.from_dict(json.load(fh))
    snapshots = _load_run(args.run_dir)
    if args.t_min is not None:
        snapshots = [s for s in snapshots if s.t >= args.t_min]
    meas = measure_wave_speed(snapshots, field=args.field)
    report = compare_profiles(wave, meas, exclude_jump_cells=args.exclude_cells)
    out = _out_dir(args)
    _write_json(out / "comparison.json", {
        "l1_error": report.l1_error,
        "linf_error": report.linf_error,
        "optimal_shift": report.optimal_shift,
        "n_waves": report.n_waves,
        "amplitude": report.amplitude,
        "excluded_cells": report.excluded_cells,
    })
    print(f"L1 mismatch {100 * report.l1_error:.3f}% of amplitude "
          f"({report.n_waves} wave(s) tiled)")
    return 0


def _cmd_reproduce(args):
    written = reproduce_figure(args.figure, args.out, fast=args.fast,
                               seed=args.seed)
    for name in written:
        print(f"wrote {Path(args.out) / name}")
    return 0


# --------------------------------------------------------------------------
# parser


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="ripplewave",
        description="Travelling-wave analysis of the reversal model",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, help_text):
        p = sub.add_parser(name, help=help_text)
        p.set_defaults(func=func)
        p.add_argument("--out", default=f"out_{name.replace('-', '_')}",
                       help="output directory")
        return p

    p = add("simulate", _cmd_simulate, "run the solver")
    p.add_argument("--model", required=True)
    # defaults live in _SIM_DEFAULTS; None here means "not given on the
    # command line" so that a --sim file can fill the gap
    p.add_argument("--sim", default=None,
                   help="JSON file of simulate settings (flags still win)")
    p.add_argument("--init", default=None, metavar="KIND[:AMPLITUDE]",
                   help="shorthand for --ic/--amplitude, e.g. sine:0.05")
    p.add_argument("--n", type=int, default=None, help="grid cells")
    p.add_argument("--t-end", type=float, default=None)
    p.add_argument("--dt", type=float, default=None)
    p.add_argument("--ic", default=None,
                   choices=["isotropic_plus_sine", "isotropic_plus_cosine_pair",
                            "step_profile", "random", "custom_csv"])
    p.add_argument("--ic-file", default=None)
    p.add_argument("--amplitude", type=float, default=None)
    p.add_argument("--wavenumber", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--memory-free", action="store_true", default=None)
    p.add_argument("--snapshot-every", type=int, default=None)
    p.add_argument("--diffusion-eps", type=float, default=None)
    p.add_argument("--scheme", default=None,
                   choices=["splitting_euler", "splitting_rk4_reaction"])
    p.add_argument("--allow-unsafe-dt", action="store_true", default=None)

    p = add("steady-states", _cmd_steady_states,
            "fixed points of the well-mixed dynamics")
    p.add_argument("--model", required=True)

    p = add("stability", _cmd_stability,
            "transport stability of the isotropic state")
    p.add_argument("--model", required=True)
    p.add_argument("--n-max", type=int, default=64, help="highest mode")

    p = add("hopf-sweep", _cmd_hopf_sweep,
            "sweep constant aging levels through the oscillation window")
    p.add_argument("--model", required=True)
    p.add_argument("--gamma-from", type=float, default=1.0)
    p.add_argument("--gamma-to", type=float, default=17.0)
    p.add_argument("--steps", type=int, default=33)
    p.add_argument("--t-end", type=float, default=120.0)

    p = add("tuples", _cmd_tuples, "plateau tuples of the memory-free model")
    p.add_argument("--model", required=True)
    p.add_argument("--rho-max", type=float, default=5.0)

    p = add("construct-wave", _cmd_construct_wave,
            "build an admissible wave profile")
    p.add_argument("--model", required=True)
    p.add_argument("--mass", type=float, default=None,
                   help="target mean of P (give this or --r)")
    p.add_argument("--r", type=float, default=None, help="balance value")
    p.add_argument("--xi1", type=float, default=None,
                   help="crest length (ramp-step closed form only)")
    p.add_argument("--xi2", type=float, default=None,
                   help="period (ramp-step closed form only)")
    p.add_argument("--trough-range", type=float, nargs=2, default=None)
    p.add_argument("--force-generic", action="store_true")

    p = add("measure", _cmd_measure, "wave speed and co-moving profile")
    p.add_argument("--run-dir", required=True,
                   help="directory written by simulate --snapshot-every")
    p.add_argument("--field", default="u",
                   choices=["u", "v", "u1_over_u", "v1_over_v"])
    p.add_argument("--t-min", type=float, default=None,
                   help="drop snapshots before this time")

    p = add("compare", _cmd_compare,
            "score a constructed wave against a measured profile")
    p.add_argument("--wave", required=True, help="wave.json from construct-wave")
    p.add_argument("--run-dir", required=True)
    p.add_argument("--field", default="u")
    p.add_argument("--t-min", type=float, default=None)
    p.add_argument("--exclude-cells", type=int, default=3)

    p = add("reproduce", _cmd_reproduce, "regenerate a parameter study")
    p.add_argument("--figure", required=True, choices=sorted(FIGURES))
    p.add_argument("--fast", action="store_true")
    p.add_argument("--seed", type=int, default=0)

    return parser


def main(argv=None):
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except _NO_RESULT as exc:
        print(f"no result: {exc}", file=sys.stderr)
        return 4
    except _BAD_INPUT as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except _NUMERIC as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

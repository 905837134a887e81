"""Command-line interface: exit codes, output files, pipeline round trips."""

import csv
import json

import numpy as np
import pytest

from ripplewave.cli import main

RAMP = {
    "turning": {"kind": "piecewise_linear_step",
                "lam_lo": 1.0, "lam_hi": 2.0, "eps": 0.2},
    "aging": {"kind": "constant", "value": 1.0},
}
TRIVIAL = {
    "turning": {"kind": "constant", "value": 1.0},
    "aging": {"kind": "constant", "value": 1.0},
}
SELECTION = {
    "turning": {"kind": "sigmoid_rational",
                "lam_lo": 0.5, "lam_hi": 10.0, "alpha": 0.125},
    "aging": {"kind": "constant", "value": 1.0},
}


@pytest.fixture
def ramp_json(tmp_path):
    path = tmp_path / "ramp.json"
    path.write_text(json.dumps(RAMP))
    return str(path)


@pytest.fixture
def trivial_json(tmp_path):
    path = tmp_path / "trivial.json"
    path.write_text(json.dumps(TRIVIAL))
    return str(path)


def test_version_flag(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["--version"])
    assert exc.value.code == 0


def test_missing_model_file(tmp_path):
    code = main(["steady-states", "--model", str(tmp_path / "nope.json"),
                 "--out", str(tmp_path / "o")])
    assert code == 2


def test_bad_model_json(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text('{"turning": {"kind": "warp"}}')
    code = main(["steady-states", "--model", str(path),
                 "--out", str(tmp_path / "o")])
    assert code == 2


def test_steady_states(trivial_json, tmp_path):
    out = tmp_path / "ss"
    assert main(["steady-states", "--model", trivial_json,
                 "--out", str(out)]) == 0
    data = json.loads((out / "steady_states.json").read_text())
    states = data["steady_states"]
    assert any(abs(s["d"]) < 1e-9 for s in states)


def test_stability_outputs(trivial_json, tmp_path):
    out = tmp_path / "stab"
    assert main(["stability", "--model", trivial_json, "--n-max", "8",
                 "--out", str(out)]) == 0
    rows = np.genfromtxt(out / "dispersion.csv", delimiter=",", names=True)
    assert len(rows) == 8
    verdict = json.loads((out / "stability.json").read_text())
    assert verdict["verdict"] == "stable"


def test_simulate_and_measure_pipeline(ramp_json, tmp_path):
    run = tmp_path / "run"
    assert main(["simulate", "--model", ramp_json, "--n", "200",
                 "--t-end", "2.0", "--snapshot-every", "20",
                 "--out", str(run)]) == 0
    final = np.genfromtxt(run / "final_state.csv", delimiter=",", names=True)
    assert set(final.dtype.names) >= {"x", "u", "v", "u1", "v1"}
    assert len(final) == 200
    times = np.loadtxt(run / "snapshot_times.csv")
    assert len(times) >= 10

    meas_out = tmp_path / "meas"
    assert main(["measure", "--run-dir", str(run), "--field", "u",
                 "--out", str(meas_out)]) == 0
    report = json.loads((meas_out / "measurement.json").read_text())
    assert "speed" in report and "switch_xi1" in report
    profile = np.genfromtxt(meas_out / "comoving_profile.csv",
                            delimiter=",", names=True)
    assert len(profile) == 200


def test_simulate_sim_file_and_init_shorthand(ramp_json, tmp_path):
    sim = tmp_path / "sim.json"
    sim.write_text(json.dumps({"n": 64, "t_end": 0.5, "snapshot_every": 10}))
    run = tmp_path / "run_cfg"
    assert main(["simulate", "--model", ramp_json, "--sim", str(sim),
                 "--init", "sine:0.05", "--n", "80",
                 "--out", str(run)]) == 0
    # explicit --n beats the file; file supplies the rest
    final = np.genfromtxt(run / "final_state.csv", delimiter=",", names=True)
    assert len(final) == 80
    snaps = np.genfromtxt(run / "snapshots.csv", delimiter=",", names=True)
    assert set(snaps.dtype.names) == {"t", "x", "u", "v", "u1", "v1"}
    assert len(snaps) % 80 == 0 and len(snaps) // 80 >= 3
    assert snaps["t"][0] == 0.0 and snaps["t"][-1] == pytest.approx(0.5)
    amp = np.ptp(final["u"])
    assert 0.01 < amp  # the sine perturbation came through --init

    bad = tmp_path / "bad_sim.json"
    bad.write_text(json.dumps({"cells": 64}))
    assert main(["simulate", "--model", ramp_json, "--sim", str(bad),
                 "--out", str(tmp_path / "o2")]) == 2


def test_simulate_memory_free(ramp_json, tmp_path):
    run = tmp_path / "run_mf"
    assert main(["simulate", "--model", ramp_json, "--n", "64",
                 "--t-end", "0.5", "--memory-free",
                 "--out", str(run)]) == 0
    final = np.genfromtxt(run / "final_state.csv", delimiter=",", names=True)
    assert set(final.dtype.names) == {"x", "u", "v"}


def test_simulate_rejects_bad_cfl(ramp_json, tmp_path):
    code = main(["simulate", "--model", ramp_json, "--n", "64",
                 "--t-end", "0.5", "--dt", "0.1",
                 "--out", str(tmp_path / "o")])
    assert code == 2


def test_construct_wave_and_compare(ramp_json, tmp_path):
    wave_dir = tmp_path / "wave"
    assert main(["construct-wave", "--model", ramp_json,
                 "--r", "1.670578", "--xi1", "0.49438", "--xi2", "1.0",
                 "--out", str(wave_dir)]) == 0
    wave = json.loads((wave_dir / "wave.json").read_text())
    assert wave["period"] == pytest.approx(1.0)
    table = np.genfromtxt(wave_dir / "wave.csv", delimiter=",", names=True)
    assert set(table.dtype.names) >= {"xi", "P", "B"}

    run = tmp_path / "run"
    assert main(["simulate", "--model", ramp_json, "--n", "200",
                 "--t-end", "3.0", "--ic", "step_profile",
                 "--snapshot-every", "20", "--out", str(run)]) == 0
    cmp_dir = tmp_path / "cmp"
    assert main(["compare", "--wave", str(wave_dir / "wave.json"),
                 "--run-dir", str(run), "--t-min", "1.0",
                 "--out", str(cmp_dir)]) == 0
    report = json.loads((cmp_dir / "comparison.json").read_text())
    assert "l1_error" in report and report["n_waves"] == 1


def test_construct_wave_mass_calibration(ramp_json, tmp_path):
    out = tmp_path / "wave_mass"
    assert main(["construct-wave", "--model", ramp_json, "--mass", "1.0",
                 "--out", str(out)]) == 0
    wave = json.loads((out / "wave.json").read_text())
    assert wave["mass"] == pytest.approx(1.0, abs=1e-5)


def test_construct_wave_requires_one_amplitude(ramp_json, tmp_path):
    code = main(["construct-wave", "--model", ramp_json,
                 "--mass", "1.0", "--r", "1.5",
                 "--out", str(tmp_path / "o")])
    assert code == 2


def test_construct_wave_no_branches(trivial_json, tmp_path):
    # constant turning rate: the balance curve never folds
    code = main(["construct-wave", "--model", trivial_json, "--mass", "1.0",
                 "--out", str(tmp_path / "o")])
    assert code == 4


def test_tuples_found(tmp_path):
    path = tmp_path / "sel.json"
    path.write_text(json.dumps(SELECTION))
    out = tmp_path / "tup"
    assert main(["tuples", "--model", str(path), "--out", str(out)]) == 0
    data = json.loads((out / "tuples.json").read_text())
    tuples = data["tuples"] if isinstance(data, dict) else data
    assert len(tuples) >= 1
    assert any(t["selected"] for t in tuples)


def test_tuples_empty_exit_code(trivial_json, tmp_path):
    code = main(["tuples", "--model", trivial_json,
                 "--out", str(tmp_path / "o")])
    assert code == 4


def test_hopf_sweep(tmp_path):
    path = tmp_path / "hopf.json"
    path.write_text(json.dumps({
        "turning": {"kind": "sigmoid_exp",
                    "lam_lo": 2.5, "lam_hi": 8.0, "alpha": 10.0},
        "aging": {"kind": "constant", "value": 1.5},
    }))
    out = tmp_path / "sweep"
    assert main(["hopf-sweep", "--model", str(path), "--gamma-from", "1.0",
                 "--gamma-to", "3.0", "--steps", "3", "--t-end", "60",
                 "--out", str(out)]) == 0
    with open(out / "hopf_sweep.csv", newline="") as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 3
    assert list(rows[0]) == ["gamma", "d_fixed_points", "stability",
                             "cycle_min_d", "cycle_max_d"]
    assert rows[0]["stability"] == "stable"      # gamma=1 is below gamma*
    assert rows[-1]["stability"] == "unstable"   # gamma=3 sits in the window
    assert rows[-1]["cycle_min_d"] != ""
    thresholds = json.loads((out / "thresholds.json").read_text())
    assert thresholds["gamma_star"] == pytest.approx(1.8151, abs=1e-3)


def test_reproduce_fast_figure(tmp_path):
    out = tmp_path / "fig"
    assert main(["reproduce", "--figure", "fig1", "--fast",
                 "--out", str(out)]) == 0
    assert (out / "hopf_sweep.csv").exists()
    assert (out / "thresholds.json").exists()

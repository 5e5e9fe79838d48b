import csv
import hashlib
import json

import pytest
from click.testing import CliRunner

from interface_scattering import cli
from interface_scattering.acceptance import CriterionResult
from interface_scattering.numerics import NumericalError

SMALL = {
    "grid": {"x_min": -10, "a": 0, "b": 1, "x_max": 11, "counts": [201, 101, 201]},
    "potential": {"kind": "barrier", "height": 4.0},
    "spectral": {"k_min": 0.05, "k_max": 8.0, "n_k": 128},
    "theta": [0.01, [0.0, 0.01]],
    "jost": {"zeta": [1.0, [1.0, 0.5]], "k": [0.5, 1.5]},
}


def write_config(tmp_path, **extra):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps({**SMALL, **extra}))
    return path


def invoke(*args):
    return CliRunner().invoke(cli.main, list(args), catch_exceptions=False)


def read_csv(path):
    with path.open() as fh:
        return list(csv.reader(fh))


def test_jost_experiment_and_manifest(tmp_path):
    cfg = write_config(tmp_path, experiment="jost")
    res = invoke("run", "--config", str(cfg), "--out", str(tmp_path / "out"))
    assert res.exit_code == 0, res.output
    out = tmp_path / "out" / "jost"
    rows = read_csv(out / "jost_function.csv")
    assert rows[0] == ["zeta_re", "zeta_im", "w_re", "w_im"] and len(rows) == 3
    ident = read_csv(out / "wronskian_identity.csv")
    assert all(float(r[3]) < 1e-8 for r in ident[1:])
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["status"] == 0 and manifest["experiment"] == "jost"
    for name, digest in manifest["files"].items():
        assert hashlib.sha256((out / name).read_bytes()).hexdigest() == digest


def test_outputs_are_deterministic(tmp_path):
    cfg = write_config(tmp_path)
    for run_dir in ("a", "b"):
        res = invoke("run", "--config", str(cfg), "--experiment", "waveop",
                     "--out", str(tmp_path / run_dir), "--jobs", "2")
        assert res.exit_code == 0, res.output
    a = (tmp_path / "a" / "waveop" / "waveop.csv").read_bytes()
    assert a == (tmp_path / "b" / "waveop" / "waveop.csv").read_bytes()
    header, row = read_csv(tmp_path / "a" / "waveop" / "waveop.csv")
    assert header[-3:] == ["deviation", "solve_residual", "neumann_gap"]
    assert 0 < float(row[4]) < 0.1


def test_eigenfun_and_propagate_columns(tmp_path):
    cfg = write_config(tmp_path, eigenfun={"k": [-1.0, 1.5]}, times=[0.0, 2.0],
                       packet={"center": -5.0, "momentum": 2.0, "width": 1.0})
    for exp in ("eigenfun", "propagate"):
        res = invoke("run", "--config", str(cfg), "--experiment", exp, "--out", str(tmp_path))
        assert res.exit_code == 0, res.output
    eig = read_csv(tmp_path / "eigenfun" / "eigenfunctions.csv")
    assert eig[0][-3:] == ["interface_residual", "literal_condition_residual", "pde_residual"]
    assert all(float(r[10]) < 1e-8 for r in eig[1:])
    prop = read_csv(tmp_path / "propagate" / "propagate.csv")
    assert prop[0] == ["t", "remainder_norm", "free_packet_norm", "theta_packet_norm"]
    assert len(prop) == 3


def test_sweep_writes_fit(tmp_path):
    cfg = write_config(tmp_path, experiment="sweep",
                       sweep={"values": [0.01, 0.001], "slots": ["theta2"], "t": 5})
    res = invoke("run", "--config", str(cfg), "--out", str(tmp_path))
    assert res.exit_code == 0, res.output
    fit = json.loads((tmp_path / "sweep" / "sweep_fit.json").read_text())
    assert fit["fits"]["theta2"]["deviation_exponent"] == pytest.approx(1.0, abs=0.05)
    assert read_csv(tmp_path / "sweep" / "sweep.csv")[0] == ["slot", "theta_abs", "deviation",
                                                            "remainder_t5"]


@pytest.mark.parametrize("patch", [
    {"grid": {"x_min": 0, "a": 0, "b": 1, "x_max": 2, "counts": [11, 11, 11]}},
    {"potential": {"kind": "spike"}},
    {"tolerances": {"scan_threshold": -1}},
    {"tolerances": {"made_up": 1}},
    {"theta": [0.5, 0.0], "experiment": "waveop"},
    {"experiment": "nonsense"},
])
def test_configuration_errors_exit_1(tmp_path, patch):
    cfg = write_config(tmp_path, **{"experiment": "jost", **patch})
    res = invoke("run", "--config", str(cfg), "--out", str(tmp_path))
    assert res.exit_code == 1
    assert "configuration error" in res.output


def test_unreadable_config_exits_1(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert invoke("run", "--config", str(bad)).exit_code == 1
    assert invoke("run", "--config", str(tmp_path / "missing.json")).exit_code == 1


def test_numerical_error_exits_2(tmp_path, monkeypatch):
    def boom(*args, **kwargs):
        raise NumericalError("forced failure")

    monkeypatch.setitem(cli.RUNNERS, "jost", boom)
    res = invoke("run", "--config", str(write_config(tmp_path, experiment="jost")),
                 "--out", str(tmp_path))
    assert res.exit_code == 2 and "forced failure" in res.output


def test_failed_acceptance_exits_3(tmp_path, monkeypatch):
    fake = [CriterionResult(1, "forced", False, "forced failure", {}, 0.0)]
    monkeypatch.setattr(cli, "run_criteria", lambda selected, jobs: fake)
    cfg = write_config(tmp_path, experiment="acceptance")
    res = invoke("run", "--config", str(cfg), "--out", str(tmp_path))
    assert res.exit_code == 3
    assert "FAIL" in res.output


def test_real_acceptance_subset(tmp_path):
    cfg = write_config(tmp_path, experiment="acceptance", acceptance={"criteria": [1, 3]})
    res = invoke("run", "--config", str(cfg), "--out", str(tmp_path))
    assert res.exit_code == 0, res.output
    rows = read_csv(tmp_path / "acceptance" / "acceptance.csv")
    assert [r[0] for r in rows[1:]] == ["1", "3"] and all(r[2] == "1" for r in rows[1:])


def test_criteria_listing():
    res = invoke("criteria")
    assert res.exit_code == 0
    assert len(res.output.strip().splitlines()) == 12


def test_spectrum_heatmap_and_tracks(tmp_path):
    cfg = write_config(tmp_path, experiment="spectrum",
                       potential={"kind": "well", "depth": 4.0},
                       spectrum={"region": [-3.0, -0.5, -0.5, 0.5], "resolution": [6, 3],
                                 "track_from": [-1.8]})
    res = invoke("run", "--config", str(cfg), "--out", str(tmp_path))
    assert res.exit_code == 0, res.output
    heat = read_csv(tmp_path / "spectrum" / "spectrum_field.csv")
    assert heat[0][-3:] == ["z_re", "z_im", "abs_det"] and len(heat) == 1 + 18
    tracks = json.loads((tmp_path / "spectrum" / "spectrum_tracks.json").read_text())
    assert len(tracks) == 1 and tracks[0]["E0"] == -1.8
    assert all(abs(t["eigenvalue"][0] + 1.8) < 0.3 for t in tracks)

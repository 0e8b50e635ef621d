import json

import numpy as np
import pytest

from kppfront.cli import main
from kppfront.io import read_csv


def write_config(tmp_path, **kw):
    p = tmp_path / "config.json"
    p.write_text(json.dumps(kw))
    return str(p)


@pytest.fixture(scope="module")
def solved(tmp_path_factory):
    tmp = tmp_path_factory.mktemp("solve")
    cfg = write_config(tmp, h_list=[0.05])
    code = main(["solve", "--config", cfg, "--out", str(tmp / "a")])
    return code, tmp, cfg


def test_solve_exit_zero_and_outputs(solved):
    code, tmp, _ = solved
    assert code == 0
    summary = json.loads((tmp / "a" / "front_h0.05.json").read_text())
    assert summary["profile_residual_norm"] <= 1e-8
    assert summary["config"]["h_list"] == [0.05]


def test_solve_is_deterministic(solved):
    _, tmp, cfg = solved
    assert main(["solve", "--config", cfg, "--out", str(tmp / "b")]) == 0
    a = (tmp / "a" / "front_h0.05.csv").read_bytes()
    assert a == (tmp / "b" / "front_h0.05.csv").read_bytes()
    assert b"\r" not in a


@pytest.mark.parametrize("patch", [{"c": 2.0}, {"kernel": [0.9]}, {"h_list": []}])
def test_validation_exit_code(tmp_path, patch, capsys):
    assert main(["solve", "--config", write_config(tmp_path, **patch), "--out", str(tmp_path)]) == 2
    assert "error" in capsys.readouterr().err


def test_sweep_rejects_empty_h_list(tmp_path):
    assert main(["sweep", "--config", write_config(tmp_path, h_list=[]), "--out", str(tmp_path)]) == 2


def test_solver_failure_exit_code(tmp_path, capsys):
    cfg = write_config(tmp_path, h_list=[0.05], solver={"max_iter": 1})
    assert main(["solve", "--config", cfg, "--out", str(tmp_path)]) == 3
    assert "h = 0.05" in capsys.readouterr().err


def test_missing_config_file(tmp_path):
    assert main(["solve", "--config", str(tmp_path / "nope.json")]) == 2


def test_probe(tmp_path):
    cfg = write_config(tmp_path, h_list=[0.1], kernel=[-0.5, 1.5])
    assert main(["probe", "--config", cfg, "--out", str(tmp_path)]) == 0
    rows = (tmp_path / "spectral.csv").read_text().splitlines()
    assert rows[0].startswith("h,c,kernel_id,lambda_h")
    assert len(rows) == 2


def test_simulate_stationary_and_malformed(tmp_path):
    flat = tmp_path / "flat.csv"
    flat.write_text("x,phi_h\n" + "".join(f"{x},1\n" for x in np.linspace(-5, 5, 11)))
    cfg = write_config(tmp_path, h_list=[0.2], sim={"T": 2.0})
    assert main(["simulate", "--config", cfg, "--front", str(flat), "--out", str(tmp_path)]) == 0
    rep = json.loads((tmp_path / "simulate_h0.2.json").read_text())
    assert rep["speed"] == 0.0
    bad = tmp_path / "bad.csv"
    bad.write_text("x,phi_h\n1,2,3\n")
    assert main(["simulate", "--config", cfg, "--front", str(bad), "--out", str(tmp_path)]) == 2


def test_identities_table(capsys):
    assert main(["identities", "--seed", "1"]) == 0
    out = capsys.readouterr().out.splitlines()
    assert out and all(line.startswith("PASS") for line in out)


def test_sweep_columns(tmp_path):
    cfg = write_config(tmp_path, h_list=[0.1, 0.05])
    assert main(["sweep", "--config", cfg, "--out", str(tmp_path)]) == 0
    data = read_csv(tmp_path / "sweep.csv")
    assert list(data) == ["h", "kappa_h", "kappa_h_minus_kappa0_over_h2", "R_norm_L2", "R_norm_Linf",
                          "lambda_h", "lambda_h_adjoint", "contraction_ratio", "profile_residual",
                          "measured_speed"]
    assert data["R_norm_L2"][1] < data["R_norm_L2"][0]
    assert np.all(np.isnan(data["measured_speed"]))


def test_parallel_sweep_matches_serial(tmp_path):
    cfg = write_config(tmp_path, h_list=[0.1, 0.05])
    assert main(["solve", "--config", cfg, "--out", str(tmp_path / "s")]) == 0
    assert main(["solve", "--config", cfg, "--out", str(tmp_path / "p"), "--jobs", "2"]) == 0
    for h in ("0.1", "0.05"):
        name = f"front_h{h}.csv"
        assert (tmp_path / "s" / name).read_bytes() == (tmp_path / "p" / name).read_bytes()

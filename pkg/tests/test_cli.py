import json
import math

import pytest
import yaml

from periodic_fbp import cli
from periodic_fbp.config import ConfigError, from_dict

BASE = {
    "problem": {"d": 1.0, "mu": 1.0, "h0": 1.0, "T": 1.0, "bc": {"alpha": 1.0, "beta": 0.0}},
    "coefficients": {"a": {"kind": "constant", "params": {"value": 1.0}},
                     "b": {"kind": "constant", "params": {"value": 1.0}}},
}


def write(tmp_path, cfg, name="run.yaml"):
    path = tmp_path / name
    path.write_text(yaml.safe_dump(cfg))
    return str(path)


def run(tmp_path, command, cfg, out="out"):
    code = cli.main([command, "--config", write(tmp_path, cfg), "--out", str(tmp_path / out)])
    summary = tmp_path / out / "summary.json"
    return code, (json.loads(summary.read_text()) if summary.exists() else None)


def with_(cfg, **blocks):
    new = json.loads(json.dumps(cfg))
    for k, v in blocks.items():
        new.setdefault(k, {}).update(v)
    return new


def test_eigen_closed_form(tmp_path):
    code, js = run(tmp_path, "eigen", with_(BASE, command={"ell": 2.0}, numerics={"nx": 256}))
    assert code == 0
    assert js["result"]["lambda1"] == pytest.approx(math.pi**2 / 4 - 1, rel=1e-4)
    assert set(js["result"]) >= {"lambda1", "r", "iterations", "residual"}
    assert js["config"]["command"] == {"ell": 2.0}
    assert (tmp_path / "out" / "eigenfunction.csv").read_text().startswith("t,x,phi\n")


def test_classify_large_habitat(tmp_path):
    cfg = with_(BASE, problem={"h0": 4.0})
    code, js = run(tmp_path, "classify", cfg)
    assert code == 0 and js["result"]["verdict"] == "Spreading"
    assert js["status"] == "decided"


def test_classify_undecided_exit_code(tmp_path):
    cfg = with_(BASE, problem={"h0": 2.0, "mu": 0.3}, numerics={"budget": 0.2})
    code, js = run(tmp_path, "classify", cfg)
    assert code == 2 and js["result"]["evidence"] == "budget-exhausted"


def test_malformed_bc_names_key_path(tmp_path, capsys):
    cfg = with_(BASE, problem={"bc": {"alpha": 0.5, "beta": 0.4}})
    code, js = run(tmp_path, "eigen", cfg)
    assert code == 1 and js is None
    assert "problem.bc" in capsys.readouterr().err


@pytest.mark.parametrize("patch,path", [
    ({"problem": {"d": -1.0}}, "problem.d"),
    ({"numerics": {"ny": 3.5}}, "numerics.ny"),
    ({"numerics": {"tol_u": 0.0}}, "numerics.tol_u"),
    ({"coefficients": {"b": {"kind": "constant", "params": {"value": 0.0}}}}, "coefficients.b"),
    ({"coefficients": {"a": {"kind": "constant", "T": 2.0, "params": {"value": 1.0}}}}, "coefficients.a.T"),
    ({"problem": {"speed": 1.0}}, "problem.speed"),
])
def test_validation_messages(patch, path):
    cfg = with_(BASE, **patch)
    with pytest.raises(ConfigError) as info:
        from_dict(cfg)
    assert info.value.path == path


def test_simulate_outputs_and_determinism(tmp_path):
    cfg = with_(BASE, problem={"bc": {"alpha": 0.0, "beta": 1.0}, "h0": 2.0}, numerics={"t_end": 1.0})
    code, js = run(tmp_path, "simulate", cfg, out="a")
    run(tmp_path, "simulate", cfg, out="b")
    assert code == 0
    assert set(js["result"]) >= {"t_final", "h_final", "hprime_final", "umax_final", "classification"}
    assert (tmp_path / "a" / "summary.json").read_bytes() == (tmp_path / "b" / "summary.json").read_bytes()
    header = (tmp_path / "a" / "trajectory.csv").read_text().splitlines()[0]
    assert header == "t,h,hprime,umax,mass,residual"
    assert not list((tmp_path / "a").glob("*.tmp"))


def test_hstar_and_no_sign_change(tmp_path):
    cfg = with_(BASE, problem={"bc": {"alpha": 0.0, "beta": 1.0}})
    code, js = run(tmp_path, "hstar", cfg)
    assert code == 0 and js["result"]["hstar"] == pytest.approx(math.pi / 2, abs=1e-3)
    cfg = with_(cfg, coefficients={"a": {"kind": "constant", "params": {"value": -1.0}}},
                command={"ell_max": 8.0})
    code, js = run(tmp_path, "hstar", cfg, out="neg")
    assert code == 2 and js["result"]["hstar"] is None and js["result"]["ladder"]["lengths"][-1] == 8.0


def test_speed_subcommand(tmp_path):
    cfg = with_(BASE, coefficients={"a": {"kind": "oscillating",
                                          "params": {"a0": 1.0, "a1": 0.3, "c": 0.2, "omega": 6.0}}},
                problem={"mu": 1.0})
    code, js = run(tmp_path, "speed", cfg)
    r = js["result"]
    assert code == 0 and r["band_enabled"]
    assert 0 < r["kbar_lower"] < r["kbar_upper"] < 2 * math.sqrt(1.3)
    assert (tmp_path / "out" / "k0.csv").read_text().startswith("t,k0_lower,k0_upper\n")


def test_sweep_d_table(tmp_path):
    cfg = with_(BASE, problem={"h0": 2.0, "bc": {"alpha": 0.0, "beta": 1.0}},
                command={"d_grid": [0.5, 5.0]})
    code, js = run(tmp_path, "sweep-d", cfg)
    sides = [row["side"] for row in js["result"]["rows"]]
    assert code == 0 and sides == ["minus", "plus"]
    assert (tmp_path / "out" / "table.csv").read_text().startswith("d,lambda1_h0,side,consistent")


def test_sweep_d_needs_grid(tmp_path):
    code, _ = run(tmp_path, "sweep-d", BASE)
    assert code == 1


def test_log_level_from_environment(tmp_path, monkeypatch, capsys):
    monkeypatch.setenv("STEFAN_LOG", "bogus")
    code, _ = run(tmp_path, "eigen", with_(BASE, command={"ell": 2.0}))
    assert code == 0

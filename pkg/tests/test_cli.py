import json
import math
import os
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from vibronica import cli
from vibronica.config import config_from_dict, parse_config
from vibronica.errors import ConfigError
from vibronica.output import read_csv

pytestmark = pytest.mark.filterwarnings("ignore:frequency grid is coarser")

CONFIGS = Path(__file__).resolve().parents[1] / "configs"


def write(tmp_path, d, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(d))
    return path


def body(path):
    return [l for l in Path(path).read_text().splitlines() if not l.startswith("# wall_time")]


def test_minimal_config_fills_defaults():
    cfg = config_from_dict({"molecule": {"lambda1": 1, "lambda2": 0}})
    d = cfg.to_dict()
    assert d["molecule"]["gamma"] == 0.01
    assert d["molecule"]["nu_e"] == 1.0
    assert d["numerics"]["n_fock"] == 12
    assert d["output"]["formats"] == ["csv"]


def test_unknown_key_lists_valid_keys():
    with pytest.raises(ConfigError) as exc:
        config_from_dict({"molecule": {"lambda1": 1, "lamda2": 0}})
    assert "lamda2" in str(exc.value) and "lambda2" in str(exc.value)
    with pytest.raises(ConfigError, match="valid keys"):
        config_from_dict({"molecule": {}, "extra": {}})


def test_inconsistent_lambda2_rejected():
    with pytest.raises(ConfigError, match="lambda2"):
        config_from_dict({"molecule": {"lambda2": 1.0, "nu_e": 2.0}})


@pytest.mark.parametrize("scan, field", [
    ({"variable": "omega_l", "start": 1, "stop": 0, "points": 10}, "start"),
    ({"variable": "omega_l", "start": 0, "stop": 1, "points": 1}, "points"),
    ({"variable": "omega_q", "start": 0, "stop": 1, "points": 5}, "variable"),
])
def test_scan_invariants(scan, field):
    with pytest.raises(ConfigError, match=field):
        config_from_dict({"molecule": {}, "scan": scan})


def test_units_must_be_named_consistently():
    with pytest.raises(ConfigError, match="nu_g"):
        config_from_dict({"molecule": {"nu_g": 10.0}})
    with pytest.raises(ConfigError, match="kappa"):
        config_from_dict({"molecule": {"nu_g": 10.0, "units": "kappa"}})
    with pytest.raises(ConfigError, match="kappa"):
        config_from_dict({"molecule": {}, "cavity": {"kappa1": 1.0}})


def test_round_trip(tmp_path):
    cfg = parse_config(CONFIGS / "population.json")
    again = parse_config(write(tmp_path, cfg.to_dict()))
    assert again == cfg
    assert again.canonical_json() == cfg.canonical_json()


def test_missing_file_and_bad_json(tmp_path):
    with pytest.raises(ConfigError):
        parse_config(tmp_path / "nope.json")
    bad = tmp_path / "bad.json"
    bad.write_text("{molecule:")
    with pytest.raises(ConfigError):
        parse_config(bad)


def test_fc_poisson_csv(tmp_path):
    cfg = write(tmp_path, {"molecule": {"lambda1": 1.0, "lambda2": 0.0}})
    assert cli.main(["fc", "--config", str(cfg), "--out", str(tmp_path / "o"), "--jobs", "1"]) == 0
    prov, cols, rows = read_csv(tmp_path / "o" / "fc.csv")
    assert cols == ["m", "S_em", "S_ab"]
    m = rows[:, 0].astype(int)
    ref = np.exp(-1.0) / np.array([float(math.factorial(k)) for k in m])
    assert np.abs(rows[:, 1] - ref).max() < 1e-15
    assert np.abs(rows[:, 2] - ref).max() < 1e-15
    assert {"config_sha256", "versions", "truncations", "config", "wall_time_s"} <= set(prov)
    assert (tmp_path / "o" / "plot_fc.py").exists()


def test_csv_has_17_digits_and_round_trips(tmp_path):
    cfg = write(tmp_path, {"molecule": {"lambda1": 0.7, "nu_e": 1.3}})
    cli.main(["fc", "--config", str(cfg), "--out", str(tmp_path), "--jobs", "1"])
    from vibronica import MoleculeParams, franck_condon
    _, _, rows = read_csv(tmp_path / "fc.csv")
    ref = franck_condon.fc_weights(MoleculeParams(lambda1=0.7, nu_e=1.3), "em", rows.shape[0] - 1)
    assert np.array_equal(rows[:, 1], ref)
    text = (tmp_path / "fc.csv").read_bytes()
    assert b"\r\n" not in text


def test_embedded_config_reruns_identically(tmp_path):
    cfg = write(tmp_path, {"molecule": {"lambda1": 1.0, "nu_e": 2.0}})
    cli.main(["fc", "--config", str(cfg), "--out", str(tmp_path / "a"), "--jobs", "1"])
    prov, _, _ = read_csv(tmp_path / "a" / "fc.csv")
    cfg2 = tmp_path / "from_provenance.json"
    cfg2.write_text(prov["config"])
    cli.main(["fc", "--config", str(cfg2), "--out", str(tmp_path / "b"), "--jobs", "1"])
    assert body(tmp_path / "a" / "fc.csv") == body(tmp_path / "b" / "fc.csv")


def small_population(tmp_path, points=9):
    return write(tmp_path, {
        "molecule": {"lambda1": 1.0, "nu_e": 2.0, "gamma": 0.01, "Gamma": 0.1, "eta_l": 0.02},
        "scan": {"variable": "omega_l", "start": -0.5, "stop": 2.5, "points": points},
        "numerics": {"n_fock": 6},
    })


def test_population_deterministic_and_parallel(tmp_path):
    cfg = small_population(tmp_path)
    for out, jobs in (("s1", "1"), ("s2", "1"), ("p", "2")):
        assert cli.main(["population", "--ladder", "--config", str(cfg),
                         "--out", str(tmp_path / out), "--jobs", jobs]) == 0
    assert body(tmp_path / "s1" / "population.csv") == body(tmp_path / "s2" / "population.csv")
    _, cols, a = read_csv(tmp_path / "s1" / "population.csv")
    _, _, b = read_csv(tmp_path / "p" / "population.csv")
    assert cols == ["omega", "analytic", "numeric", "abs_diff", "ladder"]
    assert np.abs(a - b).max() <= 1e-15


def test_population_over_other_variable(tmp_path):
    cfg = write(tmp_path, {
        "molecule": {"lambda1": 1.0, "nu_e": 2.0, "eta_l": 0.02},
        "scan": {"variable": "Gamma", "start": 0.05, "stop": 0.2, "points": 3},
        "numerics": {"n_fock": 6},
        "output": {"plots": False},
    })
    assert cli.main(["population", "--config", str(cfg), "--out", str(tmp_path), "--jobs", "1"]) == 0
    _, cols, rows = read_csv(tmp_path / "population.csv")
    assert cols[0] == "Gamma" and rows.shape == (3, 4)
    assert np.all(rows[:, 3] < 0.1 * rows[:, 1])


def test_json_output_has_provenance(tmp_path):
    cfg = write(tmp_path, {"molecule": {"lambda1": 1.0}})
    assert cli.main(["fc", "--config", str(cfg), "--out", str(tmp_path), "--format", "json",
                     "--jobs", "1"]) == 0
    doc = json.loads((tmp_path / "fc.json").read_text())
    assert doc["columns"] == ["m", "S_em", "S_ab"]
    assert "config_sha256" in doc["provenance"]


def test_cavity_without_block_is_usage_error(tmp_path):
    cfg = small_population(tmp_path)
    assert cli.main(["cavity", "--config", str(cfg), "--out", str(tmp_path), "--jobs", "1"]) == 2
    assert cli.main(["sweep", "--config", str(cfg), "--out", str(tmp_path), "--jobs", "1"]) == 2


def test_config_error_exit_code(tmp_path, capsys):
    cfg = write(tmp_path, {"molecule": {"lambda3": 1.0}})
    assert cli.main(["fc", "--config", str(cfg)]) == 2
    assert "valid keys" in capsys.readouterr().err


def test_numerical_failure_exit_code(tmp_path, capsys):
    cfg = write(tmp_path, {"molecule": {"lambda1": 25.0}})
    assert cli.main(["fc", "--config", str(cfg), "--out", str(tmp_path), "--jobs", "1"]) == 3
    assert "numerical failure" in capsys.readouterr().err


def test_argparse_usage_error():
    with pytest.raises(SystemExit) as exc:
        cli.main(["bogus"])
    assert exc.value.code == 2


def test_cavity_and_sweep_outputs(tmp_path):
    mol = {"nu_g": 10.0, "nu_e": 20.0, "lambda1": 1.0, "gamma": 0.01, "Gamma": 20.0,
           "units": "kappa"}
    cav = {"g": 3.0, "eta_c": 0.001}
    cfg = write(tmp_path, {
        "molecule": mol, "cavity": cav,
        "scan": {"variable": "omega_l", "start": -6.0, "stop": 6.0, "points": 5},
        "sweep": {"variable": "n_molecules", "start": 1, "stop": 100, "points": 100},
        "numerics": {"photon_dim": 3, "vib_dim": 3},
    })
    assert cli.main(["cavity", "--config", str(cfg), "--out", str(tmp_path), "--jobs", "1"]) == 0
    lines = [l for l in (tmp_path / "cavity.csv").read_text().splitlines() if not l.startswith("#")]
    assert lines[0] == "omega_l,T_re,T_im,T_power,source"
    assert [l.split(",")[-1] for l in lines[1:]] == ["analytic"] * 5 + ["numeric"] * 5
    assert cli.main(["sweep", "--config", str(cfg), "--out", str(tmp_path), "--jobs", "1"]) == 0
    lines = [l for l in (tmp_path / "sweep.csv").read_text().splitlines() if not l.startswith("#")]
    assert len(lines) == 101 and len(lines[0].split(",")) == 6
    assert [int(l.split(",")[0]) for l in lines[1:]] == list(range(1, 101))
    script = (tmp_path / "plot_sweep.py").read_text()
    assert "[25, 100]" in script and "white" in script


def test_correlate_and_spectrum(tmp_path):
    cfg = write(tmp_path, {
        "molecule": {"lambda1": 1.0, "nu_e": 2.0, "eta_l": 0.001},
        "scan": {"variable": "omega", "start": -2.0, "stop": 3.0, "points": 11},
        "numerics": {"n_fock": 6, "tau_points": 11},
    })
    assert cli.main(["spectrum", "--config", str(cfg), "--out", str(tmp_path), "--jobs", "1"]) == 0
    for name in ("spectrum_emission", "spectrum_absorption"):
        _, cols, rows = read_csv(tmp_path / f"{name}.csv")
        assert cols == ["omega", "analytic", "numeric", "abs_diff"]
        assert rows.shape == (11, 4)
    assert (tmp_path / "plot_spectrum.py").exists()
    assert cli.main(["correlate", "--config", str(cfg), "--out", str(tmp_path), "--jobs", "1"]) == 0
    _, cols, rows = read_csv(tmp_path / "correlate.csv")
    assert cols[0] == "tau" and rows.shape[0] == 11
    assert rows[-1, 0] == pytest.approx(50.0)


def test_plot_scripts_run(tmp_path):
    pytest.importorskip("matplotlib")
    cfg = small_population(tmp_path, points=5)
    cli.main(["population", "--config", str(cfg), "--out", str(tmp_path), "--jobs", "1"])
    cfg2 = write(tmp_path, {"molecule": {"lambda1": 1.0}}, "fc.json")
    cli.main(["fc", "--config", str(cfg2), "--out", str(tmp_path), "--jobs", "1"])
    env = dict(os.environ, MPLBACKEND="Agg")
    for s in ("plot_population.py", "plot_fc.py"):
        subprocess.run([sys.executable, str(tmp_path / s)], env=env, check=True)
        assert (tmp_path / s.replace(".py", ".png")).exists()


def test_console_entry_point(tmp_path):
    cfg = write(tmp_path, {"molecule": {"lambda1": 1.0}})
    out = subprocess.run([sys.executable, "-m", "vibronica.cli", "fc", "--config", str(cfg),
                          "--out", str(tmp_path), "--jobs", "1"], capture_output=True, text=True)
    assert out.returncode == 0
    assert "fc.csv" in out.stdout

import json

import numpy as np
import pytest

import vacmirror as vm
from vacmirror.cli import main, parse_config
from vacmirror.errors import ConfigError


def write_cfg(tmp_path, body, name="run.cfg"):
    path = tmp_path / name
    path.write_text(body)
    return path


LORENTZIAN_CFG = """
# default Lorentzian run
[model]
kind = lorentzian
omega = 1.0

[mechanics]
tau_omega = 1.0e-3
k_over_m = 0.0

[grid]
omega_min = 1.0e-2
omega_max = 1.0e2
points = 60
spacing = log
"""


def test_parse_config_defaults(tmp_path):
    cfg = parse_config(write_cfg(tmp_path, LORENTZIAN_CFG))
    assert cfg["model"]["kind"] == "lorentzian"
    assert cfg["grid"]["points"] == 60
    assert cfg["analysis"]["probe_points"] == 1000  # untouched default


@pytest.mark.parametrize(
    "body,fragment",
    [
        ("[model]\nkind = lorentzian\nbogus = 1\n", "unknown key"),
        ("[mistery]\nkind = lorentzian\n", "unknown section"),
        ("[model]\nkind = sideways\n", "must be one of"),
        ("[model]\nkind = lorentzian\nomega = -2\n", "must be positive"),
        ("[model]\nkind = lorentzian\n[grid]\npoints = few\n", "cannot parse"),
        ("[model]\nkind = lorentzian\nkind = perfect\n", "duplicate"),
        ("kind = lorentzian\n", "outside any"),
        ("[model]\n", "model.kind is required"),
        ("[model]\nkind = tabulated\n", "needs model.table"),
        ("[model]\nkind = tabulated\ntable = nope.txt\n", "not found"),
    ],
)
def test_parse_config_rejections(tmp_path, body, fragment):
    with pytest.raises(ConfigError) as err:
        parse_config(write_cfg(tmp_path, body))
    assert fragment in str(err.value)


def test_config_errors_carry_line_numbers(tmp_path):
    path = write_cfg(tmp_path, "[model]\nkind = lorentzian\nbogus = 1\n")
    with pytest.raises(ConfigError) as err:
        parse_config(path)
    assert f"{path}:3:" in str(err.value)


def test_analyze_lorentzian(tmp_path):
    cfg = write_cfg(tmp_path, LORENTZIAN_CFG)
    out = tmp_path / "out"
    assert main(["analyze", "--config", str(cfg), "--out", str(out)]) == 0
    for name in ("gamma.csv", "chi.csv", "impedance.csv", "summary.json"):
        assert (out / name).exists()
    doc = json.loads((out / "summary.json").read_text())
    assert doc["omega_C"] == pytest.approx(3.0, rel=1e-2)
    assert doc["gamma0"]["re"] == pytest.approx(1.0)
    assert doc["gamma0"]["im"] == pytest.approx(0.0, abs=1e-12)
    assert not doc["cutoff_divergent"]
    assert doc["validation"]["unitarity_defect"] < 1e-12
    lines = (out / "gamma.csv").read_text().splitlines()
    assert lines[0] == "omega,gamma_re,gamma_im,chi_re,chi_im,quad_err"
    assert len(lines) == 61


def test_analyze_deterministic_bytes(tmp_path):
    cfg = write_cfg(tmp_path, LORENTZIAN_CFG)
    out1, out2 = tmp_path / "a", tmp_path / "b"
    main(["analyze", "--config", str(cfg), "--out", str(out1)])
    main(["analyze", "--config", str(cfg), "--out", str(out2)])
    for name in ("gamma.csv", "chi.csv", "impedance.csv", "summary.json"):
        assert (out1 / name).read_bytes() == (out2 / name).read_bytes()


def test_analyze_perfect_flags_divergence(tmp_path):
    body = LORENTZIAN_CFG.replace("kind = lorentzian", "kind = perfect")
    cfg = write_cfg(tmp_path, body)
    out = tmp_path / "out"
    assert main(["analyze", "--config", str(cfg), "--out", str(out)]) == 0
    doc = json.loads((out / "summary.json").read_text())
    assert doc["cutoff_divergent"]
    assert doc["omega_C"] is None


def test_cli_exit_code_on_config_error(tmp_path, capsys):
    cfg = write_cfg(tmp_path, "[model]\nkind = tabulated\ntable = gone.txt\n")
    assert main(["analyze", "--config", str(cfg)]) == 2
    assert "config error" in capsys.readouterr().err


def test_stability_perfect(tmp_path):
    body = LORENTZIAN_CFG.replace("kind = lorentzian", "kind = perfect")
    cfg = write_cfg(tmp_path, body)
    out = tmp_path / "out"
    assert main(["stability", "--config", str(cfg), "--out", str(out)]) == 0
    doc = json.loads((out / "stability.json").read_text())
    assert doc["rhp_zero_count"] >= 1
    assert doc["roots"][0]["re"] == pytest.approx(1000.0, rel=1e-6)
    assert not doc["passive"]


def test_stability_lorentzian_passive(tmp_path):
    cfg = write_cfg(tmp_path, LORENTZIAN_CFG)
    out = tmp_path / "out"
    assert main(["stability", "--config", str(cfg), "--out", str(out)]) == 0
    doc = json.loads((out / "stability.json").read_text())
    assert doc["rhp_zero_count"] == 0
    assert doc["passive"]
    assert doc["mu_over_m"] == pytest.approx(3e-3, rel=1e-2)


def test_stability_strong_coupling_unstable(tmp_path):
    body = LORENTZIAN_CFG.replace("tau_omega = 1.0e-3", "tau_omega = 1.0")
    cfg = write_cfg(tmp_path, body)
    out = tmp_path / "out"
    assert main(["stability", "--config", str(cfg), "--out", str(out)]) == 0
    doc = json.loads((out / "stability.json").read_text())
    assert doc["rhp_zero_count"] >= 1
    assert not doc["passive"]
    assert doc["mu_over_m"] == pytest.approx(3.0, rel=1e-2)


SIM_PERFECT_CFG = """
[model]
kind = perfect

[mechanics]
tau_omega = 1.0e-3
k_over_m = 0.0

[simulation]
force = none
t_final = 0.3
dt = 2.0e-5
a0 = 1.0
"""


def test_simulate_perfect_runaway(tmp_path):
    cfg = write_cfg(tmp_path, SIM_PERFECT_CFG)
    out = tmp_path / "out"
    assert main(["simulate", "--config", str(cfg), "--out", str(out)]) == 0
    doc = json.loads((out / "run.json").read_text())
    assert doc["diverged"] is True
    assert doc["fitted_runaway"]["rate"] == pytest.approx(1000.0, rel=1e-2)
    assert (out / "trajectory.csv").exists()
    assert (out / "energy.csv").exists()


SIM_MEMORY_CFG = """
[model]
kind = lorentzian

[mechanics]
tau_omega = 0.3
k_over_m = 2.25

[simulation]
force = gaussian
amplitude = 1.0e-3
center = 4.0
width = 1.2
t_final = 30.0
dt = 2.0e-3
"""


def test_simulate_memory_pulse(tmp_path):
    cfg = write_cfg(tmp_path, SIM_MEMORY_CFG)
    out = tmp_path / "out"
    assert main(["simulate", "--config", str(cfg), "--out", str(out)]) == 0
    doc = json.loads((out / "run.json").read_text())
    assert doc["regime"] == "memory"
    assert doc["diverged"] is False
    assert doc["W_a_final"] >= 0
    assert doc["W_m_final"] >= 0
    assert (out / "kernel.csv").exists()
    header = (out / "trajectory.csv").read_text().splitlines()[0]
    assert header == "t,q,v,a,F_a,W_a,E,W_m"


def test_simulate_memory_refuses_heavy_mass(tmp_path):
    body = SIM_MEMORY_CFG.replace("tau_omega = 0.3", "tau_omega = 0.5")
    cfg = write_cfg(tmp_path, body)
    assert main(["simulate", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 2


def test_simulate_zero_everything_is_null(tmp_path):
    body = SIM_MEMORY_CFG.replace("force = gaussian", "force = none")
    cfg = write_cfg(tmp_path, body)
    out = tmp_path / "out"
    assert main(["simulate", "--config", str(cfg), "--out", str(out)]) == 0
    rows = (out / "trajectory.csv").read_text().splitlines()[1:]
    q = np.array([float(r.split(",")[1]) for r in rows])
    assert np.all(q == 0.0)


CROSSCHECK_CFG = LORENTZIAN_CFG


def test_crosscheck_lorentzian(tmp_path):
    cfg = write_cfg(tmp_path, CROSSCHECK_CFG)
    out = tmp_path / "out"
    assert main(["crosscheck", "--config", str(cfg), "--out", str(out)]) == 0
    doc = json.loads((out / "crosscheck.json").read_text())
    assert doc["kk"]["passed"]
    assert doc["kk"]["defect"] < 1e-3
    assert doc["spectral_rep"]["passed"]
    assert doc["spectral_rep"]["defect"] < 1e-4
    assert doc["consistency"]["passed"]
    assert doc["consistency"]["defect"] < 1e-2


def test_crosscheck_perfect_reports_divergence(tmp_path):
    body = CROSSCHECK_CFG.replace("kind = lorentzian", "kind = perfect")
    cfg = write_cfg(tmp_path, body)
    out = tmp_path / "out"
    assert main(["crosscheck", "--config", str(cfg), "--out", str(out)]) == 0
    doc = json.loads((out / "crosscheck.json").read_text())
    assert doc["spectral_rep"]["status"] == "divergent"


def test_crosscheck_corrupted_table_gated(tmp_path):
    m = vm.lorentzian_mirror()
    w = np.linspace(0.0, 150.0, 4000)
    r = vm.reflectivity(m, w) * 1.1  # breaks unitarity
    s = vm.transmissivity(m, w)
    table = tmp_path / "bad_table.txt"
    vm.save_table(table, w, r, s)
    body = f"""
[model]
kind = tabulated
table = {table}

[mechanics]
tau_omega = 1.0e-3
"""
    cfg = write_cfg(tmp_path, body)
    out = tmp_path / "out"
    assert main(["crosscheck", "--config", str(cfg), "--out", str(out)]) == 3
    doc = json.loads((out / "crosscheck.json").read_text())
    assert "validation_failure" in doc


def test_timestamps_only_under_flag(tmp_path):
    cfg = write_cfg(tmp_path, LORENTZIAN_CFG)
    out1 = tmp_path / "p"
    main(["analyze", "--config", str(cfg), "--out", str(out1)])
    doc = json.loads((out1 / "summary.json").read_text())
    assert "generated_at" not in doc["meta"]
    out2 = tmp_path / "q"
    main(["analyze", "--config", str(cfg), "--out", str(out2), "--timestamps"])
    doc2 = json.loads((out2 / "summary.json").read_text())
    assert "generated_at" in doc2["meta"]

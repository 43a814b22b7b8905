import json

import numpy as np
import pytest

from ijwkb import claims
from ijwkb.cli import main, parse_range, ConfigError
from ijwkb.output import read_csv

EXACT_STEP = '{"family": "step", "u_left": 0, "u_right": 1.5, "x_step": 0}'
ECKART = '{"family": "eckart", "u0": 1, "width": 1}'


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_wavefunction_constant(tmp_path, capsys):
    code, out, _ = run(capsys, "wavefunction", "--potential", '{"family": "constant", "u0": 0}',
                       "--E", "2", "--range", "-5:5:501", "--out", str(tmp_path))
    assert code == 0
    waves = {}
    for m in ("exact", "jwkb", "improved"):
        header, data = read_csv(tmp_path / f"psi_{m}.csv")
        assert header == ["x", "re", "im", "abs"]
        waves[m] = data[:, 1] + 1j * data[:, 2]
    assert (tmp_path / "psi_overlay.svg").exists()
    dev = max(np.max(np.abs(waves[a] - waves[b])) for a in waves for b in waves)
    assert dev <= 1e-9
    assert "max cross-method deviation" in out


def test_wavefunction_eckart_row_count(tmp_path, capsys):
    code, _, _ = run(capsys, "wavefunction", "--potential", ECKART, "--E", "4",
                     "--range", "-10:10:801", "--out", str(tmp_path))
    assert code == 0
    for m in ("exact", "jwkb", "improved"):
        _, data = read_csv(tmp_path / f"psi_{m}.csv")
        assert data.shape[0] == 801


def test_wavefunction_turning_point_exit(tmp_path, capsys):
    code, _, err = run(capsys, "wavefunction", "--potential",
                       '{"family": "linear_ramp", "slope": 1, "intercept": 0}', "--E", "2",
                       "--range", "0:4:101", "--method", "jwkb", "--out", str(tmp_path))
    assert code == 3
    assert "x=2" in err


def test_transmit_step(tmp_path, capsys):
    code, _, _ = run(capsys, "transmit", "--potential", EXACT_STEP, "--E-range", "2:6:5",
                     "--range", "-2:2:2", "--out", str(tmp_path))
    assert code == 0
    header, data = read_csv(tmp_path / "transmission.csv")
    assert header == ["energy", "t_exact", "t_jwkb", "t_improved", "err_jwkb", "err_improved"]
    assert data.shape == (5, 6)
    assert np.all(data[:, 4:] <= 1e-8)
    assert (tmp_path / "transmission_error.svg").exists()


def test_transmit_is_deterministic(tmp_path, capsys):
    args = ["transmit", "--potential", ECKART, "--E-range", "1.5:3:3"]
    assert run(capsys, *args, "--out", str(tmp_path / "a"))[0] == 0
    assert run(capsys, *args, "--out", str(tmp_path / "b"), "--workers", "2")[0] == 0
    a = (tmp_path / "a" / "transmission.csv").read_bytes()
    b = (tmp_path / "b" / "transmission.csv").read_bytes()
    assert a == b


def test_transmit_negative_control_is_labeled(tmp_path, capsys):
    code, _, _ = run(capsys, "transmit", "--potential", EXACT_STEP, "--E-range", "2:3:2",
                     "--range", "-2:2:2", "--negative-control", "--out", str(tmp_path))
    assert code == 0
    _, data = read_csv(tmp_path / "transmission_NEGATIVE_CONTROL.csv")
    assert data[0, 2] == pytest.approx(0.5)


@pytest.mark.parametrize("argv", [
    ["transmit", "--potential", EXACT_STEP, "--E-range", "2:6:0"],
    ["transmit", "--potential", EXACT_STEP, "--E-range", "6:2:4"],
    ["transmit", "--potential", '{"family": "nope"}', "--E-range", "2:6:4"],
    ["transmit", "--potential", "{not json", "--E-range", "2:6:4"],
    ["transmit", "--E-range", "2:6:4"],
    ["wavefunction", "--potential", ECKART, "--range", "-1:1:11", "--method", "bogus"],
    ["frobnicate"],
    ["wavefunction", "--potential", ECKART, "--range", "-1:1:11", "--tol-ode", "-1"],
])
def test_config_errors_exit_2(argv, tmp_path, capsys):
    assert run(capsys, *argv, "--out", str(tmp_path))[0] == 2


def test_sub_barrier_sweep_exit_3(tmp_path, capsys):
    code, _, _ = run(capsys, "transmit", "--potential", ECKART, "--E-range", "0.5:2:3",
                     "--out", str(tmp_path))
    assert code == 3


def test_config_file_and_override(tmp_path, capsys):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({"potential": json.loads(EXACT_STEP), "E_range": "2:3:2",
                               "range": {"min": -2, "max": 2, "count": 2},
                               "out": str(tmp_path / "from_file")}))
    code, _, _ = run(capsys, "transmit", "--config", str(cfg), "--E-range", "2:4:3")
    assert code == 0
    _, data = read_csv(tmp_path / "from_file" / "transmission.csv")
    assert data.shape[0] == 3


def test_parse_range():
    g = parse_range("-10:10:2001")
    assert (g.lo, g.hi, g.count) == (-10.0, 10.0, 2001)
    with pytest.raises(ConfigError):
        parse_range("1:2")
    with pytest.raises(ConfigError):
        parse_range("0:1:2.5")


def test_diagnose_constant_and_ramp(tmp_path, capsys):
    code, _, _ = run(capsys, "diagnose", "--potential", '{"family": "constant", "u0": 0}',
                     "--E", "2", "--range", "0:5:201", "--out", str(tmp_path / "c"))
    assert code == 0
    for form in ("direct", "schwarzian", "t_ratio"):
        _, data = read_csv(tmp_path / "c" / f"w_jwkb_{form}.csv")
        assert np.all(data[:, 1:] == 0)
    code, out, _ = run(capsys, "diagnose", "--potential",
                       '{"family": "linear_ramp", "slope": 1, "intercept": 0}', "--E", "2",
                       "--range", "0:4:401", "--out", str(tmp_path / "r"))
    assert code == 0
    summary = json.loads((tmp_path / "r" / "summary.json").read_text())
    assert summary["turning_point_fitted_exponent"] == pytest.approx(-2.0, abs=0.1)
    assert summary["environment"] == {"hbar": 1.0, "mass": 1.0}
    assert all({"name", "measured", "threshold", "pass"} <= set(c) for c in summary["claims"])
    table = (tmp_path / "r" / "turning_point_table.csv").read_text().splitlines()
    assert table[0] == "epsilon,abs_eta,abs_w_jwkb,error"
    assert len(table) > 5


def test_diagnose_eckart_margin(tmp_path, capsys):
    code, _, _ = run(capsys, "diagnose", "--potential", ECKART, "--E", "2",
                     "--range", "-8:8:801", "--out", str(tmp_path))
    assert code == 0
    summary = json.loads((tmp_path / "summary.json").read_text())
    assert summary["eta_bound_margin_min"] >= -1e-8


@pytest.fixture
def fast_claims(monkeypatch):
    monkeypatch.setattr(claims, "CLAIMS", claims.CLAIMS[:3])


def test_verify_hooks(fast_claims, tmp_path, capsys):
    code, out, _ = run(capsys, "verify", "--out", str(tmp_path))
    assert code == 0 and out.count("PASS") >= 3
    code, out, _ = run(capsys, "verify", "--c2-override", "0")
    assert code == 1 and "FAIL constant_fixing" in out
    code, out, _ = run(capsys, "verify", "--negative-control")
    assert code == 1 and "NEGATIVE_CONTROL" in out
    summary = json.loads((tmp_path / "verify_summary.json").read_text())
    assert len(summary["claims"]) == 3


def test_verify_full_run(tmp_path, capsys):
    code, out, _ = run(capsys, "verify", "--out", str(tmp_path))
    assert code == 0, out
    assert out.count("\nPASS") + out.startswith("PASS") == len(claims.CLAIMS)
    _, data = read_csv(tmp_path / "eckart_comparison.csv")
    assert data.shape == (20, 6)

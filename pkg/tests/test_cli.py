"""Command-line surface: subcommands, exit codes, file outputs."""

import json

from ncps.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr().out
    return code, out


def test_list(capsys):
    code, out = run(capsys, "list")
    assert code == 0
    assert "eta-coupled" in out and "flow-index" in out


def test_verify_pass_and_json(tmp_path, capsys):
    path = tmp_path / "report.json"
    code, out = run(capsys, "verify", "eta-invariance", "--json", str(path))
    assert code == 0
    payload = json.loads(path.read_text())
    assert payload["status"] == "pass"
    assert json.loads(out) == payload


def test_verify_flow_flags(capsys):
    code, out = run(capsys, "verify", "flow-index", "--u", "1,0,0", "--grid", "41", "--cutoff", "4")
    assert code == 0
    assert json.loads(out)["details"]["flow"] == 0


def test_verify_error_exit_code(capsys):
    code, _ = run(capsys, "verify", "flow-index", "--grid", "1")
    assert code == 2


def test_wres_family_file(tmp_path, capsys):
    fam = tmp_path / "fam.json"
    fam.write_text(json.dumps({"kind": "coupled_dirac", "dim": 3}))
    code, out = run(capsys, "wres", "--family", str(fam), "--compose", "sign")
    assert code == 0
    payload = json.loads(out)
    assert payload["vanishing_level"] == "trace"


def test_wres_malformed_family(tmp_path, capsys):
    fam = tmp_path / "fam.json"
    fam.write_text(json.dumps({"kind": "mystery", "dim": 3}))
    code, _ = run(capsys, "wres", "--family", str(fam))
    assert code == 2
    fam.write_text("{not json")
    code, _ = run(capsys, "wres", "--family", str(fam))
    assert code == 2


def test_heat_command(tmp_path, capsys):
    fam = tmp_path / "fam.json"
    fam.write_text(json.dumps({"kind": "conformal_dirac", "dim": 3, "t_cap": 1}))
    code, out = run(capsys, "heat", "--family", str(fam), "--orders", "3", "--localizer", "h")
    assert code == 0
    payload = json.loads(out)
    assert payload["coefficients"]["beta_1"]["traced"] == "0"


def test_anomaly_command(capsys):
    code, out = run(capsys, "anomaly", "--t-order", "1")
    assert code == 0
    payload = json.loads(out)
    assert payload["density_per_grade"]["t^0"] == "0"
    assert "d(1,1)(h)" in payload["density_per_grade"]["t^1"]


def test_cs_density_command(capsys):
    code, out = run(capsys, "cs-density")
    assert code == 0
    payload = json.loads(out)
    assert "dA1" in payload["tau_class"]


def test_num_spectrum_with_csv(tmp_path, capsys):
    fam = tmp_path / "fam.json"
    fam.write_text(json.dumps({"kind": "free_dirac", "dim": 3}))
    csv = tmp_path / "spec.csv"
    code, out = run(capsys, "num", "spectrum", "--family", str(fam), "--cutoff", "1", "--csv", str(csv))
    assert code == 0
    payload = json.loads(out)
    assert payload["size"] == 2 * 27
    lines = csv.read_text().strip().splitlines()
    assert len(lines) == 2 * 27


def test_num_spectrum_numeric_family(tmp_path, capsys):
    fam = tmp_path / "fam.json"
    fam.write_text(
        json.dumps(
            {
                "kind": "conformal_dirac",
                "dim": 3,
                "theta": [[0, 0.3, 0.1], [-0.3, 0, 0.2], [-0.1, -0.2, 0]],
                "weyl_modes": {"1,0,0": [0.15, 0.0], "-1,0,0": [0.15, 0.0]},
            }
        )
    )
    code, out = run(capsys, "num", "spectrum", "--family", str(fam), "--cutoff", "2", "--t", "0.1")
    assert code == 0
    assert json.loads(out)["hermiticity_defect"] < 1e-12


def test_num_flow_command(capsys):
    code, out = run(capsys, "num", "flow", "--u", "1,0,0", "--grid", "51", "--cutoff", "4")
    assert code == 0
    assert json.loads(out)["flow"] == 0


def test_num_heat_command(capsys):
    code, out = run(capsys, "num", "heat", "--t", "0.05", "--cutoff", "40", "--dim", "3")
    assert code == 0
    payload = json.loads(out)
    assert abs(payload["scaled_trace"] - 11.1366) < 1e-3


def test_missing_family_file(capsys):
    code, _ = run(capsys, "wres", "--family", "/nonexistent/f.json")
    assert code == 2


def test_num_spectrum_coupled_modes(tmp_path, capsys):
    fam = tmp_path / "fam.json"
    fam.write_text(
        json.dumps(
            {
                "kind": "coupled_dirac",
                "dim": 3,
                "theta": [[0, 0.3, 0.1], [-0.3, 0, 0.2], [-0.1, -0.2, 0]],
                "gauge_modes": [
                    {"1,0,0": [0.1, 0.0], "-1,0,0": [0.1, 0.0]},
                    {"0,1,0": [0.1, 0.0], "0,-1,0": [0.1, 0.0]},
                    {"0,0,1": [0.1, 0.0], "0,0,-1": [0.1, 0.0]},
                ],
            }
        )
    )
    code, out = run(capsys, "num", "spectrum", "--family", str(fam), "--cutoff", "2")
    assert code == 0
    assert json.loads(out)["hermiticity_defect"] < 1e-12


def test_wres_t_order_override(tmp_path, capsys):
    fam = tmp_path / "fam.json"
    fam.write_text(json.dumps({"kind": "conformal_dirac", "dim": 3, "t_cap": 1}))
    code, out = run(capsys, "wres", "--family", str(fam), "--t-order", "2")
    assert code == 0
    assert json.loads(out)["family"]["t_cap"] == 2


def test_cs_density_deterministic(capsys):
    code1, out1 = run(capsys, "cs-density")
    code2, out2 = run(capsys, "cs-density")
    assert code1 == code2 == 0
    assert out1 == out2


def test_num_spectrum_flow_family(tmp_path, capsys):
    fam = tmp_path / "fam.json"
    fam.write_text(json.dumps({"kind": "unitary_flow", "dim": 3, "flow_k": [1, 0, 0]}))
    code, out = run(capsys, "num", "spectrum", "--family", str(fam), "--cutoff", "1", "--t", "0.5")
    assert code == 0
    vals = json.loads(out)["eigenvalues"]
    assert min(abs(v) for v in vals) > 0.4  # shifted spectrum avoids zero


def test_installed_entry_point_subprocess():
    import subprocess
    import sys

    proc = subprocess.run(
        [sys.executable, "-m", "ncps.cli", "verify", "eta-invariance"],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["status"] == "pass"

import csv
import json
import subprocess
import sys

import pytest

from ghzpulse.cli import EXIT_CONFIG, EXIT_CONVERGENCE, EXIT_OK, design_report, main


def _write(path, doc):
    path.write_text(json.dumps(doc))
    return str(path)


def test_design_command(capsys):
    assert main(["design"]) == EXIT_OK
    out = capsys.readouterr().out
    assert "a0     = 0.72747" in out and "FAIL" not in out


def test_design_report_json(capsys):
    assert main(["design", "--format", "json"]) == EXIT_OK
    rep = json.loads(capsys.readouterr().out)
    assert rep["ok"] and rep["seconds"] < 1.0


def test_simulate_minimal(tmp_path, capsys):
    cfg = _write(tmp_path / "c.json", {"physics": {"n": 2, "eta": 0.03}, "solver": {"time_steps": 512}})
    assert main(["simulate", "--config", cfg, "--out", str(tmp_path / "o")]) == EXIT_OK
    rec = json.loads((tmp_path / "o" / "result.json").read_text())
    assert 0 <= rec["fidelity"] <= 1
    assert rec["diagnostics"]["converged"]
    assert (tmp_path / "o" / "pulse.csv").read_text().startswith("t,re_omega,im_omega,delta")
    assert (tmp_path / "o" / "trajectory.csv").exists()
    assert (tmp_path / "o" / "simulate_run_metadata.json").exists()


def test_simulate_flagship_point(tmp_path):
    cfg = _write(tmp_path / "c.json", {
        "pulse": {"family": "echoed_lemniscate", "da": 0.00442, "dA_rel": 0.0085},
        "physics": {"n": 20, "eta": 0.03},
        "solver": {"check_convergence": False},
    })
    assert main(["simulate", "--config", cfg, "--out", str(tmp_path)]) == EXIT_OK
    rec = json.loads((tmp_path / "result.json").read_text())
    assert rec["infidelity"] == pytest.approx(2e-6, rel=0.5)


def test_simulate_convergence_failure(tmp_path):
    cfg = _write(tmp_path / "c.json", {
        "physics": {"n": 4, "eta": 0.03},
        "solver": {"time_steps": 256, "rtol": 1e-300, "atol": 1e-300, "max_refinements": 0},
    })
    assert main(["simulate", "--config", cfg, "--out", str(tmp_path)]) == EXIT_CONVERGENCE
    assert (tmp_path / "result.json").exists()


def test_malformed_config_exit_code(tmp_path, capsys):
    cfg = _write(tmp_path / "c.json", {"physics": {"n": 4, "etta": 0.03}})
    assert main(["simulate", "--config", cfg]) == EXIT_CONFIG
    assert "physics.etta" in capsys.readouterr().err


def test_scan_without_sections(tmp_path, capsys):
    cfg = _write(tmp_path / "c.json", {})
    assert main(["scan", "--config", cfg, "--out", str(tmp_path)]) == EXIT_CONFIG


SCAN_DOC = {
    "scan": {
        "fig2": {"n_values": [2, 4], "grid": {"start": -0.004, "stop": 0.006, "num": 3}, "refine": False},
        "fig3": {"n": 4, "da": {"start": 0.0, "stop": 0.004, "num": 2},
                 "dA_rel": {"start": 0.0, "stop": 0.004, "num": 2}, "refine": False},
        "fig4": {"n": 4, "etas": [0.02, 0.03], "families": [{"family": "echoed_rectangular", "k": 1}]},
        "fig5": {"eta": 0.03, "n_values": [2, 4], "families": [{"family": "rectangular", "k": 1}]},
    }
}


def _read(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


def test_scan_outputs_and_determinism(tmp_path):
    cfg = _write(tmp_path / "c.json", SCAN_DOC)
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["scan", "--config", cfg, "--out", str(a)]) == EXIT_OK
    assert main(["scan", "--config", cfg, "--out", str(b)]) == EXIT_OK
    headers = {
        "fig2.csv": ["n", "delta_omega_rel", "infidelity", "analytic_cross_flag", "error"],
        "fig2_inset.csv": ["n", "sx4_contribution", "phonon_contribution"],
        "fig3.csv": ["da", "dA_rel", "infidelity", "error"],
        "fig3_valley.csv": ["da", "dA_rel", "infidelity"],
        "fig4.csv": ["family", "eta", "infidelity", "phonon_prob", "error"],
        "fig5.csv": ["family", "n", "infidelity", "error"],
    }
    for name, header in headers.items():
        rows = _read(a / name)
        assert rows[0] == header
        assert (a / name).read_bytes() == (b / name).read_bytes()
    fig2 = _read(a / "fig2.csv")[1:]
    assert {r[3] for r in fig2} == {"0", "1", "2"}
    assert len(_read(a / "fig3.csv")) == 5
    assert (a / "scan_run_metadata.json").exists()


def test_chain_command(capsys):
    assert main(["chain", "--n", "2", "20"]) == EXIT_OK
    rows = list(csv.reader(capsys.readouterr().out.splitlines()))
    assert rows[0] == ["n", "a_n", "omega_z_max", "eta"]
    assert len(rows) == 3
    assert main(["chain", "--n", "20", "--format", "json"]) == EXIT_OK
    assert json.loads(capsys.readouterr().out)[0]["n"] == 20


def test_workers_flag_validation():
    with pytest.raises(SystemExit):
        main(["design", "--workers", "0"])


def test_console_entry_point():
    proc = subprocess.run([sys.executable, "-m", "ghzpulse", "design"], capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    assert "PASS  theta4" in proc.stdout


def test_design_report_checks():
    rep = design_report(0.05)
    assert all(rep["checks"].values())

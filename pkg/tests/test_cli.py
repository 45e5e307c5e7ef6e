import json

import numpy as np
import pytest

from dualrail_scqc.cli import main
from dualrail_scqc.geometry import ControlPulse
from dualrail_scqc.io import write_pulse_csv


def write_config(path, cfg):
    path.write_text(json.dumps(cfg))
    return str(path)


@pytest.fixture(scope="module")
def pulse_files(tmp_path_factory, zz_design, swap_design):
    d = tmp_path_factory.mktemp("pulses")
    write_pulse_csv(d / "zz.csv", zz_design.pulse)
    write_pulse_csv(d / "swap.csv", swap_design.pulse)
    return {"zz_half": str(d / "zz.csv"), "swap_ancilla": str(d / "swap.csv")}


class TestCheckCurve:
    def test_closed(self, tmp_path, capsys):
        write_pulse_csv(tmp_path / "p.csv", ControlPulse.square(1.0, 2 * np.pi, 500))
        assert main(["check-curve", str(tmp_path / "p.csv")]) == 0
        report = json.loads(capsys.readouterr().out)
        assert report["closed"]
        np.testing.assert_allclose(report["geometric_gate_adjoint"], np.eye(3), atol=1e-6)

    def test_open(self, tmp_path, capsys):
        omega = np.pi
        write_pulse_csv(tmp_path / "p.csv", ControlPulse.square(1.0, omega, 2000))
        assert main(["check-curve", str(tmp_path / "p.csv")]) == 1
        report = json.loads(capsys.readouterr().out)
        assert report["closure_gap"] == pytest.approx(2 / omega, rel=1e-6)
        assert "vector_area" in report

    def test_empty_file(self, tmp_path, capsys):
        (tmp_path / "e.csv").write_text("")
        assert main(["check-curve", str(tmp_path / "e.csv")]) == 2
        assert "e.csv:1" in capsys.readouterr().err

    def test_designed_sectors_closed(self, tmp_path, zz_design, chi):
        write_pulse_csv(tmp_path / "zz.csv", zz_design.pulse)
        for offset in (chi / 2, -chi / 2):
            assert main(["check-curve", str(tmp_path / "zz.csv"),
                         f"--detuning-offset={offset}"]) == 0


class TestUsage:
    def test_no_command(self):
        assert main([]) == 2

    def test_unknown_config_key(self, tmp_path):
        cfg = write_config(tmp_path / "c.json", {"kappa1": 3.14, "bogus": 1})
        assert main(["--config", cfg, "--out", str(tmp_path), "crosstalk-sweep"]) == 2

    def test_three_point_grid(self, tmp_path, capsys):
        cfg = write_config(tmp_path / "c.json", {"xi_grid": [1e-3, 1e-2, 1e-1]})
        assert main(["--config", cfg, "--out", str(tmp_path), "crosstalk-sweep"]) == 2
        assert "at least 4" in capsys.readouterr().err

    def test_invalid_json(self, tmp_path):
        (tmp_path / "c.json").write_text("{\n  'x': 1\n}")
        assert main(["--config", str(tmp_path / "c.json"), "crosstalk-sweep"]) == 2

    def test_zz_requires_theta(self, tmp_path):
        assert main(["--out", str(tmp_path), "zz"]) == 2

    def test_bad_threads(self, tmp_path, monkeypatch):
        assert main(["--threads", "0", "--out", str(tmp_path), "crosstalk-sweep"]) == 2
        monkeypatch.setenv("DUALRAIL_SCQC_THREADS", "many")
        assert main(["--out", str(tmp_path), "crosstalk-sweep"]) == 2

    def test_missing_pulse_file(self, tmp_path):
        cfg = write_config(tmp_path / "c.json", {"pulses": {"zz_half": "missing.csv"}})
        assert main(["--config", cfg, "--out", str(tmp_path), "jp"]) == 2


class TestCommands:
    def test_crosstalk_sweep(self, tmp_path):
        cfg = write_config(tmp_path / "c.json", {"n_steps": 1000, "expect_slope": [3.8, 4.2]})
        assert main(["--config", cfg, "--out", str(tmp_path), "--threads", "2",
                     "crosstalk-sweep"]) == 0
        summary = json.loads((tmp_path / "crosstalk_sweep.json").read_text())
        assert summary["slope"] == pytest.approx(4.0, abs=0.2)
        assert (tmp_path / "crosstalk_sweep.csv").read_text().startswith("# version:")

    def test_crosstalk_slope_check_fails(self, tmp_path):
        cfg = write_config(tmp_path / "c.json", {"kappa1": 9.42477796076938, "n_steps": 500,
                                                 "expect_slope": [3.8, 4.2]})
        assert main(["--config", cfg, "--out", str(tmp_path), "crosstalk-sweep"]) == 1

    def test_design_budget_one(self, tmp_path):
        cfg = write_config(tmp_path / "c.json", {"budget": 1, "restarts": 1})
        assert main(["--config", cfg, "--out", str(tmp_path), "design"]) == 1
        report = json.loads((tmp_path / "design_report.json").read_text())
        assert report["ok"] is False
        assert (tmp_path / "design_pulse.csv").exists()

    def test_jp_naive(self, tmp_path):
        cfg = write_config(tmp_path / "c.json", {
            "pulses": {"zz_half": "naive", "swap_ancilla": "naive"},
            "gamma_grid": np.logspace(-3, -1, 5).tolist(), "baselines": ["single_shot"]})
        assert main(["--config", cfg, "--out", str(tmp_path), "jp"]) == 0
        summary = json.loads((tmp_path / "jp_summary.json").read_text())
        assert summary["slopes"]["three_step"] == pytest.approx(2.0, abs=0.1)
        assert summary["slopes"]["single_shot"] == pytest.approx(2.0, abs=0.1)

    def test_jp_designed(self, tmp_path, pulse_files):
        cfg = write_config(tmp_path / "c.json", {
            "pulses": pulse_files, "gamma_grid": np.logspace(-3, -1, 6).tolist(),
            "baselines": ["naive_three_step"]})
        assert main(["--config", cfg, "--out", str(tmp_path), "jp"]) == 0
        summary = json.loads((tmp_path / "jp_summary.json").read_text())
        assert summary["slopes"]["three_step"] >= 3.7
        assert summary["slopes"]["naive_three_step"] <= 2.3

    def test_jp_truncation_warning(self, tmp_path):
        cfg = write_config(tmp_path / "c.json", {
            "protocol": "single_shot", "n_max": 2, "gamma_grid": np.logspace(-3, -1, 5).tolist()})
        assert main(["--config", cfg, "--out", str(tmp_path), "jp"]) == 0
        summary = json.loads((tmp_path / "jp_summary.json").read_text())
        assert summary["warnings"]
        assert summary["truncation_error"] < 1e-10

    @pytest.mark.parametrize("theta", [0.0, np.pi / 3, np.pi / 2])
    def test_zz_ideal(self, tmp_path, theta):
        cfg = write_config(tmp_path / "c.json", {"theta": theta})
        assert main(["--config", cfg, "--out", str(tmp_path), "zz"]) == 0
        summary = json.loads((tmp_path / "zz_summary.json").read_text())
        assert summary["distance"] < 1e-8
        assert summary["concurrence"] == pytest.approx(abs(np.sin(theta)), abs=1e-6)

    def test_zz_simulated_noisy(self, tmp_path, pulse_files):
        cfg = write_config(tmp_path / "c.json", {
            "theta": np.pi / 2, "u_jp": "simulated", "gamma": 0.05, "compare_naive": True,
            "pulses": pulse_files})
        assert main(["--config", cfg, "--out", str(tmp_path), "zz"]) in (0, 1)
        summary = json.loads((tmp_path / "zz_summary.json").read_text())
        assert summary["naive_to_robust_ratio"] > 10

import hashlib
import json
import os

import pytest

from wavecap.cli import main

from conftest import MINI_CFG_TEXT, TINY_CFG_TEXT


@pytest.fixture()
def tiny_cfg(tmp_path):
    path = tmp_path / "tiny.cfg"
    path.write_text(TINY_CFG_TEXT)
    return str(path)


@pytest.fixture()
def mini_cfg(tmp_path):
    path = tmp_path / "mini.cfg"
    path.write_text(MINI_CFG_TEXT)
    return str(path)


def _sha(path):
    return hashlib.sha256(open(path, "rb").read()).hexdigest()


class TestRun:
    def test_full_pipeline_outputs(self, tiny_cfg, tmp_path, capsys):
        out = str(tmp_path / "out")
        assert main(["run", "--config", tiny_cfg, "--out", out]) == 0
        names = set(os.listdir(out))
        assert {"weights.csv", "trials_current_jump.csv", "summary.json",
                "claims.json", "manifest.json"} <= names
        manifest = json.load(open(os.path.join(out, "manifest.json")))
        for name, digest in manifest["files"].items():
            assert _sha(os.path.join(out, name)) == digest
        assert "claims" in capsys.readouterr().out.lower() or True

    def test_byte_identical_reruns(self, tiny_cfg, tmp_path):
        out1, out2 = str(tmp_path / "a"), str(tmp_path / "b")
        assert main(["run", "--config", tiny_cfg, "--out", out1]) == 0
        assert main(["run", "--config", tiny_cfg, "--out", out2]) == 0
        for name in sorted(os.listdir(out1)):
            if name == "manifest.json":
                m1 = json.load(open(os.path.join(out1, name)))
                m2 = json.load(open(os.path.join(out2, name)))
                m1.pop("phase_wall_seconds"), m2.pop("phase_wall_seconds")
                assert m1 == m2
            else:
                assert _sha(os.path.join(out1, name)) == \
                    _sha(os.path.join(out2, name)), name

    def test_seed_override_changes_trials_not_weights(self, tiny_cfg, tmp_path):
        out1, out2 = str(tmp_path / "a"), str(tmp_path / "b")
        assert main(["run", "--config", tiny_cfg, "--out", out1]) == 0
        assert main(["run", "--config", tiny_cfg, "--out", out2,
                     "--seed", "99"]) == 0
        assert _sha(os.path.join(out1, "weights.csv")) == \
            _sha(os.path.join(out2, "weights.csv"))
        assert _sha(os.path.join(out1, "trials_current_jump.csv")) != \
            _sha(os.path.join(out2, "trials_current_jump.csv"))

    def test_plots_emitted_when_enabled(self, tmp_path):
        cfg = tmp_path / "plots.cfg"
        cfg.write_text(TINY_CFG_TEXT.replace("plots = false", "plots = true"))
        out = str(tmp_path / "out")
        assert main(["run", "--config", str(cfg), "--out", out]) == 0
        assert "weights.svg" in os.listdir(out)
        svg = open(os.path.join(out, "weights.svg")).read()
        assert svg.startswith("<svg") and "polyline" in svg


class TestExitCodes:
    def test_validation_error_exit_1(self, tmp_path, capsys):
        cfg = tmp_path / "bad.cfg"
        cfg.write_text(TINY_CFG_TEXT.replace("n_points = 512",
                                             "n_points = 600"))
        assert main(["run", "--config", str(cfg),
                     "--out", str(tmp_path / "o")]) == 1
        assert "config error" in capsys.readouterr().err

    def test_numerics_guard_exit_2(self, tmp_path, capsys):
        # t_final short of the transit trips the completion guard
        cfg = tmp_path / "short.cfg"
        cfg.write_text(TINY_CFG_TEXT.replace("t_final = 40.0",
                                             "t_final = 16.0"))
        assert main(["run", "--config", str(cfg),
                     "--out", str(tmp_path / "o")]) == 2
        assert "guard" in capsys.readouterr().err

    def test_missing_config_exit_1(self, tmp_path):
        assert main(["run", "--config", str(tmp_path / "nope.cfg"),
                     "--out", str(tmp_path / "o")]) == 1

    def test_failed_run_leaves_no_partial_outputs(self, tmp_path):
        cfg = tmp_path / "short.cfg"
        cfg.write_text(TINY_CFG_TEXT.replace("t_final = 40.0",
                                             "t_final = 16.0"))
        out = tmp_path / "o"
        assert main(["run", "--config", str(cfg), "--out", str(out)]) == 2
        assert not os.listdir(out)


class TestOtherCommands:
    def test_calibrate_emits_result(self, tmp_path, capsys):
        cfg = tmp_path / "cal.cfg"
        cfg.write_text(TINY_CFG_TEXT + "\n[calibration]\nenabled = true\n"
                                       "target = 0.9\ntolerance = 0.05\n")
        assert main(["calibrate", "--config", str(cfg),
                     "--out", str(tmp_path / "o")]) == 0
        payload = json.load(open(tmp_path / "o" / "calibration.json"))
        assert payload["achieved_capture"] >= 0.9
        assert payload["strength"] > 0

    def test_mc_on_existing_weights(self, tiny_cfg, tmp_path, capsys):
        out = str(tmp_path / "out")
        assert main(["run", "--config", tiny_cfg, "--out", out]) == 0
        weights = os.path.join(out, "weights.csv")
        assert main(["mc", "--weights", weights, "--rule", "current_jump",
                     "--trials", "200", "--seed", "5",
                     "--out", str(tmp_path / "mc")]) == 0
        trials = open(tmp_path / "mc" / "trials_current_jump.csv").read()
        assert trials.count("\n") == 202  # header comment + header + 200 rows
        assert main(["mc", "--weights", weights, "--rule", "penrose_spread",
                     "--delta-e", "0.25", "--trials", "10"]) == 0
        assert main(["mc", "--weights", weights, "--rule", "penrose_env",
                     "--tau-env", "1e-6", "--trials", "10"]) == 0

    def test_claims_only(self, tiny_cfg, tmp_path, capsys):
        out = str(tmp_path / "claims_out")
        assert main(["claims", "--config", tiny_cfg, "--out", out]) == 0
        names = set(os.listdir(out))
        assert "claims.json" in names
        assert "weights.csv" not in names
        text = capsys.readouterr().out
        assert "PASS" in text

    def test_sweep(self, tiny_cfg, tmp_path):
        out = str(tmp_path / "sweep")
        assert main(["sweep", "--config", tiny_cfg, "--key",
                     "detector.strength", "--values", "8.0,13.0",
                     "--out", out]) == 0
        payload = json.load(open(os.path.join(out, "sweep.json")))
        assert payload["key"] == "detector.strength"
        assert len(payload["runs"]) == 2
        assert payload["runs"][0]["final_capture"] != \
            payload["runs"][1]["final_capture"]
        subdirs = [d for d in os.listdir(out) if d.startswith("strength=")]
        assert len(subdirs) == 2

    def test_presets_listed(self, capsys):
        assert main(["presets"]) == 0
        text = capsys.readouterr().out
        for name in ("single_pulse", "two_pulse_contradiction", "gap_sweep"):
            assert name in text

    def test_threads_flag_reproduces_serial_trials(self, mini_cfg, tmp_path):
        out1, out2 = str(tmp_path / "s"), str(tmp_path / "p")
        assert main(["run", "--config", mini_cfg, "--out", out1]) == 0
        assert main(["run", "--config", mini_cfg, "--out", out2,
                     "--threads", "2"]) == 0
        for name in ("trials_current_jump.csv", "trials_penrose_env.csv",
                     "trials_penrose_spread.csv"):
            assert _sha(os.path.join(out1, name)) == \
                _sha(os.path.join(out2, name)), name

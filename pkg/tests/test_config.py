import pytest

import wavecap as wc
from wavecap.cli import list_presets, preset_path
from wavecap.config import load_config, parse_config, serialize_config
from wavecap.errors import ConfigError

from conftest import MINI_CFG_TEXT, TINY_CFG_TEXT

MINIMAL = """\
[grid]
n_points = 512
length = 150.0

[packet]
center = 83.0
width = 4.0
momentum = 2.0

[detector]
center = 118.0
half_width = 6.0

[scenario]
kind = single_pulse
t_final = 40.0
dt = 0.005
"""


class TestParsing:
    def test_minimal_config_fills_defaults(self):
        cfg = parse_config(MINIMAL)
        assert cfg.format_version == 1
        assert cfg.label == "run"
        assert cfg.grid.origin == 0.0
        assert cfg.scenario.detector.strength == 0.0
        assert cfg.scenario.sample_every == 1
        assert cfg.scenario.pulse_gap == 0.0
        assert not cfg.calibration.enabled
        assert cfg.trials.n_trials == 1000
        assert cfg.trials.base_seed == 0
        assert cfg.rules == ()
        assert cfg.output.directory is None

    def test_full_config_parses(self):
        cfg = parse_config(MINI_CFG_TEXT)
        assert cfg.label == "mini"
        assert cfg.scenario.kind == wc.TWO_PULSE
        assert [r.kind for r in cfg.rules] == [wc.PENROSE_ENV,
                                               wc.PENROSE_SPREAD,
                                               wc.CURRENT_JUMP]
        assert cfg.rules[0].tau_env == 1e-6

    def test_non_power_of_two_named_field(self):
        text = MINIMAL.replace("n_points = 512", "n_points = 1000")
        with pytest.raises(ConfigError, match="power of two") as err:
            parse_config(text)
        assert any("grid.n_points" in e for e in err.value.errors)

    def test_two_pulse_overlapping_detector_named(self):
        text = MINI_CFG_TEXT.replace("center = 211.0", "center = 248.0")
        with pytest.raises(ConfigError, match="scenario") as err:
            parse_config(text)
        assert any("overlaps the detector" in e for e in err.value.errors)

    def test_unknown_section_and_key(self):
        text = MINIMAL + "\n[widgets]\nfoo = 1\n"
        with pytest.raises(ConfigError, match="unknown section"):
            parse_config(text)
        text = MINIMAL.replace("[grid]", "[grid]\ncolor = red")
        with pytest.raises(ConfigError, match="grid.color"):
            parse_config(text)

    def test_malformed_number(self):
        text = MINIMAL.replace("length = 150.0", "length = long")
        with pytest.raises(ConfigError, match="grid.length"):
            parse_config(text)

    def test_missing_required_key(self):
        text = MINIMAL.replace("momentum = 2.0\n", "")
        with pytest.raises(ConfigError, match="packet.momentum"):
            parse_config(text)

    def test_multiple_errors_reported_together(self):
        text = MINIMAL.replace("length = 150.0", "length = long") \
                      .replace("momentum = 2.0\n", "")
        with pytest.raises(ConfigError) as err:
            parse_config(text)
        assert len(err.value.errors) >= 2

    def test_syntax_error_reported(self):
        with pytest.raises(ConfigError, match="syntax"):
            parse_config("n_points = 8\n")

    def test_bad_rule_section(self):
        text = MINIMAL + "\n[rule.penrose_env]\nonset_epsilon = 1e-9\n"
        with pytest.raises(ConfigError, match="rule.penrose_env"):
            parse_config(text)

    def test_unsupported_format_version(self):
        text = "[run]\nformat_version = 2\n\n" + MINIMAL
        with pytest.raises(ConfigError, match="format_version"):
            parse_config(text)

    def test_accuracy_guard_checked_at_parse(self):
        text = MINIMAL.replace("dt = 0.005", "dt = 0.05")
        with pytest.raises(ConfigError, match="scenario.dt"):
            parse_config(text)


class TestRoundTrip:
    @pytest.mark.parametrize("text", [MINIMAL, TINY_CFG_TEXT, MINI_CFG_TEXT])
    def test_parse_serialize_parse(self, text):
        cfg = parse_config(text)
        assert parse_config(serialize_config(cfg)) == cfg

    def test_presets_parse_and_round_trip(self):
        names = list_presets()
        assert {"single_pulse", "two_pulse_contradiction",
                "gap_sweep"} <= set(names)
        for name in names:
            cfg = load_config(preset_path(name))
            assert parse_config(serialize_config(cfg)) == cfg

"""Tests for config parsing, overrides and presets."""

import json

import pytest

from src.config import PRESETS, get_preset, load_config, parse_config
from src.errors import ConfigError
from src.model import EquationForm


class TestParseConfig:
    def test_lambda_alias_and_spin_normalization(self):
        config = parse_config({"N": 2, "S": "2/2", "lambda": 0.3})
        assert config.damping == 0.3
        assert config.S == "1"
        assert config.spin.twice_value == 2

    def test_defaults(self):
        config = parse_config({})
        assert config.form is EquationForm.LLG
        assert config.dt == 0.001
        assert config.scheme == "piecewise-constant"
        assert not config.stochastic

    @pytest.mark.parametrize(
        "data",
        [
            {"N": 0},
            {"S": "1/3"},
            {"S": "0"},
            {"lambda": -0.1},
            {"TW": 0.0},
            {"dt": 0.0},
            {"seed": -1},
            {"seed": 2**64},
            {"scheme": "midpoint"},
            {"N": 2, "pulse_site": 3},
            {"unknown": 1},
        ],
    )
    def test_rejects_invalid(self, data):
        with pytest.raises(ConfigError):
            parse_config(data)

    def test_system_spec(self):
        spec = parse_config({"N": 3, "S": "1/2", "J": 4, "Bz": -2, "B0x": 3.27, "t0": 10, "TW": 0.02}).system_spec()
        assert spec.n_sites == 3
        assert spec.pulse is not None
        assert spec.pulse.amplitude == 3.27
        assert spec.pulse.target_site == 1
        assert parse_config({"N": 1}).system_spec().pulse is None

    def test_overrides(self):
        config = get_preset("fig1").with_overrides(seed=5, t_end=None)
        assert config.seed == 5
        assert config.t_end == 20.0
        assert config.with_overrides() is config
        with pytest.raises(ConfigError):
            config.with_overrides(dt=-1.0)

    def test_document_uses_file_keys(self):
        document = get_preset("fig2").to_document()
        assert document["lambda"] == 0.1
        assert "damping" not in document
        assert parse_config(document) == get_preset("fig2")


class TestLoadConfig:
    def test_load_json(self, tmp_path):
        path = tmp_path / "trimer.json"
        path.write_text(json.dumps({"N": 3, "S": "1", "J": 1.0, "lambda": 0.1}))
        config = load_config(path)
        assert config.name == "trimer"
        assert config.N == 3

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError):
            load_config(tmp_path / "absent.json")

    def test_not_json(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text("N = 3")
        with pytest.raises(ConfigError):
            load_config(path)

    def test_not_an_object(self, tmp_path):
        path = tmp_path / "list.json"
        path.write_text("[1, 2]")
        with pytest.raises(ConfigError):
            load_config(path)


class TestPresets:
    def test_caption_parameters(self):
        fig1, fig2, fig3 = PRESETS["fig1"], PRESETS["fig2"], PRESETS["fig3"]
        assert (fig1.N, fig1.S, fig1.J, fig1.Bz, fig1.B0x, fig1.t0, fig1.TW, fig1.damping) == (
            1, "1", 0.0, -5.1, 3.27, 2.0, 0.02, 0.2)
        assert (fig2.N, fig2.S, fig2.J, fig2.Bz, fig2.B0x, fig2.t0, fig2.TW, fig2.damping) == (
            3, "1", 1.0, 0.1, 3.27, 10.0, 0.02, 0.1)
        assert (fig3.N, fig3.S, fig3.J, fig3.Bz, fig3.B0x, fig3.t0, fig3.TW, fig3.damping) == (
            3, "1/2", 4.0, -2.0, 3.27, 10.0, 0.02, 0.1)
        assert [p.t_end for p in (fig1, fig2, fig3)] == [20.0, 50.0, 120.0]

    def test_unknown_preset(self):
        with pytest.raises(ConfigError):
            get_preset("fig9")

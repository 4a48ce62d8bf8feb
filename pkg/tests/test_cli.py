"""Tests for the command line and the tool registry."""

import json

import pytest

from meso_dbm import cli
from meso_dbm.cli import (
    EXIT_ERROR,
    EXIT_OK,
    PHASE_COLUMNS,
    ExperimentConfig,
    discover_tools,
    emit_phase_diagram_data,
    load_config,
    main,
    parse_overrides,
    phase_rows,
)
from meso_dbm.datafiles import read_csv
from meso_dbm.errors import ConfigError


class TestRegistry:
    def test_all_modes_registered(self):
        registry = discover_tools()
        assert set(registry) == set(cli.MODES)
        for tool in registry.values():
            params = tool["spec"]["function"]["parameters"]
            assert params["additionalProperties"] is False
            assert set(params["required"]) <= set(params["properties"])

    def test_list_command(self, capsys):
        assert main(["list"]) == EXIT_OK
        specs = json.loads(capsys.readouterr().out)
        assert sorted(s["function"]["name"] for s in specs) == sorted(cli.MODES)

    def test_tool_errors_are_payloads(self):
        registry = discover_tools()
        assert "error" in registry["simulate"]["func"](n=8, alpha=1.5, gamma=0.3)
        assert "error" in registry["theory"]["func"](function="nope")


class TestConfig:
    def test_overrides_parse(self):
        out = parse_overrides(["n=256,512", "tau=0.5", "function=odd-bump", "quick=true", "x-star=0.1"])
        assert out == {"n": [256, 512], "tau": 0.5, "function": "odd-bump", "quick": True, "x_star": 0.1}

    def test_bad_override(self):
        with pytest.raises(ConfigError):
            parse_overrides(["tau"])

    def test_file_then_overrides_then_flags(self, tmp_path):
        path = tmp_path / "c.json"
        path.write_text(json.dumps({"mode": "sweep", "n": [64], "tau": 2.0, "trials": 300}))
        config = load_config(str(path), ["tau=3.0", "trials=400"], {"trials": 500, "seed": None})
        assert config.tau == 3.0 and config.trials == 500 and config.n == [64]

    def test_json_syntax_error_has_position(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text('{\n  "mode": "theory",\n  "tau": ,\n}')
        with pytest.raises(ConfigError, match=r"bad.json:3:"):
            load_config(str(path))

    @pytest.mark.parametrize(
        "data, key",
        [
            ({"mode": "sweep", "alpha": [0.5, 1.2]}, "alpha"),
            ({"mode": "sweep", "gamma": []}, "gamma"),
            ({"mode": "fit"}, "mode"),
            ({"mode": "theory", "colour": "red"}, "colour"),
        ],
    )
    def test_validation_names_key(self, data, key):
        with pytest.raises(ConfigError, match=key):
            load_config(flags=data)

    def test_simulate_single_point(self):
        with pytest.raises(ConfigError):
            load_config(flags={"mode": "simulate", "n": [64, 128]})

    def test_scalar_grid_promoted(self):
        assert ExperimentConfig(mode="sweep", n=128, alpha=0.3).n == [128]


class TestPhaseDiagram:
    cells = [
        {"alpha": 0.5, "gamma": 0.3, "n": 512, "measured_var": 0.1, "predicted_regime": "deterministic_gue",
         "predicted_var": 0.1, "exponent": 0.0, "ratio": 1.0, "ks_pvalue": 0.5, "init": "deterministic"},
        {"alpha": 0.2, "gamma": 0.6, "n": 512, "measured_var": 0.01, "predicted_regime": "deterministic_sub",
         "predicted_var": None, "exponent": 0.0, "ratio": None, "ks_pvalue": 0.4, "init": "deterministic"},
        {"alpha": 0.4, "gamma": 0.4, "n": 512, "measured_var": 0.2, "predicted_regime": "deterministic_critical",
         "predicted_var": 0.1, "exponent": 0.0, "ratio": 2.0, "ks_pvalue": 0.3, "init": "deterministic"},
        {"alpha": 0.4, "gamma": 0.5, "n": 512, "error": "boom"},
    ]

    def test_flags(self):
        assert [r["flag"] for r in phase_rows(self.cells)] == ["green", "", "red", "failed"]

    def test_csv(self, tmp_path):
        path = emit_phase_diagram_data(self.cells, tmp_path / "phase.csv")
        rows = read_csv(path)
        assert list(rows[0]) == PHASE_COLUMNS
        assert len(rows) == len(self.cells)
        assert rows[1]["predicted_var_or_exponent"] == "0"


class TestRun:
    def test_regularity_run_is_reproducible(self, tmp_path):
        args = ["regularity", "--n", "256", "--out", str(tmp_path), "--seed", "5"]
        assert main(args) == EXIT_OK
        data = (tmp_path / "regularity.json").read_bytes()
        manifest = json.loads((tmp_path / "regularity_manifest.json").read_text())
        assert manifest["status"] == "ok" and manifest["seed"] == 5
        assert manifest["version"] == "1.0.0" and manifest["wall_time"] >= 0
        assert json.loads(data)["passed"] is True

        # replay the manifest into a second directory
        replay = tmp_path / "replay"
        assert main(["regularity", "--config", str(tmp_path / "regularity_manifest.json"), "--out", str(replay)]) == EXIT_OK
        assert (replay / "regularity.json").read_bytes() == data

    def test_acceptance_subset(self, tmp_path, capsys):
        assert main(["acceptance", "--criteria", "A4", "--out", str(tmp_path)]) == EXIT_OK
        assert "PASS" in capsys.readouterr().out
        payload = json.loads((tmp_path / "acceptance.json").read_text())
        assert payload["passed"] is True and payload["criteria"][0]["seed"] is not None

    def test_failure_still_writes_manifest(self, tmp_path):
        assert main(["kernel-check", "--n", "20", "--out", str(tmp_path)]) == EXIT_ERROR
        manifest = json.loads((tmp_path / "kernel_check_manifest.json").read_text())
        assert manifest["status"] == "failed"
        assert "n <= " in manifest["error"]

    def test_invalid_config_exit(self, tmp_path):
        assert main(["sweep", "--alpha", "1.5", "--out", str(tmp_path)]) == EXIT_ERROR

    @pytest.mark.slow
    def test_theory_cauchy(self, tmp_path):
        assert main(["theory", "--function", "f_c", "--tau", "1", "--out", str(tmp_path)]) == EXIT_OK
        payload = json.loads((tmp_path / "theory.json").read_text())
        assert payload["sigma_tau_sq"] == pytest.approx(0.0625, rel=1e-6)

    @pytest.mark.slow
    def test_sweep_writes_phase_csv(self, tmp_path):
        args = ["sweep", "--n", "16", "--alpha", "0.3", "0.5", "--gamma", "0.3", "--trials", "100", "--out", str(tmp_path)]
        assert main(args) == EXIT_OK
        rows = read_csv(tmp_path / "sweep.csv")
        assert len(rows) == 2
        assert rows[0]["predicted_regime"] == "deterministic_critical"
        assert rows[1]["predicted_regime"] == "deterministic_gue"

    @pytest.mark.slow
    def test_simulate_writes_samples(self, tmp_path):
        args = ["simulate", "--n", "16", "--alpha", "0.5", "--gamma", "0.3", "--trials", "100", "--out", str(tmp_path)]
        assert main(args) == EXIT_OK
        rows = read_csv(tmp_path / "simulate.csv")
        assert len(rows) == 100 and list(rows[0]) == ["trial", "y"]
        manifest = json.loads((tmp_path / "simulate_manifest.json").read_text())
        assert manifest["summary"]["predicted_regime"] == "deterministic_gue"

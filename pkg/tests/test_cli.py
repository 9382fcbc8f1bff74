"""Tests for the experiment CLI: config validation, fits, reproducibility."""

import json

import numpy as np
import pytest
from click.testing import CliRunner

from unitcell.cli import (
    ConfigError,
    SCHEMAS,
    config_hash,
    fit_decay,
    load_config,
    main,
)


def _write_cfg(tmp_path, name, obj):
    path = tmp_path / name
    path.write_text(json.dumps(obj))
    return str(path)


_TINY_COMPRESS = {
    "experiment": "unitary-compress",
    "model": {"name": "tfim", "params": {"J": 1.0, "h": 1.0}},
    "t": 0.2,
    "depth": 1,
    "nTrain": 1,
    "nTest": 1,
    "chiTrain": 1,
    "evolve": {"chiMax": 8, "tol": 1e-6},
    "optimize": {"maxIter": 2, "evalChiMax": 8},
    "seed": 5,
}


class TestValidation:
    def test_unknown_key_rejected(self, tmp_path):
        cfg = dict(_TINY_COMPRESS, bogusKey=1)
        path = _write_cfg(tmp_path, "c.json", cfg)
        with pytest.raises(ConfigError, match="bogusKey"):
            load_config(path, "unitary-compress")

    def test_missing_required_key(self, tmp_path):
        cfg = {k: v for k, v in _TINY_COMPRESS.items() if k != "model"}
        path = _write_cfg(tmp_path, "c.json", cfg)
        with pytest.raises(ConfigError, match="model"):
            load_config(path, "unitary-compress")

    def test_wrong_type_reports_dotted_path(self, tmp_path):
        cfg = dict(_TINY_COMPRESS)
        cfg["optimize"] = {"maxIter": "many"}
        path = _write_cfg(tmp_path, "c.json", cfg)
        with pytest.raises(ConfigError, match="optimize.maxIter"):
            load_config(path, "unitary-compress")

    def test_out_of_range_value(self, tmp_path):
        cfg = dict(_TINY_COMPRESS, nTrain=0)
        path = _write_cfg(tmp_path, "c.json", cfg)
        with pytest.raises(ConfigError, match="nTrain"):
            load_config(path, "unitary-compress")

    def test_experiment_mismatch(self, tmp_path):
        cfg = {"experiment": "unitary-compress",
               "model": {"name": "tfim"}, "depths": [1, 2]}
        path = _write_cfg(tmp_path, "c.json", cfg)
        with pytest.raises(ConfigError, match="experiment"):
            load_config(path, "ground-state")

    def test_invalid_json(self, tmp_path):
        path = tmp_path / "c.json"
        path.write_text("{not json")
        with pytest.raises(ConfigError, match="JSON"):
            load_config(str(path), "unitary-compress")

    def test_defaults_filled(self, tmp_path):
        cfg = {"experiment": "unitary-compress",
               "model": {"name": "tfim"}, "t": 0.2, "depth": 1}
        path = _write_cfg(tmp_path, "c.json", cfg)
        loaded = load_config(path, "unitary-compress")
        assert loaded["nTrain"] == 4
        assert loaded["optimize"]["maxIter"] == 200
        assert loaded["model"]["params"]["h"] == 1.0

    def test_all_schemas_have_seed_and_model(self):
        for name, schema in SCHEMAS.items():
            assert "seed" in schema, name
            assert "model" in schema, name


class TestConfigHash:
    def test_deterministic_and_order_insensitive(self):
        a = {"x": 1, "y": [1, 2]}
        b = {"y": [1, 2], "x": 1}
        assert config_hash(a) == config_hash(b)
        assert len(config_hash(a)) == 16

    def test_sensitive_to_values(self):
        assert config_hash({"x": 1}) != config_hash({"x": 2})


class TestFitDecay:
    def test_recovers_synthetic_decay(self):
        series = [(L, np.exp(-0.5 * L)) for L in (2, 4, 6, 8)]
        alpha, mse = fit_decay(series, lmin=2)
        assert alpha == pytest.approx(0.5, abs=1e-12)
        assert mse < 1e-20

    def test_lmin_excludes_early_points(self):
        series = [(1, 3.0)] + [(L, np.exp(-0.5 * L)) for L in (2, 4, 6, 8)]
        alpha, mse = fit_decay(series, lmin=2)
        assert alpha == pytest.approx(0.5, abs=1e-12)

    def test_noisy_fit_reports_residual(self):
        rng = np.random.default_rng(0)
        series = [(L, np.exp(-0.3 * L + 0.1 * rng.standard_normal()))
                  for L in (2, 4, 6, 8, 10)]
        alpha, mse = fit_decay(series, lmin=2)
        assert alpha == pytest.approx(0.3, abs=0.1)
        assert mse > 0

    def test_errors(self):
        with pytest.raises(ValueError):
            fit_decay([(2, 1.0)], lmin=2)
        with pytest.raises(ValueError):
            fit_decay([(2, 1.0), (4, -1.0)], lmin=2)


class TestCliEndToEnd:
    def test_bad_config_exits_2(self, tmp_path):
        path = _write_cfg(tmp_path, "c.json", dict(_TINY_COMPRESS, bogus=1))
        runner = CliRunner()
        res = runner.invoke(main, ["unitary-compress", "--config", path,
                                   "--out", str(tmp_path / "out")])
        assert res.exit_code == 2
        assert "config error" in res.output

    def test_missing_config_file_exits_2(self, tmp_path):
        runner = CliRunner()
        res = runner.invoke(main, ["unitary-compress", "--config",
                                   str(tmp_path / "nope.json"),
                                   "--out", str(tmp_path / "out")])
        assert res.exit_code == 2

    def test_rerun_is_bit_identical(self, tmp_path):
        path = _write_cfg(tmp_path, "c.json", _TINY_COMPRESS)
        runner = CliRunner()
        outs = []
        for name in ("out1", "out2"):
            outdir = tmp_path / name
            res = runner.invoke(main, ["unitary-compress", "--config", path,
                                       "--out", str(outdir)])
            assert res.exit_code == 0, res.output
            outs.append(outdir)
        for fname in ("compress.csv", "trace.csv", "circuit.json"):
            assert (outs[0] / fname).read_bytes() == (outs[1] / fname).read_bytes()
        m1 = json.loads((outs[0] / "manifest.json").read_text())
        m2 = json.loads((outs[1] / "manifest.json").read_text())
        for key in ("configHash", "config", "trainCost", "testCost", "seed"):
            assert m1[key] == m2[key]

    def test_seed_override_recorded(self, tmp_path):
        path = _write_cfg(tmp_path, "c.json", _TINY_COMPRESS)
        runner = CliRunner()
        outdir = tmp_path / "out"
        res = runner.invoke(main, ["unitary-compress", "--config", path,
                                   "--out", str(outdir), "--seed", "11"])
        assert res.exit_code == 0, res.output
        manifest = json.loads((outdir / "manifest.json").read_text())
        assert manifest["seed"] == 11

    def test_csv_rows_carry_config_hash(self, tmp_path):
        path = _write_cfg(tmp_path, "c.json", _TINY_COMPRESS)
        runner = CliRunner()
        outdir = tmp_path / "out"
        res = runner.invoke(main, ["unitary-compress", "--config", path,
                                   "--out", str(outdir)])
        assert res.exit_code == 0, res.output
        lines = (outdir / "compress.csv").read_text().strip().splitlines()
        header = lines[0].split(",")
        assert header[-1] == "configHash"
        chash = load_config(path, "unitary-compress")
        assert lines[1].split(",")[-1] == config_hash(chash)

import json

import numpy as np
import pytest

from _support import random_trig_symbol
from lattice_pdo import cli
from lattice_pdo.lattice import LatticeBox
from lattice_pdo.sources import write_tabulated
from lattice_pdo.tasks import SCHEMA, ConfigError, ExperimentConfig, default_config, dumps_report


def run(tmp_path, *args):
    return cli.main([*args, "--out", str(tmp_path)])


def load(tmp_path, task):
    return json.loads((tmp_path / f"{task}.json").read_text())


def test_report_layout(tmp_path):
    assert run(tmp_path, "calculus") == 0
    rep = load(tmp_path, "calculus")
    assert rep["schema"] == SCHEMA
    assert rep["verdict"] == "pass" and rep["violations"] == []
    assert rep["inputs"]["lattice"] == {"n": 1, "K": [32]}
    assert set(rep["versions"]) == {"lattice_pdo", "numpy"}
    # exact remainders are reported as the string "-inf"
    assert rep["results"]["32"]["composition"]["slopes"]["2"] == "-inf"


def test_check_symbol_verdict(tmp_path):
    assert run(tmp_path, "check-symbol") == 0
    assert load(tmp_path, "check-symbol")["results"]["Lambda"]["verdict"] == "member-of-M^1"


def test_csv_output(tmp_path):
    assert run(tmp_path, "parametrix", "--csv") == 0
    kernel = np.loadtxt(tmp_path / "parametrix_K16_kernel.csv", delimiter=",")
    assert kernel.shape == (33, 66)
    assert (tmp_path / "parametrix_K32_symbol.csv").exists()


def test_seed_override_is_recorded(tmp_path):
    assert run(tmp_path, "sobolev", "--seed", "11") == 0
    assert load(tmp_path, "sobolev")["seed"] == 11


def test_contract_violation_exit_code(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"lattice": {"n": 1, "K": [16, 32]}, "symbols": ["pow(Lambda, 2)"], "params": {"m": 1}}))
    assert run(tmp_path, "check-symbol", "--config", str(cfg)) == 2
    rep = load(tmp_path, "check-symbol")
    assert rep["verdict"] == "violation" and rep["violations"]


@pytest.mark.parametrize(
    "raw",
    [
        {"task": "index"},
        {"lattice": {"n": 0}},
        {"symbols": ["k[1] +"]},
        {"symbols": [{"builtin": "nope"}]},
        {"symbols": [{"file": "/does/not/exist"}]},
        {"weight": {"kind": "standard", "m": 1}, "params": {"rho": 2.0}},
        {"weight": {"kind": "anisotropic", "m": [1, 2]}},
    ],
)
def test_config_errors_exit_one(tmp_path, raw):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps(raw))
    assert run(tmp_path, "calculus", "--config", str(cfg)) == 1


def test_unreadable_config_and_bad_usage(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert run(tmp_path, "calculus", "--config", str(bad)) == 1
    with pytest.raises(SystemExit) as exc:
        cli.main(["calculus", "--seed", "abc"])
    assert exc.value.code == 1


def test_tabulated_symbol_source(tmp_path):
    box = LatticeBox(1, 6)
    path = tmp_path / "sigma.tab"
    write_tabulated(random_trig_symbol(box, np.random.default_rng(2), degree=1), path)
    raw = {"lattice": {"n": 1, "K": [6]}, "symbols": [{"file": str(path)}], "params": {"m": 0, "N": 2}}
    cfg = ExperimentConfig.from_dict(raw, task="calculus")
    assert cfg.symbol(0, 6).box == box
    with pytest.raises(ConfigError):
        cfg.symbol(0, 8)


def test_builtin_sources_and_defaults():
    for task in ("calculus", "index"):
        cfg = ExperimentConfig.from_dict(default_config(task))
        assert cfg.task == task
    cfg = ExperimentConfig.from_dict({"symbols": [{"builtin": "running"}], "params": {"m": 1}}, task="parametrix")
    assert cfg.describe_sources() == ["Lambda + 0.5 * expi(1)"]


def test_dumps_report_is_sorted_and_finite():
    text = dumps_report({"b": float("-inf"), "a": np.float64(1.5), "c": [np.int64(2), complex(1, 2)]})
    assert json.loads(text) == {"a": 1.5, "b": "-inf", "c": [2, [1.0, 2.0]]}
    assert text.index('"a"') < text.index('"b"')

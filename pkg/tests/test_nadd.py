import json

import numpy as np
import pandas as pd
import pytest

from conftest import CONFIGS
from nadd import COMMANDS, AnalysisConfig, ConfigError, main, run, validate
from reports import jsonable

FULL2 = {"alphabet_size": 2, "full_shift": True}
GOLDEN = {"transitions": [[1, 1], [1, 0]]}
COCYCLE = {
    "kind": "cocycle",
    "dimension": 2,
    "matrices": {"0": [[2, 1], [1, 1]], "1": [[1, 1], [1, 2]]},
    "norm": "entry_sum",
}
SPIN = {"depth": 1, "values": {"0": 1.0, "1": -1.0}}
SMALL = {"k_grid": [2, 4], "n_max": 8, "horizon": 6}

CASES = {
    "seminorm": {"sft": GOLDEN, "potential": {"values": {"0": 0.0, "1": 1.0}}},
    "equivalent-potential": {"sft": FULL2, "sequence": COCYCLE, "parameters": dict(SMALL, tol=0.5)},
    "pressure": {"sft": FULL2, "potential": {"constant": 0.0}},
    "variational-check": {"sft": GOLDEN, "potential": {"constant": 0.0}},
    "gibbs-check": {"sft": FULL2, "measure": {"bernoulli": [0.5, 0.5]}, "potential": {"constant": float(np.log(0.5))}},
    "quasi-bernoulli": {"sft": FULL2, "measure": {"bernoulli": [0.3, 0.7]}, "parameters": SMALL},
    "spectrum": {"sft": FULL2, "potential": SPIN, "parameters": {"q_grid": [-1, 0, 1], "alpha_grid": [-0.5, 0, 0.5]}},
    "ldp": {"sft": FULL2, "potential": SPIN, "parameters": {"x_grid": [-1, 0, 1]}},
    "additivity": {"sft": FULL2, "sequence": COCYCLE, "parameters": SMALL},
    "variation": {"sft": FULL2, "sequence": COCYCLE, "parameters": SMALL},
}


def write_config(tmp_path, data, name="config.json"):
    path = tmp_path / name
    path.write_text(json.dumps(data))
    return path


def run_cli(tmp_path, command, data, *extra):
    config = write_config(tmp_path, data)
    out = tmp_path / "out"
    code = main([command, "--config", str(config), "--out", str(out), *extra])
    report_file = out / f"{command}.report.json"
    report = json.loads(report_file.read_text()) if report_file.exists() else None
    return code, report, out


@pytest.mark.parametrize("command", COMMANDS)
def test_every_command_end_to_end(tmp_path, command):
    code, report, out = run_cli(tmp_path, command, CASES[command])
    assert code == 0
    assert report["command"] == command
    assert report["verdict"] != "fails"
    assert report["provenance"]["cap"] == report["config"]["parameters"]["cap"]
    for table in report["tables"]:
        assert (out / f"{command}.{table}.csv").exists()


def test_pressure_of_full_shift(tmp_path):
    _, report, _ = run_cli(tmp_path, "pressure", CASES["pressure"])
    assert report["results"]["additive"] == pytest.approx(np.log(2), abs=1e-10)


def test_cocycle_pressure_warns_and_encloses(tmp_path):
    data = {"sft": FULL2, "sequence": COCYCLE, "parameters": {"n_max": 12}}
    code, report, out = run_cli(tmp_path, "pressure", data)
    assert code == 0
    enclosure = report["results"]["sequence"]["enclosure"]
    assert enclosure["lower"] <= np.log(5) <= enclosure["upper"]
    assert "limsup estimated at finite horizon" in report["warnings"]
    assert len(pd.read_csv(out / "pressure.partition.csv")) == 12


def test_equivalent_potential_certificate(tmp_path):
    _, report, out = run_cli(tmp_path, "equivalent-potential", CASES["equivalent-potential"])
    cert = report["results"]["certificate"]
    assert cert["version"] == "cert_v1"
    assert len(cert["cauchy_table"]) == 2
    assert cert["tail_bound"] <= 0.5
    trace = pd.read_csv(out / "equivalent-potential.defect_trace.csv")
    assert list(trace.columns) == ["n", "delta"]


def test_gibbs_check_on_bernoulli(tmp_path):
    code, report, out = run_cli(tmp_path, "gibbs-check", CASES["gibbs-check"])
    assert code == 0
    assert report["verdict"] == "gibbs_evidence"
    table = pd.read_csv(out / "gibbs-check.gibbs.csv")
    assert np.allclose(table["K_n"], 1.0, atol=1e-9)
    assert "limsup estimated at finite horizon" in report["warnings"]


def test_gibbs_check_from_measure_certificate(tmp_path):
    data = {"sft": FULL2, "measure": {"bernoulli": [0.5, 0.5]}, "parameters": SMALL}
    code, report, _ = run_cli(tmp_path, "gibbs-check", data)
    assert code == 0
    assert report["verdict"] == "gibbs_evidence"


def test_fails_verdict_exits_with_two(tmp_path):
    data = {"sft": FULL2, "measure": {"bernoulli": [1.0, 0.0]}, "potential": {"constant": 0.0}}
    code, report, _ = run_cli(tmp_path, "gibbs-check", data)
    assert code == 2
    assert report["verdict"] == "fails"
    assert report["results"]["witness"] == "1"


def test_spectrum_tables(tmp_path):
    _, report, out = run_cli(tmp_path, "spectrum", CASES["spectrum"])
    spectrum = pd.read_csv(out / "spectrum.spectrum.csv")
    assert list(spectrum.columns[:3]) == ["alpha", "E", "band"]
    curve = pd.read_csv(out / "spectrum.pressure_curve.csv")
    assert list(curve.columns) == ["q", "P", "dP"]
    assert report["results"]["peak"] == pytest.approx(np.log(2), abs=1e-6)


def test_ldp_table(tmp_path):
    _, report, out = run_cli(tmp_path, "ldp", CASES["ldp"])
    rate = pd.read_csv(out / "ldp.rate.csv")
    assert list(rate.columns[:2]) == ["x", "I"]
    assert rate["I"].iloc[1] <= 1e-8
    assert rate["I"].iloc[0] == pytest.approx(np.log(2), abs=1e-6)


def test_reports_are_deterministic(tmp_path):
    config = write_config(tmp_path, CASES["equivalent-potential"])
    cfg = AnalysisConfig.from_file(config)
    first = run(cfg, "equivalent-potential", tmp_path / "a")
    second = run(AnalysisConfig.from_file(config), "equivalent-potential", tmp_path / "b")
    assert json.dumps(first.payload()) == json.dumps(second.payload())
    assert "provenance" not in first.payload()


def test_config_echo_is_explicit(tmp_path):
    _, report, _ = run_cli(tmp_path, "seminorm", CASES["seminorm"], "--tol", "1e-6", "--cap", "100000")
    parameters = report["config"]["parameters"]
    assert parameters["cap"] == 100000
    assert parameters["tol"] == 1e-6
    assert parameters["n_max"] == 16


def test_cap_exceeded_exits_with_one(tmp_path):
    code, report, _ = run_cli(tmp_path, "seminorm", CASES["seminorm"], "--cap", "2")
    assert code == 1
    assert report is None


def test_missing_component_exits_with_one(tmp_path):
    code, _, _ = run_cli(tmp_path, "additivity", CASES["pressure"])
    assert code == 1


def test_validate_well_formed(tmp_path):
    assert validate(write_config(tmp_path, CASES["equivalent-potential"])) == []


def test_validate_non_primitive(tmp_path):
    diagnostics = validate(write_config(tmp_path, {"sft": {"transitions": [[1, 0], [0, 1]]}}))
    assert len(diagnostics) == 1
    assert "primitive" in diagnostics[0]


def test_validate_zero_cocycle_entry(tmp_path):
    sequence = dict(COCYCLE, matrices={"0": [[2, 0], [1, 1]], "1": [[1, 1], [1, 2]]})
    diagnostics = validate(write_config(tmp_path, {"sft": FULL2, "sequence": sequence}))
    assert len(diagnostics) == 1
    assert "strictly positive" in diagnostics[0]


def test_validate_names_schema_path(tmp_path):
    diagnostics = validate(write_config(tmp_path, {"sft": FULL2, "parameters": {"n_max": 0}}))
    assert diagnostics
    assert diagnostics[0].startswith("parameters/n_max")
    with pytest.raises(ConfigError) as excinfo:
        AnalysisConfig.from_dict({"sft": FULL2, "parameters": {"n_max": 0}})
    assert excinfo.value.diagnostics == diagnostics


def test_validate_rejects_unknown_top_level_keys(tmp_path):
    diagnostics = validate(write_config(tmp_path, {"sft": FULL2, "seed": 7}))
    assert len(diagnostics) == 1
    assert diagnostics[0].startswith("<root>")
    assert "seed" in diagnostics[0]


def test_validate_command(tmp_path, capsys):
    config = write_config(tmp_path, {"sft": {"transitions": [[1, 0], [0, 1]]}})
    assert main(["validate", "--config", str(config)]) == 1
    assert "primitive" in capsys.readouterr().out
    assert main(["validate", "--config", str(tmp_path / "missing.json")]) == 1


@pytest.mark.parametrize("config", sorted(CONFIGS.glob("*.json")), ids=lambda p: p.stem)
def test_shipped_configs_validate(config):
    assert validate(config) == []


def test_jsonable_encodes_non_finite():
    assert jsonable({"a": np.float64(np.inf), "b": [np.int64(3), -np.inf], "c": np.array([0.5])}) == {
        "a": "inf",
        "b": [3, "-inf"],
        "c": [0.5],
    }

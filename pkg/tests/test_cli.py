import json
import subprocess
import sys

import pytest

from niederer import cli
from niederer.errors import ConfigError
from niederer.report import Check, Report, SuiteConfig, run_suite

FAST = ["--override", "group.cases=50", "--override", "group.coset_cases=10"]


def run(args):
    return subprocess.run([sys.executable, "-m", "niederer.cli", *args], capture_output=True, text=True)


def test_group_suite_passes_end_to_end(tmp_path):
    out = tmp_path / "report.json"
    proc = run(["--suite", "group", "--seed", "42", "--out", str(out), *FAST])
    assert proc.returncode == 0, proc.stderr
    rep = json.loads(out.read_text())
    names = {c["name"] for c in rep["checks"]}
    assert {"group.associativity", "group.homomorphism", "group.sigma_squared_parity"} <= names
    assert rep["pass"] and rep["suite"] == "group" and rep["seed"] == 42


def test_unknown_suite_exit_two():
    assert run(["--suite", "nonsense"]).returncode == 2


def test_bad_flag_exit_two():
    assert run(["--no-such-flag"]).returncode == 2


def test_failing_check_exit_one(tmp_path):
    proc = run(["--suite", "group", *FAST, "--override", "tol.group.associativity=1e-30",
                "--out", str(tmp_path / "r.json")])
    assert proc.returncode == 1


def test_bad_config_file_exit_two(tmp_path):
    cfg = tmp_path / "bad.json"
    cfg.write_text("{not json")
    assert cli.main(["--config", str(cfg)]) == 2
    cfg.write_text(json.dumps({"tolerances": {"group.associativity": -1}}))
    assert cli.main(["--config", str(cfg)]) == 2
    cfg.write_text(json.dumps({"mystery": 1}))
    assert cli.main(["--config", str(cfg)]) == 2


def test_config_file_and_overrides(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"suite": "group", "seed": 3, "params": {"group.cases": 20}}))
    args = cli.build_parser().parse_args(["--config", str(cfg), "--seed", "5", "--override", "group.coset_cases=7"])
    c = cli.make_config(args)
    assert (c.suite, c.seed, c.params["group.cases"], c.params["group.coset_cases"]) == ("group", 5, 20, 7)


@pytest.mark.parametrize("override", ["tol.nope=1", "group.cases=abc", "dim=4", "seed=1.5", "justtext"])
def test_invalid_overrides(override):
    with pytest.raises(ConfigError):
        SuiteConfig().with_overrides([override])


def test_reports_byte_identical_modulo_wall_time(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for p in (a, b):
        assert cli.main(["--suite", "group", "--seed", "11", "--quiet", "--out", str(p), *FAST]) == 0
    strip = lambda p: "\n".join(l for l in p.read_text().splitlines() if '"wall_time"' not in l)
    assert strip(a) == strip(b)


def test_different_seeds_differ():
    cfg = SuiteConfig(suite="group", params={**SuiteConfig().params, "group.cases": 20, "group.coset_cases": 5})
    r1 = run_suite(cfg).to_json(timing=False)
    cfg.seed = 43
    assert run_suite(cfg).to_json(timing=False) != r1


def test_report_schema_and_order():
    rep = Report("x", 1, [Check("b", 0.5, 1.0, "DERIVED"), Check("a", 2.0, 1.0, "PAPER")], 1.25)
    d = json.loads(rep.to_json())
    assert [c["name"] for c in d["checks"]] == ["a", "b"]
    assert d["pass"] is False and d["wall_time"] == 1.25
    assert set(d["checks"][0]) >= {"name", "residual", "tol", "pass", "provenance"}


def test_check_semantics():
    assert Check("x", 0.5, 0.1, "DERIVED", expect="above").passed
    assert not Check("x", 0.05, 0.1, "DERIVED", expect="above").passed
    assert Check("x", 5.0, 0.1, "DERIVED", expect="report").passed
    assert not Check("x", float("nan"), 0.1, "DERIVED").passed
    assert Check("x", float("inf"), 0.1, "DERIVED").as_dict()["residual"] is None


def test_fluid_negative_control_flagged(tmp_path):
    out = tmp_path / "fluid.json"
    code = cli.main(["--suite", "fluid", "--override", "fluid.gamma0=1.4", "--quiet", "--out", str(out)])
    rep = json.loads(out.read_text())
    dual = next(c for c in rep["checks"] if c["name"] == "fluid.duality")
    assert code == 1 and not dual["pass"] and dual["expected_fail"]


def test_csv_artifacts(tmp_path):
    code = cli.main(["--suite", "fluid", "--quiet", "--out", str(tmp_path / "r.json"),
                     "--csv-dir", str(tmp_path / "csv")])
    assert code == 0
    assert (tmp_path / "csv" / "fluid_state.csv").exists()

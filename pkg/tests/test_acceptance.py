"""Acceptance gate: one test per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v``; the verdict lines are written
straight to the terminal regardless of output capture.
"""
import json
import subprocess
import sys

import pytest

from niederer.report import SuiteConfig, run_suite


@pytest.fixture(scope="module")
def suites():
    cache = {}

    def get(name):
        if name not in cache:
            cache[name] = {c.name: c for c in run_suite(SuiteConfig(suite=name, seed=42)).checks}
        return cache[name]

    return get


def verdict(capsys, number, title, checks):
    ok = all(c.passed for c in checks)
    worst = ", ".join(f"{c.name}={c.residual:.2e}" for c in checks if not c.passed) or "all within tolerance"
    with capsys.disabled():
        print(f"\n[{'PASS' if ok else 'FAIL'}] criterion {number}: {title} ({len(checks)} checks; {worst})")
    assert ok, worst


def pick(records, *prefixes):
    out = [c for name, c in sorted(records.items()) if name.startswith(prefixes)]
    assert out, prefixes
    return out


def test_criterion_1_group_structure(suites, capsys):
    g = suites("group")
    verdict(capsys, 1, "group axioms, homomorphism, parity and coset fourth power", pick(
        g, "group.associativity", "group.identity", "group.inverse", "group.homomorphism",
        "group.sigma_squared_parity", "group.coset_square", "group.coset_fourth_power"))


def test_criterion_2_schwarzian(suites, capsys):
    verdict(capsys, 2, "Schwarzian certificate", pick(suites("group"), "group.schwarzian"))


def test_criterion_3_conservation(suites, capsys):
    c = suites("charges")
    checks = pick(c, "charges.free_analytic_drift", "charges.cm_drift", "charges.rk4_order")
    # one dimension carries no rotation charge, so the CM run covers the five remaining families
    assert {x.name for x in checks if x.name.startswith("charges.cm_drift")} == {
        f"charges.cm_drift[{q}]" for q in ("H", "D", "A", "P", "K")}
    verdict(capsys, 3, "free and Calogero-Moser charge conservation, RK4 order", checks)


def test_criterion_4_invariance(suites, capsys):
    verdict(capsys, 4, "invariance of free/CM solutions and non-group residual floors", pick(
        suites("dynamics"), "dynamics.free_invariance", "dynamics.cm_invariance_order",
        "dynamics.rotating_frame_floor", "dynamics.quadratic_time_floor"))


def test_criterion_5_operator_algebra(suites, capsys):
    q = suites("quantum")
    checks = pick(q, "quantum.commutator[", "quantum.weyl")
    assert len([c for c in checks if c.name.startswith("quantum.commutator[")]) == 15
    verdict(capsys, 5, "commutator table incl. central extension, Weyl phase", checks)


def test_criterion_6_schroedinger_covariance(suites, capsys):
    verdict(capsys, 6, "Schroedinger covariance and refinement gain", pick(
        suites("quantum"), "quantum.covariance"))


def test_criterion_7_fluid_duality(suites, capsys):
    verdict(capsys, 7, "explosion-implosion duality, order, negative control", pick(
        suites("fluid"), "fluid.duality", "fluid.negative_control_floor"))


def _cli(*args):
    return subprocess.run([sys.executable, "-m", "niederer.cli", "--quiet", *args],
                          capture_output=True, text=True)


def test_criterion_8_reproducibility(tmp_path, capsys):
    from niederer.report import Check

    a, b = tmp_path / "a.json", tmp_path / "b.json"
    codes = [_cli("--suite", "group", "--seed", "42", "--out", str(p)).returncode for p in (a, b)]
    strip = lambda p: "\n".join(l for l in p.read_text().splitlines() if '"wall_time"' not in l)
    identical = strip(a) == strip(b)
    failing = _cli("--suite", "group", "--override", "tol.group.associativity=1e-30",
                   "--out", str(tmp_path / "f.json")).returncode
    usage = _cli("--suite", "bogus").returncode
    rep = json.loads(a.read_text())
    checks = [
        Check("identical_reports", 0.0 if identical else 1.0, 0.5, "TRIVIAL"),
        Check("exit_pass", abs(codes[0]) + abs(codes[1]), 0.5, "TRIVIAL"),
        Check("exit_fail", abs(failing - 1), 0.5, "TRIVIAL"),
        Check("exit_usage", abs(usage - 2), 0.5, "TRIVIAL"),
        Check("report_pass_flag", 0.0 if rep["pass"] else 1.0, 0.5, "TRIVIAL"),
    ]
    verdict(capsys, 8, "byte-identical reports and exit-code contract", checks)

from __future__ import annotations

import json
import subprocess
import sys

import pytest

from kolbif.cli import EXIT_USAGE, main


def run(*args):
    return main(list(args))


def test_analyze_case_VII(capsys, tmp_path):
    assert run("analyze", "--case-params", "VII", "--out", str(tmp_path)) == 0
    data = json.loads(capsys.readouterr().out)
    assert data["case"] == "VII"
    chain = data["slope_chain"]
    assert [k for k, _ in chain] == ["T1", "C1", "H", "C2", "T2"]
    assert [m for _, m in chain] == pytest.approx([-2, -1.85355, -1.5, -1.14645, -1], abs=1e-5)
    assert (tmp_path / "analysis.json").exists()


def test_analyze_canonical_triple_via_overrides(capsys, tmp_path):
    code = run(
        "analyze", "--out", str(tmp_path), "--format", "json",
        "--set", "coefficients.theta=1", "--set", "coefficients.gamma=-1", "--set", "coefficients.delta=-2",
    )
    assert code == 0
    assert json.loads(capsys.readouterr().out)["case"] == "VII"


def test_analyze_reports_d_when_a_is_zero(capsys, tmp_path):
    assert run("analyze", "--case-params", "Va", "--out", str(tmp_path)) == 0
    data = json.loads(capsys.readouterr().out)
    assert data["quadratic_form"]["a"] == 0.0
    assert data["cubic_d"] < 0


def test_exit_3_for_degenerate(tmp_path):
    args = ["--set", "coefficients.theta=1", "--set", "coefficients.gamma=-1", "--set", "coefficients.delta=-1"]
    assert run("analyze", "--out", str(tmp_path), *args) == 3


def test_exit_2_for_positive_product(tmp_path):
    ini = tmp_path / "raw.ini"
    ini.write_text("[raw]\np11=1\np12=1\np13=0\np21=0\np22=2\np23=0\ns1=0\ns2=0\n", encoding="utf-8")
    assert run("analyze", "--config", str(ini), "--out", str(tmp_path)) == 2


def test_exit_4_for_unsupported(tmp_path):
    args = [f"--set=coefficients.{k}=0" for k in "MNSP"]
    assert run("analyze", "--case-params", "Va", "--out", str(tmp_path), *args) == 4


def test_usage_errors_do_not_use_exit_2(tmp_path):
    with pytest.raises(SystemExit) as err:
        run("bogus")
    assert err.value.code == EXIT_USAGE
    assert run("analyze", "--out", str(tmp_path)) == EXIT_USAGE


def test_diagram_files_and_determinism(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert run("diagram", "--case-params", "I", "--out", str(a)) == 0
    assert run("diagram", "--case-params", "I", "--out", str(b)) == 0
    for name in ("diagram.json", "regions.csv", "diagram.svg"):
        assert (a / name).read_bytes() == (b / name).read_bytes()
    data = json.loads((a / "diagram.json").read_text())
    assert data["table_check"]["passed"]
    assert [r["index"] for r in data["regions"]] == [2, 1, 6, 5, 4, 3]


def test_curves_formats(tmp_path):
    assert run("curves", "--case-params", "VII", "--out", str(tmp_path), "--format", "csv") == 0
    assert (tmp_path / "curves.csv").read_text().splitlines()[0] == "kind,s,mu1,mu2"
    assert not (tmp_path / "curves.svg").exists()


def test_portrait_needs_mu(tmp_path):
    assert run("portrait", "--case-params", "I", "--out", str(tmp_path)) == EXIT_USAGE


def test_portrait_with_hopf(tmp_path):
    code = run("portrait", "--case-params", "VII", "--mu", "0.05,-0.0746", "--hopf", "--seeds", "2", "--out", str(tmp_path))
    assert code == 0
    data = json.loads((tmp_path / "portrait.json").read_text())
    assert data["hopf"]["l1"] < 0
    assert data["hopf"]["cycle"]["found"]
    assert (tmp_path / "portrait.svg").exists() and (tmp_path / "orbits.csv").exists()


@pytest.mark.slow
def test_verify_command_passes_within_budget(tmp_path):
    import time

    t0 = time.perf_counter()
    proc = subprocess.run(
        [sys.executable, "-m", "kolbif.cli", "verify", "--out", str(tmp_path)],
        capture_output=True,
        text=True,
    )
    elapsed = time.perf_counter() - t0
    assert proc.returncode == 0, proc.stdout + proc.stderr
    assert elapsed < 300
    data = json.loads((tmp_path / "verify.json").read_text())
    assert data["passed"] and len(data["checks"]) == 9
    assert proc.stdout.count("PASS") == 9

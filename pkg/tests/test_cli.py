import csv
import io
import json
import subprocess
import sys

import pytest

from bregproj import __version__
from bregproj.cli import main

HILBERT = '{"kind":"gauge","gauge":{"kind":"power","alpha":1,"beta":0.5}}'
PLANE = '{"kind":"vector","n":2,"norm":{"family":"p","p":2}}'


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_div_hilbert_example(capsys):
    code, out, _ = run(capsys, "div", "--potential", HILBERT, "--space", PLANE,
                       "--x", "1,0", "--y", "0,1")
    rep = json.loads(out)
    assert code == 0 and rep["value"] == 1.0
    assert rep["version"] == __version__
    assert rep["problem"]["resolved_space"]["norm"]["family"] == "p_norm"
    assert rep["problem"]["x"] == [1.0, 0.0]


def test_div_of_a_point_with_itself(capsys):
    code, out, _ = run(capsys, "div", "--potential", HILBERT, "--space", PLANE,
                       "--x", "1,0", "--y", "1,0")
    assert code == 0 and json.loads(out)["value"] == 0.0


def test_div_kl_example_and_identities(capsys):
    code, out, _ = run(capsys, "div", "--potential", '{"kind":"kl"}', "--x", "1,2", "--y", "2,1",
                       "--identities", "--z", "0.5,1", "--w", "3,1")
    rep = json.loads(out)
    assert code == 0 and rep["value"] == pytest.approx(0.693147, abs=1e-6)
    assert max(rep["identity_residuals"].values()) < 1e-8


def test_div_accepts_json_matrices(capsys):
    code, out, _ = run(capsys, "div", "--potential", '{"kind":"kl"}',
                       "--space", '{"kind":"matrix","n":2}',
                       "--x", "[[1,0],[0,2]]", "--y", "[[2,0],[0,1]]")
    assert code == 0 and json.loads(out)["value"] == pytest.approx(0.693147, abs=1e-6)


def test_numbers_have_twelve_significant_digits(capsys):
    _, out, _ = run(capsys, "div", "--potential", '{"kind":"kl"}', "--x", "1,2", "--y", "2,1")
    assert '"value": 0.69314718056,' in out


def test_project_kl_simplex_example(capsys):
    code, out, _ = run(capsys, "project", "--potential", '{"kind":"kl"}',
                       "--set", '{"kind":"simplex","s":1}', "--y", "2,2",
                       "--verify-pythagorean", "100")
    rep = json.loads(out)
    assert code == 0
    assert rep["result"]["point"] == [0.5, 0.5]
    assert rep["result"]["variational_residual"] <= 1e-8
    assert rep["pythagorean"]["passed"] and rep["pythagorean"]["probes"] == 100


def test_project_member_point(capsys):
    code, out, _ = run(capsys, "project", "--potential", '{"kind":"kl"}',
                       "--set", '{"kind":"simplex"}', "--y", "0.25,0.75")
    res = json.loads(out)["result"]
    assert code == 0 and res["point"] == [0.25, 0.75] and res["iterations"] == 0


def test_right_projection_with_dual_hyperplane(capsys):
    code, out, _ = run(capsys, "project", "--side", "right", "--potential", '{"kind":"kl"}',
                       "--set", '{"kind":"hyperplane","a":[1,1],"b":0.5,"coordinates":"dual"}',
                       "--y", "1,2", "--verify-pythagorean", "50")
    rep = json.loads(out)
    assert code == 0 and rep["pythagorean"]["equality_expected"]
    assert rep["pythagorean"]["max_abs_residual"] <= 1e-6


def test_reruns_are_byte_identical(capsys):
    argv = ["project", "--potential", '{"kind":"burg"}', "--set",
            '{"kind":"halfspace","a":[1,2],"b":1}', "--y", "1,1", "--verify-pythagorean", "30",
            "--seed", "4"]
    _, a, _ = run(capsys, *argv)
    _, b, _ = run(capsys, *argv)
    assert a == b


def test_csv_and_out_file(capsys, tmp_path):
    target = tmp_path / "rep.csv"
    code, out, _ = run(capsys, "div", "--potential", '{"kind":"kl"}', "--x", "1,2", "--y", "2,1",
                       "--format", "csv", "--out", str(target))
    assert code == 0 and out == ""
    rows = dict(csv.reader(io.StringIO(target.read_text())))
    assert float(rows["value"]) == pytest.approx(0.693147, abs=1e-6)
    assert rows["version"] == __version__


def test_prox_resolve_iterate_certify_measure(capsys):
    code, out, _ = run(capsys, "prox", "--potential", '{"kind":"kl"}', "--f", '{"kind":"kl"}',
                       "--lam", "2", "--y", "1,8")
    assert code == 0 and json.loads(out)["point"] == pytest.approx([1.0, 4.0], abs=1e-10)
    code, out, _ = run(capsys, "resolve", "--potential", HILBERT, "--space", PLANE,
                       "--operator", '{"kind":"linear","M":[[1,0],[0,3]]}', "--x", "2,4")
    assert code == 0 and json.loads(out)["point"] == pytest.approx([1.0, 1.0], abs=1e-12)
    code, out, _ = run(capsys, "iterate", "--potential", HILBERT, "--space", PLANE,
                       "--sets", '[{"kind":"halfspace","a":[1,0],"b":0},'
                                 '{"kind":"halfspace","a":[1,1],"b":0.5}]',
                       "--mode", "dykstra_hilbert", "--y", "2,3", "--format", "csv")
    last = out.strip().splitlines()[-1].split(",")
    assert code == 0 and float(last[1]) == pytest.approx(-0.25) and float(last[2]) == pytest.approx(0.75)
    code, out, _ = run(capsys, "certify", "--potential", '{"kind":"kl"}',
                       "--space", '{"kind":"vector","n":3}',
                       "--set", '{"kind":"hyperplane","a":[1,1,1],"b":1}', "--samples", "30")
    assert code == 0 and json.loads(out)["report"]["left_certified"]
    code, out, _ = run(capsys, "measure", "gradient", "--potential", '{"kind":"kl"}',
                       "--space", '{"kind":"vector","n":3}', "--samples", "5")
    assert code == 0 and json.loads(out)["result"]["max_relative_error"] < 1e-6


@pytest.mark.parametrize("argv", [
    ["div", "--potential", '{"kind":"nope"}', "--x", "1", "--y", "1"],
    ["div", "--potential", "{not json", "--x", "1", "--y", "1"],
    ["div", "--potential", '{"kind":"kl"}', "--x", "1,a", "--y", "1,1"],
    ["div", "--x", "1", "--y", "1"],
    ["project", "--potential", '{"kind":"kl"}', "--y", "1,1"],
    ["frobnicate"],
    ["verify", "everything"],
])
def test_usage_errors_exit_2(capsys, argv):
    code, _, err = run(capsys, *argv)
    assert code == 2 and err


def test_infeasible_problem_exits_3(capsys):
    code, _, err = run(capsys, "project", "--potential", '{"kind":"kl"}',
                       "--set", '{"kind":"hyperplane","a":[1,1],"b":-1}', "--y", "1,1")
    assert code == 3 and "infeasible" in err


def test_verify_quasigauge(capsys):
    code, out, _ = run(capsys, "verify", "quasigauge")
    rep = json.loads(out)
    assert code == 0 and rep["passed"]
    assert rep["checks"][0]["value"] < 1e-4


def test_verify_holder_case(capsys):
    code, out, _ = run(capsys, "verify", "holder", "--case", "lp-left-beta025", "--format", "csv")
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert {r["check"] for r in rows} >= {"lp_left_ratio_drift"}
    assert all(r["passed"] == "pass" for r in rows)


def test_verify_identities_seed_7(capsys):
    code, out, _ = run(capsys, "verify", "identities", "--seed", "7")
    rep = json.loads(out)
    assert code == 0
    assert max(c["value"] for c in rep["checks"]) < 1e-8


def test_verify_reports_failed_checks_with_exit_1(capsys, monkeypatch):
    from bregproj import suites

    def failing(seed=0):
        rep = suites.SuiteReport("fake", seed)
        rep.add("always_fails", 1.0, 0.0)
        return rep

    monkeypatch.setitem(suites.SUITES, "quasigauge", failing)
    code, _, err = run(capsys, "verify", "quasigauge")
    assert code == 1 and "always_fails" in err


def test_module_entry_point_and_threads_variable():
    env = {"BREGPROJ_THREADS": "1", "PATH": ""}
    proc = subprocess.run([sys.executable, "-m", "bregproj", "div", "--potential", '{"kind":"kl"}',
                           "--x", "1,2", "--y", "2,1"], capture_output=True, text=True, env=env)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["value"] == pytest.approx(0.693147, abs=1e-6)

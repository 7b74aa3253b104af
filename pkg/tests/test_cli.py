import io
import json
import subprocess
import sys
from pathlib import Path

import pytest

from compactcoh.cli import ProblemError, parse_problem, parse_target, run

ROOT = Path(__file__).resolve().parent.parent
PROBLEMS = ROOT / "problems"
EXPECTED = sorted((PROBLEMS / "expected").glob("*.csv"))


def call(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = run([str(a) for a in argv], out, err)
    return code, out.getvalue(), err.getvalue()


@pytest.mark.parametrize("golden", EXPECTED, ids=lambda p: p.name)
def test_shipped_problems_round_trip(golden):
    stem, command = golden.stem.rsplit(".", 1)
    code, out, err = call(command, PROBLEMS / f"{stem}.json", "--format", "csv")
    assert code == 0, err
    assert out == golden.read_text()


def test_every_shipped_problem_validates_and_has_goldens():
    files = sorted(PROBLEMS.glob("*.json"))
    assert files
    for f in files:
        code, out, err = call("validate", f)
        assert code == 0, err
        assert "status: ok" in out
        assert any(g.name.startswith(f.stem + ".") for g in EXPECTED)


def test_parse_blowup():
    rd, fan, h, mode = parse_problem(PROBLEMS / "pgl3_blowup.json")
    assert (rd.name, mode) == ("A2", "regular")
    assert set(fan.maximal_cones) == {((1, 0), (1, 1)), ((0, 1), (1, 1))}
    p1 = parse_problem(PROBLEMS / "p1.json")
    assert p1.mode == "toric" and p1.rd is None and p1.fan.rank == 1


def test_mult_blowup_text():
    code, out, _ = call("mult", PROBLEMS / "pgl3_blowup.json", "--mu", "0,0", "--i", "3")
    assert code == 0
    assert "m: 2" in out
    lines = {tuple(l.split()[3:]) for l in out.splitlines()}
    assert ("s1", "0", "1") in lines and ("s2", "0", "1") in lines and ("chamber", "3", "0") in lines


def test_wonderful_flags():
    code, out, _ = call("wonderful", "--type", "A", "--rank", "1", "--lambda", "-4", "--mu", "0", "--i", "3")
    assert code == 0 and "m: 1" in out
    code, out, _ = call("wonderful", "--type", "A", "--rank", "2", "--lambda", "-3,-3", "--mu", "0,0", "--format", "json")
    body = json.loads(out)
    assert [r["m"] for r in body["rows"]][8] == 1  # H^8 = H^{dim}: the canonical-class case
    assert body["meta"]["lambda"] == [-3, -3]


def test_check_oracle_cli():
    code, out, _ = call("check-oracle", "--type", "A", "--rank", "2", "--box", "3", "--i-max", "8")
    assert code == 0
    assert "0 mismatches" in out


def test_search_cli():
    code, out, _ = call("search", "--type", "A", "--rank", "1", "--mu", "0", "--target", "3>=1", "--radius", "6", "--format", "csv")
    assert code == 0
    assert out.splitlines() == ["lambda,m3", "-6,1", "-4,1"]
    code, out, _ = call("search", "--type", "D", "--rank", "4", "--target", "5=3", "--radius", "8", "--limit", "1")
    assert code == 0 and "found: 11" in out


def test_toric_cli_all_degrees():
    code, out, _ = call("toric", PROBLEMS / "p2.json", "--mu", "-1,-1", "--all-degrees", "--format", "csv")
    assert code == 0
    assert out.splitlines() == ["i,mu1,mu2,m", "0,-1,-1,0", "1,-1,-1,0", "2,-1,-1,1"]


def test_json_output_is_valid():
    code, out, _ = call("table", PROBLEMS / "wonderful_pgl2.json", "--format", "json")
    assert code == 0
    body = json.loads(out)
    assert body["notes"] and body["columns"][0] == "i"


def test_parse_target():
    assert parse_target("10>0,11>0") == [(10, ">", 0), (11, ">", 0)]
    assert parse_target("5=3") == [(5, "=", 3)]


@pytest.mark.parametrize(
    "argv",
    [
        ["mult"],
        ["toric", str(PROBLEMS / "p1.json"), "--i", "0", "--all-degrees"],
        ["frobnicate"],
        ["search", "--type", "A", "--rank", "1", "--target", "x", "--radius", "2"],
        ["wonderful", "--type", "A", "--rank", "1", "--mu", "0", "--i", "0"],
        ["wonderful", "--type", "Q", "--rank", "1", "--lambda", "0", "--mu", "0"],
        ["mult", str(PROBLEMS / "pgl3_blowup.json"), "--mu", "0,0,0", "--i", "3"],
        ["mult", str(PROBLEMS / "p1.json"), "--mu", "0", "--i", "0"],
        ["table", str(PROBLEMS / "pgl3_blowup.json"), "--i-min", "5", "--i-max", "2"],
    ],
)
def test_usage_errors_exit_2_without_output(argv):
    code, out, err = call(*argv)
    assert code == 2
    assert out == ""
    assert err.startswith("usage error")


def write(tmp_path, text, name="p.json"):
    p = tmp_path / name
    p.write_text(text)
    return p


def test_syntax_error_is_line_anchored(tmp_path):
    p = write(tmp_path, '{\n  "mode": "toric",\n  "rank": 1,\n  "fan": [[[1]], [[-1]]],\n}\n')
    code, out, err = call("validate", p)
    assert code == 1 and out == ""
    assert f"{p}:5:" in err


@pytest.mark.parametrize(
    "body,fragment",
    [
        ({"mode": "toric", "rank": 1, "fan": [[[1]], [[-1]]], "h": [[0], [0.5]]}, "h[1][0]"),
        ({"mode": "toric", "rank": 1, "fan": [[[1]], [["1"]]], "h": [[0], [0]]}, "fan[1][0][0]"),
        ({"mode": "toric", "rank": 1, "fan": [[[1]]], "h": [[0]]}, "coverage-gap"),
        ({"mode": "toric", "rank": 1, "fan": [[[1]], [[-1]]], "h": [[0]]}, "h: expected 2 entries"),
        ({"mode": "bogus"}, "mode"),
        ({"root_system": {"series": "A", "rank": 2}, "fan": [[[2, 0], [0, 1]]], "h": [[0, 0]]}, "non-smooth"),
        (
            {"root_system": {"series": "A", "rank": 2}, "fan": [[[1, 0], [1, 1]], [[1, 1], [0, 1]]], "h": [[-5, 4], [4, -4]]},
            "discontinuous",
        ),
        ({"root_system": {"series": "A", "rank": 2}, "fan": [[[1, 0], [1, 1]]], "h": [[0, 0]]}, "coverage-gap"),
        ({"root_system": {"series": "A"}, "mode": "wonderful", "h": [[0]]}, "root_system"),
        ({"root_system": {"series": "A", "rank": 1}, "mode": "wonderful", "h": [["1/2"]]}, "non-integral"),
        ({"root_system": {"series": "A", "rank": 1}, "mode": "wonderful", "fan": [], "h": [[0]]}, "fan"),
        ({"root_system": {"series": "A", "rank": 1, "lattice": "weird"}, "mode": "wonderful", "h": [[0]]}, "lattice"),
        ([1, 2], "$"),
    ],
)
def test_validation_errors_exit_1_with_field_path(tmp_path, body, fragment):
    p = write(tmp_path, json.dumps(body))
    code, out, err = call("validate", p)
    assert code == 1, err
    assert out == ""
    assert fragment in err
    with pytest.raises(ProblemError):
        parse_problem(p)


def test_accepts_three_cone_fan_and_rational_strings(tmp_path):
    body = {
        "root_system": {"series": "A", "rank": 2},
        "fan": [[[1, 0], [2, 1]], [[2, 1], [1, 1]], [[1, 1], [0, 1]]],
        "h": [["0", "0"], ["0", "0"], ["0", "0"]],
    }
    code, _, err = call("validate", write(tmp_path, json.dumps(body)))
    assert code == 0, err


def test_custom_lattice_problem(tmp_path):
    body = {
        "root_system": {"series": "A", "rank": 1, "lattice": "simply_connected"},
        "mode": "wonderful",
        "h": [[1]],
        "query": {"mu": [1], "i": 0},
    }
    code, out, err = call("wonderful", write(tmp_path, json.dumps(body)), "--format", "csv")
    assert code == 0, err
    assert out.splitlines()[-1] == "0,1,total,,1"


def test_missing_file():
    code, _, err = call("validate", "/nonexistent/problem.json")
    assert code == 1 and "problem.json" in err


def test_console_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "compactcoh", "mult", str(PROBLEMS / "pgl3_blowup.json"), "--format", "csv"],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0
    assert proc.stdout == (PROBLEMS / "expected" / "pgl3_blowup.mult.csv").read_text()

import json
import math
import subprocess
import sys

import pytest

from zerodrag.cli import main, parse_number


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_parse_number():
    assert parse_number("pi/6") == math.pi / 6
    assert parse_number("-2*pi/10 + 1") == pytest.approx(1 - math.pi / 5)
    with pytest.raises(Exception):
        parse_number("__import__('os')")


def test_build_writes_json_and_svg(tmp_path, capsys):
    out = tmp_path / "b.json"
    code, _, _ = run(capsys, "build", "doubled", "--inner", "trapezoid-pair",
                     "--alpha", "pi/10", "--k", "2", "--out", str(out))
    assert code == 0
    data = json.loads(out.read_text())
    assert data["family"] == "doubled" and len(data["polygons"]) == 4
    assert out.with_suffix(".svg").read_text().startswith("<svg")
    code, text, _ = run(capsys, "metrics", "--profile", str(out))
    assert code == 0 and json.loads(text)["kappa"] > 0


def test_trace(tmp_path, capsys):
    code, text, _ = run(capsys, "trace", "triangle-pair", "--alpha", "pi/6",
                        "--x0", "-0.9", "--x0", "0.3", "--svg", str(tmp_path / "t.svg"))
    assert code == 0
    rows = text.splitlines()
    assert rows[1].startswith("-0.9,2,escaped") and rows[2].startswith("0.3,0,escaped")
    code, _, err = run(capsys, "trace", "trapezoid-pair", "--alpha", "pi/14", "--k", "3",
                       "--x0", "-0.95", "--max-bounces", "3")
    assert code == 1 and "bounce cap" in err


def test_metrics_output(capsys):
    code, text, _ = run(capsys, "metrics", "triangle-pair", "--alpha", "pi/6")
    m = json.loads(text)
    assert code == 0 and m["kappa"] == pytest.approx(5 / 12, abs=1e-12)


def test_verify_report(tmp_path, capsys):
    out = tmp_path / "r.json"
    code, _, _ = run(capsys, "verify", "doubled", "--inner", "triangle-pair",
                     "--alpha", "pi/6", "--checks", "d1,d3,reflections", "--n", "2000",
                     "--both-directions", "--out", str(out))
    reports = json.loads(out.read_text())
    assert code == 0 and len(reports) == 6
    assert all(r["pass"] for r in reports)
    assert {r["details"]["flow"] for r in reports} == {"down", "up"}


@pytest.mark.parametrize("argv", [
    ["verify", "triangle-pair", "--alpha", "1.0"],
    ["verify", "triangle-pair"],
    ["verify", "triangle-pair", "--alpha", "0.3", "--checks", "d9"],
    ["verify", "--profile", "/nonexistent.json"],
    ["frobnicate"],
    ["sweep", "trapezoid-pair", "--alpha-min", "0.05", "--alpha-max", "0.05",
     "--steps", "1", "--n", "50", "--max-bounces", "10"],
])
def test_configuration_errors_exit_2(argv, capsys):
    assert main(argv) == 2


def test_sweep_matches_golden(golden_dir, tmp_path, capsys):
    argv = ["sweep", "triangle-pair", "--alpha-min", "0.01", "--alpha-max", "0.75",
            "--steps", "50"]
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(argv + ["--out", str(a)]) == 0
    assert main(argv + ["--out", str(b)]) == 0
    golden = (golden_dir / "sweep_triangle_pair.csv").read_bytes()
    assert a.read_bytes() == b.read_bytes() == golden


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "zerodrag", "metrics", "cone"],
                          capture_output=True, text=True, check=True)
    assert json.loads(proc.stdout)["kappa"] == pytest.approx(1.0)

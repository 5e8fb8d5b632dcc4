import io
import json
import subprocess
import sys

import pytest

from approxlab.cli import SCENARIO_HELP, SCENARIOS, run


def invoke(*argv):
    out = io.StringIO()
    rc = run(list(argv), out)
    return rc, out.getvalue()


def test_no_arguments_is_usage_error():
    rc, text = invoke()
    assert rc == 2 and "usage" in text


def test_unknown_scenario_is_usage_error(tmp_path):
    assert invoke("nonesuch", "--out", str(tmp_path))[0] == 2


@pytest.mark.parametrize(
    "argv",
    [
        ["unimod", "--resolution", "abc"],
        ["unimod", "--resolution", "0x4"],
        ["unimod", "--tolerance", "-1"],
        ["rosenlicht", "--p", "4"],
        ["rosenlicht", "--N", "0"],
        ["example3", "--window", "0"],
        ["zariski", "--degree", "x"],
        ["hull-suite", "--window", "1"],
        ["example3", "--format", "xml"],
    ],
)
def test_bad_parameters_exit_2(argv, tmp_path, capsys):
    assert invoke(*argv, "--out", str(tmp_path))[0] == 2
    assert "error" in capsys.readouterr().err
    assert not list(tmp_path.glob("*.json"))


def test_scenario_names():
    assert set(SCENARIOS) == {"meyer", "thin", "example3", "rosenlicht", "borel-shape", "unimod", "hull-suite", "zariski"}
    assert set(SCENARIO_HELP) == set(SCENARIOS)


@pytest.mark.parametrize("name", ["example3", "borel-shape"])
def test_reports_are_byte_identical(name, tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert invoke(name, "--out", str(a))[0] == 0
    assert invoke(name, "--out", str(b))[0] == 0
    assert (a / f"{name}.json").read_bytes() == (b / f"{name}.json").read_bytes()


def test_report_contents_and_summary(tmp_path):
    rc, text = invoke("example3", "--out", str(tmp_path))
    assert rc == 0
    report = json.loads((tmp_path / "example3.json").read_text())
    assert report["scenario"] == "example3" and report["passed"] is True
    assert all(report["checks"].values())
    for name in report["checks"]:
        assert f"PASS {name}" in text
    assert text.strip().endswith("example3: all checks passed")


def test_csv_only_on_request(tmp_path):
    invoke("example3", "--out", str(tmp_path / "j"))
    assert not (tmp_path / "j" / "example3.csv").exists()
    invoke("example3", "--out", str(tmp_path / "c"), "--format", "csv")
    rows = (tmp_path / "c" / "example3.csv").read_text().splitlines()
    assert rows[0] == "translate_a,points_in_ball" and len(rows) > 1


def test_failed_check_still_writes_report(tmp_path):
    # over F_2 the pair (1/t, 0) solves the equation, so the Laurent check fails
    rc, text = invoke("rosenlicht", "--p", "2", "--N", "3", "--out", str(tmp_path))
    assert rc == 1
    report = json.loads((tmp_path / "rosenlicht.json").read_text())
    assert report["passed"] is False and report["checks"]["no Laurent solutions"] is False
    assert "FAIL no Laurent solutions" in text


def test_console_entry_point(tmp_path):
    proc = subprocess.run(
        [sys.executable, "-m", "approxlab.cli", "borel-shape", "--out", str(tmp_path)],
        capture_output=True,
        text=True,
        timeout=120,
    )
    assert proc.returncode == 0, proc.stderr
    assert (tmp_path / "borel-shape.json").exists()

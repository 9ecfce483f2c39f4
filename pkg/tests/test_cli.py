import json
import math

import pytest

from hypsurf import cli, collar
from oracles import BOLZA_SYSTOLE


def run_json(capsys, *argv):
    code = cli.run(list(argv))
    out = capsys.readouterr().out
    return code, (json.loads(out) if out.strip() else None)


def test_surface_bolza(capsys):
    code, out = run_json(capsys, "surface", "--builtin", "bolza")
    assert code == 0
    assert out["genus"] == 2 and out["sides"] == 8
    assert out["systole"] == pytest.approx(BOLZA_SYSTOLE, abs=1e-9)
    assert out["command"] == "surface" and out["seed"] == 0 and "version" in out


def test_surface_file_round_trip(tmp_path, capsys):
    path = tmp_path / "s.json"
    assert cli.run(["surface", "--builtin", "doubled_pants", "--params", "0.5,6,6", "--out", str(path)]) == 0
    first = json.loads(path.read_text())
    code, again = run_json(capsys, "surface", "--surface-file", str(path))
    assert code == 0
    assert again["systole"] == first["systole"]
    assert again["collars"] == first["collars"]


def test_inj_anchors(capsys):
    base = ["inj", "--builtin", "doubled_pants", "--params", "0.5,6,6", "--curve", "gamma1"]
    _, core = run_json(capsys, *base, "--point", "on-core")
    assert core["inj"] == pytest.approx(0.25, abs=1e-12)
    _, edge = run_json(capsys, *base, "--point", "collar-boundary")
    assert edge["inj"] <= collar.inj_from_core_distance(0.5, collar.half_width(0.5)) + 1e-12
    _, xy = run_json(capsys, "inj", "--builtin", "bolza", "--point", "0,1")
    assert xy["inj"] > math.asinh(1)


def test_loop_profile(capsys):
    code, out = run_json(capsys, "loop", "--builtin", "bolza", "--point", "0.1,1.2", "--profile", "9")
    assert code == 0
    assert len(out["profile"]) == 9
    assert out["profile"][0]["inj"] == pytest.approx(out["inj"], abs=1e-10)


def test_riera(capsys):
    code, out = run_json(capsys, "riera", "--builtin", "bolza", "--curve", "systolic", "--cutoff", "6")
    assert code == 0
    assert out["value"] >= 2 / math.pi * out["curve_length"]
    code, out = run_json(capsys, "riera", "--builtin", "bolza", "--curve", "1", "--cutoff", "6")
    assert code == 0 and out["word"] == [1]


def test_constants_csv(capsys):
    code = cli.run(["constants", "--format", "csv"])
    out = capsys.readouterr().out.splitlines()
    assert code == 0
    assert out[0].startswith("# hypsurf ") and "command=constants" in out[0]
    assert out[1].split(",")[:3] == ["id", "value", "display"]
    assert any(line.startswith("LIP_INJ,") for line in out)


def test_verify_small(capsys):
    code, out = run_json(capsys, "verify", "--suite", "pants_bound", "--trials", "20", "--seed", "3")
    assert code == 0 and out["passed"]
    assert out["suites"]["pants_bound"]["trials"] == 20


def test_verify_failure_exit_code(capsys):
    # a surface with no short curve makes the thin suite raise a domain error
    code = cli.run(["verify", "--suite", "inj_short", "--trials", "2", "--surfaces", "bolza"])
    assert code == 1
    assert "InsufficientThinPoints" in capsys.readouterr().err


@pytest.mark.parametrize("argv", [
    ["surface"],
    ["surface", "--builtin", "doubled_pants", "--params", "1,2"],
    ["inj", "--builtin", "bolza", "--point", "somewhere"],
    ["inj", "--builtin", "bolza", "--point", "on-core", "--curve", "nope"],
    ["riera", "--builtin", "bolza", "--curve", "0,7"],
    ["verify", "--suite", "nope"],
    ["verify", "--suite", "neck", "--trials", "0"],
    ["nonsense"],
])
def test_usage_errors(argv, capsys):
    assert cli.run(argv) == 2


def test_domain_error_exit_code(capsys):
    code = cli.run(["surface", "--builtin", "doubled_pants", "--params", "0,1,1"])
    assert code == 1
    assert "DegenerateLength" in capsys.readouterr().err

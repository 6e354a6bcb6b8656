import json

import pytest

from lagquant.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    return code, capsys.readouterr()


def test_weyl_commands(capsys):
    assert run(capsys, "weyl", "mul", "y1", "x1") == (0, ("x1 y1 + h\n", ""))
    code, out = run(capsys, "weyl", "bracket", "y1^2", "x1")
    assert out.out.strip() == "2 y1 h"
    code, out = run(capsys, "weyl", "sigma", "[[1,0],[0,-1]]")
    assert out.out.strip() == "x1 y1 h^-1 + 1/2"
    code, out = run(capsys, "weyl", "degree", "x1 y1 + h")
    assert out.out.strip() == "2"


def test_bad_literal_exits_2(capsys):
    code, out = run(capsys, "weyl", "mul", "y1 +", "x1")
    assert code == 2 and "wq:" in out.err


def test_module_lift_exit_codes(tmp_path, capsys):
    good, bad = tmp_path / "good.json", tmp_path / "bad.json"
    good.write_text(json.dumps({"n": 1, "f": ["2 x1 h"]}))
    bad.write_text(json.dumps({"n": 2, "f": ["x2 h", "0"]}))
    code, out = run(capsys, "module", "lift", str(good))
    assert code == 0 and json.loads(out.out)["verification"]["all_zero"]
    code, out = run(capsys, "module", "lift", str(bad))
    assert code == 3 and json.loads(out.out)["integrable"] is False


def test_star_assoc(tmp_path, capsys):
    f = tmp_path / "star.json"
    f.write_text(json.dumps({"chart": "U", "base": ["q"], "fiber": ["p"], "moyal": True, "order": 2}))
    code, out = run(capsys, "star", "assoc", str(f))
    assert code == 0 and json.loads(out.out)["associative"]


def test_cech_c1(tmp_path, capsys):
    atlas = tmp_path / "atlas.json"
    atlas.write_text(json.dumps({
        "charts": [{"name": "U0", "coordinates": ["t"]}, {"name": "U1", "coordinates": ["s"]}],
        "overlaps": [{"from": "U0", "to": "U1", "map": {"s": "t^-1"}, "invertible": ["t"]}],
    }))
    b = tmp_path / "bundle.json"
    b.write_text(json.dumps({"U0|U1": "t^-3"}))
    code, out = run(capsys, "cech", "c1", str(atlas), str(b))
    assert code == 0 and json.loads(out.out)["total"] == "-3"


@pytest.mark.parametrize("name,code", [("tA1_trivial", 0), ("tP1_Ominus1", 0), ("tP1_O0", 3)])
def test_check_exit_codes(capsys, name, code):
    got, out = run(capsys, "check", name)
    assert got == code
    assert json.loads(out.out)["name"] == name


def test_check_inconclusive_and_text(capsys):
    code, out = run(capsys, "check", "tA1_trivial", "--order", "2", "--text")
    assert code == 4 and "inconclusive" in out.out


def test_check_invalid_file(tmp_path, capsys):
    f = tmp_path / "s.json"
    f.write_text("{}")
    code, out = run(capsys, "check", str(f))
    assert code == 2 and "ambient: missing" in out.err

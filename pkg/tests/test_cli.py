import csv
import io
import json

import pytest

from dirac_lab.cli import main
from dirac_lab.potential import builtin
from dirac_lab.rootfinder import Rectangle, find_resonances

SQUARE = ["--builtin", "square:A=1,gamma=1"]


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_resonances_stdout(capsys):
    code, out, _ = run(capsys, "resonances", *SQUARE, "--region", "-30,30,-5,0")
    assert code == 0
    data = json.loads(out)
    assert len(data) == 18
    assert set(data[0]) == {"re", "im", "multiplicity", "residual"}
    assert all(d["im"] < 0 for d in data)


def test_resonances_zero_potential_is_empty(capsys):
    code, out, _ = run(capsys, "resonances", "--builtin", "square:A=0,gamma=1", "--region", "-10,10,-5,0")
    assert code == 0
    assert json.loads(out) == []


def test_resonances_files(tmp_path, capsys):
    code, _, _ = run(capsys, "resonances", *SQUARE, "--region", "-10,10,-4,0", "--out", str(tmp_path))
    assert code == 0
    rows = list(csv.DictReader(open(tmp_path / "resonances.csv")))
    js = json.loads((tmp_path / "resonances.json").read_text())
    assert len(rows) == len(js) > 0
    assert float(rows[0]["re"]) == js[0]["re"]


def test_verify_and_determinism(tmp_path, capsys):
    outs = []
    for k in range(2):
        d = tmp_path / f"run{k}"
        code, _, _ = run(capsys, "verify", *SQUARE, "--region", "-60,60,-20,0", "--out", str(d))
        assert code == 0
        outs.append({f.name: f.read_bytes() for f in sorted(d.iterdir())})
    assert outs[0] == outs[1]
    assert set(outs[0]) == {"reports.json", "resonances.json", "resonances.csv", "counting.csv", "carleson.csv"}
    reports = json.loads(outs[0]["reports.json"])
    names = {r["name"] for r in reports}
    assert {"envelope", "sum_bound", "counting_bound", "jensen", "jensen_majorant", "carleson"} <= names
    assert all(r["pass"] for r in reports)
    assert sum(r["name"] == "jensen" for r in reports) == 3


def test_verify_flags_dropped_resonance(capsys):
    code, out, err = run(capsys, "verify", *SQUARE, "--region", "-30,30,-10,0", "--jensen-r", "5", "--drop-resonance", "0")
    assert code == 5
    jensen = [r for r in json.loads(out) if r["name"] == "jensen"]
    assert not jensen[0]["pass"]
    assert "jensen" in err


def test_verify_rejects_bad_p(capsys):
    code, _, _ = run(capsys, "verify", *SQUARE, "--region", "-10,10,-5,0", "--p", "1,2")
    assert code == 2


def test_scatter_single_point(capsys):
    code, out, _ = run(capsys, "scatter", *SQUARE, "--lam", "0.5,0.5,1")
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert len(rows) == 1
    assert float(rows[0]["lam"]) == 0.5
    assert float(rows[0]["unitarity_defect"]) < 1e-12


def test_scatter_zero_potential(capsys):
    code, out, _ = run(capsys, "scatter", "--builtin", "square:A=0,gamma=1", "--lam", "-3,3,7")
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert len(rows) == 7
    for row in rows:
        assert complex(float(row["re_a"]), float(row["im_a"])) == pytest.approx(1, abs=1e-15)
        assert float(row["re_b"]) == pytest.approx(0, abs=1e-15)
        assert float(row["unitarity_defect"]) < 1e-15


def test_counting(capsys):
    code, out, _ = run(capsys, "counting", *SQUARE, "--region", "-50,50,-20,0", "--rmax", "40", "--rstep", "10")
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    # the half-disk covered by the region has radius 20
    assert [float(r["r"]) for r in rows] == [10, 20]
    for r in rows:
        assert int(r["N"]) <= float(r["bound"])


def test_potential_info_from_file(tmp_path, capsys):
    f = tmp_path / "pot.csv"
    f.write_text("h,re,im\n0.5,1,0\n0.5,0,0\n0.5,1,0\n")
    code, out, _ = run(capsys, "potential-info", "--potential", str(f))
    assert code == 0
    info = json.loads(out)
    assert info["n_cells"] == 3
    assert info["gamma"] == 1.5
    assert info["l1_norm"] == 1.0


def test_random_builtin_uses_seed(capsys):
    a = run(capsys, "potential-info", "--builtin", "random_cells:n=4,maxA=1", "--seed", "3")[1]
    b = run(capsys, "potential-info", "--builtin", "random_cells:n=4,maxA=1", "--seed", "3")[1]
    c = run(capsys, "potential-info", "--builtin", "random_cells:n=4,maxA=1", "--seed", "4")[1]
    assert a == b != c


@pytest.mark.parametrize(
    "text",
    ['{"cells": [{"h": -1, "re": 0, "im": 0}]}', "{not json", '{"cells": [{"h": 1, "re": "nan", "im": 0}]}'],
)
def test_bad_potential_exit_2(tmp_path, capsys, text):
    f = tmp_path / "bad.json"
    f.write_text(text)
    code, _, err = run(capsys, "resonances", "--potential", str(f))
    assert code == 2
    assert err


def test_bad_region_exit_2(capsys):
    assert run(capsys, "resonances", *SQUARE, "--region", "1,0,-1,0")[0] == 2


def test_depth_guard_exit_3(capsys):
    code, _, err = run(capsys, "resonances", *SQUARE, "--region", "-10,10,-60,0")
    assert code == 3
    assert "allow_deep" in err
    assert run(capsys, "resonances", *SQUARE, "--region", "-10,10,-60,-30", "--allow-deep")[0] == 0


def test_boundary_zero_exit_4(capsys):
    p = builtin("square", {"A": 1, "gamma": 1})
    z0 = find_resonances(p, Rectangle(-4, 4, -3, 0))[-1].location
    region = f"{z0.real - 1!r},{z0.real + 1!r},{z0.imag!r},0"
    code, _, err = run(capsys, "resonances", *SQUARE, "--region", region, "--jitter-tries", "0")
    assert code == 4
    assert "boundary" in err
    assert run(capsys, "resonances", *SQUARE, "--region", region)[0] == 0

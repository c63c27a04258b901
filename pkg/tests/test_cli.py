import json
import math
import re
import subprocess
import sys

import numpy as np
import pytest
from oracles import c0_grid_oracle

from qes2.cli import DEFAULT_SAMPLES, main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def polyline_points(svg):
    pts = []
    for seg in re.findall(r'points="([^"]*)"', svg):
        pts += [tuple(map(float, p.split(","))) for p in seg.split()]
    return pts


# -- classify / c0 / range ------------------------------------------------------

def test_classify_admissible(capsys):
    code, out, _ = run(capsys, "classify", "--m", "3", "--lambda", "1", "--c", "1")
    assert code == 0
    assert out == "admissible; c_range=(0.25, inf)\n"


def test_classify_below_threshold(capsys):
    code, out, _ = run(capsys, "classify", "--m", "2", "--lambda", "-3", "--c", "5")
    assert code == 2
    assert out.startswith("not admissible: CNotInRange; c_range=(8")


def test_classify_zero_m(capsys):
    code, _, err = run(capsys, "classify", "--m", "0", "--lambda", "1", "--c", "1")
    assert code == 1 and "MZero" in err


def test_classify_json(capsys):
    code, out, _ = run(capsys, "classify", "--m", "2", "--lambda", "0", "--c", "1", "--b", "0.3", "--json")
    assert code == 2
    d = json.loads(out)
    assert d["reason"] == "NonzeroB" and d["admissible"] is False
    assert d["c_range"] == {"empty": False, "lower": 0.0, "upper": None,
                            "lower_closed": False, "upper_closed": False}


@pytest.mark.parametrize("bad", ["abc", "nan", "inf", ""])
def test_malformed_numbers(capsys, bad):
    code, _, err = run(capsys, "classify", "--m", bad, "--lambda", "1", "--c", "1")
    assert code == 1 and "error" in err


def test_missing_argument_and_unknown_command(capsys):
    assert run(capsys, "classify", "--m", "1")[0] == 1
    assert run(capsys, "frobnicate")[0] == 1
    assert run(capsys)[0] == 1


def test_c0_m2(capsys):
    code, out, _ = run(capsys, "c0", "--m", "2")
    assert code == 0
    assert out == "x0=1.000000000000 xmin=1.732050807569 c0=8.000000000000\n"


def test_c0_m4_matches_oracle(capsys):
    code, out, _ = run(capsys, "c0", "--m", "4")
    assert code == 0
    vals = dict(kv.split("=") for kv in out.split())
    x0, _, c0 = c0_grid_oracle(4.0)
    assert float(vals["x0"]) == pytest.approx(math.sqrt(math.sqrt(12) - 3), abs=1e-11)
    assert float(vals["c0"]) == pytest.approx(c0, rel=1e-6)


@pytest.mark.parametrize("m", ["-1", "0"])
def test_c0_domain(capsys, m):
    assert run(capsys, "c0", "--m", m)[0] == 2


def test_range(capsys):
    assert run(capsys, "range", "--m", "-2", "--lambda", "1") == (0, "c_range=(-1, 0)\n", "")
    code, out, _ = run(capsys, "range", "--m", "-0.5", "--lambda", "-1", "--json")
    assert code == 0 and json.loads(out)["empty"] is True
    assert run(capsys, "range", "--m", "0", "--lambda", "1")[0] == 1


# -- solve / verify ------------------------------------------------------------

def test_solve_kerr(capsys, tmp_path):
    path = tmp_path / "kerr.json"
    code, out, _ = run(capsys, "solve", "--m", "2", "--lambda", "0", "--c", "1", "--out", str(path))
    assert code == 0 and "wrote" in out
    raw = path.read_bytes()
    assert b"\r" not in raw and raw.endswith(b"\n")
    doc = json.loads(raw)
    assert doc["roots"]["x2"] == pytest.approx(1.0, abs=1e-13)
    assert doc["period"] == pytest.approx(4 * math.pi, rel=1e-12)
    assert len(doc["grid"]) == 513
    assert list(doc) == sorted(doc)
    assert raw.decode() == json.dumps(doc, sort_keys=True, indent=2) + "\n"


def test_solve_is_deterministic(capsys, tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for p in (a, b):
        assert run(capsys, "solve", "--m", "3", "--lambda", "-1", "--c", "3", "--out", str(p))[0] == 0
    assert a.read_bytes() == b.read_bytes()


def test_solve_inadmissible(capsys, tmp_path):
    path = tmp_path / "x.json"
    code, out, _ = run(capsys, "solve", "--m", "2", "--lambda", "1", "--c", "0.1", "--out", str(path))
    assert code == 2
    assert json.loads(out)["reason"] == "CNotInRange"
    assert not path.exists()


def test_solve_unwritable(capsys, tmp_path):
    code, _, err = run(capsys, "solve", "--m", "2", "--lambda", "0", "--c", "1",
                       "--out", str(tmp_path / "missing" / "k.json"))
    assert code == 1 and "cannot write" in err


def test_verify_document(capsys, tmp_path):
    doc, rep = tmp_path / "s.json", tmp_path / "r.json"
    assert run(capsys, "solve", "--m", "-1", "--lambda", "1", "--c", "1", "--out", str(doc))[0] == 0
    code, out, _ = run(capsys, "verify", str(doc), "--report", str(rep))
    assert code == 0
    assert out.count("PASS") == 15 and "FAIL" not in out
    report = json.loads(rep.read_text())
    assert report["all_pass"] is True
    for chk in report["checks"].values():
        assert set(chk) == {"max_residual", "grid_size", "tolerance", "pass"}


def test_verify_detects_corrupted_period(capsys, tmp_path):
    path = tmp_path / "kerr.json"
    run(capsys, "solve", "--m", "2", "--lambda", "0", "--c", "1", "--out", str(path))
    doc = json.loads(path.read_text())
    doc["period"] *= 0.9
    path.write_text(json.dumps(doc))
    code, out, _ = run(capsys, "verify", str(path))
    assert code == 3
    assert "FAIL conical_north" in out and "FAIL conical_south" in out


def test_verify_inline(capsys):
    code, out, _ = run(capsys, "verify", "--m", "3", "--lambda", "1", "--c", "1", "--grid", "64")
    assert code == 0
    code, out, _ = run(capsys, "verify", "--m", "3", "--lambda", "1", "--c", "0.1")
    assert code == 2 and json.loads(out)["reason"] == "CNotInRange"


@pytest.mark.parametrize("content", ["not json", "[]", '{"schema_version": 1}'])
def test_verify_bad_document(capsys, tmp_path, content):
    path = tmp_path / "bad.json"
    path.write_text(content)
    assert run(capsys, "verify", str(path))[0] == 1


def test_verify_usage_errors(capsys, tmp_path):
    assert run(capsys, "verify", str(tmp_path / "nope.json"))[0] == 1
    assert run(capsys, "verify")[0] == 1
    assert run(capsys, "verify", "x.json", "--m", "2")[0] == 1
    assert run(capsys, "verify", "--m", "0", "--lambda", "1", "--c", "1")[0] == 1


def test_verify_tolerance_env(capsys, monkeypatch):
    monkeypatch.setenv("QES2_TOL", "1e-40")
    assert run(capsys, "verify", "--m", "2", "--lambda", "0", "--c", "1", "--grid", "32")[0] == 3
    monkeypatch.setenv("QES2_TOL", "bogus")
    assert run(capsys, "verify", "--m", "2", "--lambda", "0", "--c", "1")[0] == 1


# -- plot ---------------------------------------------------------------------------

def test_plot_kerr_rows(capsys, tmp_path):
    path = tmp_path / "kerr.csv"
    assert run(capsys, "plot", "--m", "2", "--lambda", "0", "--c", "1", "--csv", str(path))[0] == 0
    lines = path.read_text().splitlines()
    assert lines[0] == "x,B"
    rows = {float(x): float(b) for x, b in (ln.split(",") for ln in lines[1:])}
    assert len(rows) == DEFAULT_SAMPLES
    assert rows[0.0] == 1.0
    assert abs(rows[1.0]) < 1e-12 and abs(rows[-1.0]) < 1e-12
    assert min(rows) == -4.0 and max(rows) == 4.0


def test_plot_origin_row_is_alpha(capsys, tmp_path):
    path = tmp_path / "ref2.csv"
    run(capsys, "plot", "--m", "3", "--lambda", "-1", "--c", "3", "--csv", str(path))
    data = np.loadtxt(path, delimiter=",", skiprows=1)
    assert data[data[:, 0] == 0.0, 1][0] == pytest.approx(3.25, abs=1e-12)


def test_plot_csv_uses_17_digits(capsys):
    code, out, _ = run(capsys, "plot", "--m", "3", "--lambda", "1", "--c", "1", "--range", "0.1:0.3", "--samples", "3")
    assert code == 0
    for line in out.splitlines()[1:]:
        for field in line.split(","):
            assert float(field) == float(f"{float(field):.17g}")
    assert out.splitlines()[1].startswith("0.10000000000000001,")


def test_plot_svg_and_csv_share_samples(capsys, tmp_path):
    svg, csv = tmp_path / "f.svg", tmp_path / "f.csv"
    code, _, _ = run(capsys, "plot", "--m", "3", "--lambda", "1", "--c", "1", "--svg", str(svg), "--csv", str(csv))
    assert code == 0
    text = svg.read_text()
    assert text.startswith('<?xml version="1.0"') and 'version="1.1"' in text
    assert "m=3" in text and "c=1" in text and "lambda=1" in text
    pts = polyline_points(text)
    data = np.loadtxt(csv, delimiter=",", skiprows=1)
    assert len(pts) == len(data)
    # vertices are an affine image of the CSV samples
    px, py = np.array(pts).T
    assert np.allclose(np.polyfit(data[:, 0], px, 1, full=True)[1], 0.0, atol=1e-3)
    assert np.allclose(np.polyfit(data[:, 1], py, 1, full=True)[1], 0.0, atol=1e-3)


def test_plot_first_reference_set_has_two_sign_changes(capsys, tmp_path):
    svg = tmp_path / "ref1.svg"
    assert run(capsys, "plot", "--m", "3", "--lambda", "1", "--c", "1", "--svg", str(svg))[0] == 0
    code, out, _ = run(capsys, "plot", "--m", "3", "--lambda", "1", "--c", "1")
    B = np.array([float(ln.split(",")[1]) for ln in out.splitlines()[1:]])
    s = np.sign(B[B != 0])
    assert np.count_nonzero(s[1:] != s[:-1]) == 2


def test_plot_deterministic(capsys, tmp_path):
    outs = []
    for name in ("a", "b"):
        run(capsys, "plot", "--m", "-3", "--lambda", "1", "--c", "-0.2",
            "--svg", str(tmp_path / f"{name}.svg"), "--csv", str(tmp_path / f"{name}.csv"))
        outs.append(((tmp_path / f"{name}.svg").read_bytes(), (tmp_path / f"{name}.csv").read_bytes()))
    assert outs[0] == outs[1]


@pytest.mark.parametrize(
    "extra",
    [["--range", "4:-4"], ["--range", "1:1"], ["--samples", "0"], ["--samples", "1"], ["--range", "nope"]],
)
def test_plot_usage_errors(capsys, extra):
    assert run(capsys, "plot", "--m", "2", "--lambda", "0", "--c", "1", *extra)[0] == 1


def test_plot_local_profile_allowed(capsys):
    # not admissible, but plotting is still allowed
    code, out, _ = run(capsys, "plot", "--m", "2", "--lambda", "0", "--c", "1", "--b", "0.5", "--samples", "5")
    assert code == 0 and len(out.splitlines()) == 6


def test_console_entry_point():
    proc = subprocess.run([sys.executable, "-m", "qes2", "c0", "--m", "2"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert proc.stdout.startswith("x0=1.000000000000")

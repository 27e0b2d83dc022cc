import csv
import json

import numpy as np
import pytest

from monorep import GridFn, GridSpec, write_gridfn
from monorep.cli import RunConfig, build_box, cmd_demo, load_catalog, main, parse_box
from monorep.errors import SpecError

IDENTITY = {"form": "closed", "id": "phi", "operator": {"kind": "linear", "A": [[1.0]]}}
ROTATION = {"form": "closed", "id": "phi", "operator": {"kind": "rotation2d", "theta": 1.5707963267948966}}
SQ3 = {"form": "closed", "id": "phi", "operator": {"kind": "subdiff-quadratic", "A": [[3.0]]}}
FITZ_SQ3 = {"form": "fitzpatrick", "operator": {"kind": "subdiff-quadratic", "A": [[3.0]]},
            "box": [[-2.0, 2.0, 81]]}


def spec_file(tmp_path, rep, name="spec.json", **extra):
    path = tmp_path / name
    path.write_text(json.dumps({"representative": rep, **extra}))
    return str(path)


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def run(*argv):
    return main([str(a) for a in argv])


def test_verify_identity_phi(tmp_path):
    out = tmp_path / "out"
    assert run("verify", "--input", spec_file(tmp_path, IDENTITY), "--out", out) == 0
    row = read_csv(out / "verify.csv")[0]
    assert row["passed"] == "true"
    assert abs(float(row["min_gap_h"])) <= 1e-12 and abs(float(row["min_gap_jh"])) <= 1e-12
    assert (out / "figures" / "verify_gap.png").exists()


def test_verify_zero_function_names_failing_point(tmp_path, capsys):
    spec = GridSpec.uniform(-1.0, 1.0, 21, dim=2)
    write_gridfn(GridFn(spec, np.zeros(spec.size)), tmp_path / "zero.grid")
    path = spec_file(tmp_path, {"form": "grid", "file": "zero.grid"})
    assert run("verify", "--input", path, "--out", tmp_path / "out", "--format", "json", "--no-plots") == 2
    err = capsys.readouterr().err
    assert "x=[" in err and "v=[" in err
    report = json.loads((tmp_path / "out" / "verify.json").read_text())
    assert report["primal_ok"] is False
    assert abs(report["argmin_h"][0][0]) == 1.0


def test_extract_identity_and_rotation(tmp_path):
    out = tmp_path / "id"
    assert run("extract", "--input", spec_file(tmp_path, IDENTITY), "--out", out, "--no-plots") == 0
    rows = read_csv(out / "extracted.csv")
    assert len(rows) == 21 and all(r["x"] == r["v"] for r in rows)
    assert json.loads((out / "extract.json").read_text())["monotone"] is True

    out = tmp_path / "rot"
    assert run("extract", "--input", spec_file(tmp_path, ROTATION), "--out", out, "--box=-1,1,5") == 0
    rows = read_csv(out / "extracted.csv")
    assert list(rows[0]) == ["x_1", "x_2", "v_1", "v_2"]
    assert len(rows) == 25
    for r in rows:
        assert float(r["v_1"]) == -float(r["x_2"]) and float(r["v_2"]) == float(r["x_1"])
    assert (out / "figures" / "extracted.png").exists()


def test_extract_absurd_tolerance_exits_2(tmp_path):
    out = tmp_path / "out"
    assert run("extract", "--input", spec_file(tmp_path, IDENTITY), "--out", out, "--tol", "10") == 2
    report = json.loads((out / "extract.json").read_text())
    assert report["monotone"] is False and len(report["violation"]) == 2


@pytest.mark.parametrize("rep, factor", [(IDENTITY, 0.5), (SQ3, 0.25)])
def test_resolve_matches_analytic(tmp_path, rep, factor):
    out = tmp_path / "out"
    assert run("resolve", "--input", spec_file(tmp_path, rep), "--out", out) == 0
    rows = read_csv(out / "certificates.csv")
    assert list(rows[0]) == ["v0", "x", "v", "gap", "fixedpoint_residual", "C", "iterations", "accepted"]
    assert len(rows) == 11
    for r in rows:
        assert r["accepted"] == "true"
        assert abs(float(r["x"]) - factor * float(r["v0"])) <= 1e-4
    summary = json.loads((out / "resolve_summary.json").read_text())
    assert summary["fraction"] == 1.0 and summary["probes"] == 11
    assert (out / "figures" / "resolvent.png").exists()


def test_resolve_small_budget_exits_2(tmp_path):
    out = tmp_path / "out"
    assert run("resolve", "--input", spec_file(tmp_path, FITZ_SQ3), "--out", out, "--budget", "10") == 2
    rows = read_csv(out / "certificates.csv")
    assert any(r["accepted"] == "false" for r in rows)
    assert run("resolve", "--input", spec_file(tmp_path, FITZ_SQ3), "--out", tmp_path / "ok") == 0


def test_resolve_weighted_two_dimensional(tmp_path):
    path = spec_file(tmp_path, {"form": "closed", "id": "identity-phi", "dim": 2},
                     duality={"norm": "weighted", "weights": [4.0, 0.5]})
    out = tmp_path / "out"
    assert run("resolve", "--input", path, "--out", out, "--box=0,5,3", "--box=0,1.5,3", "--no-plots") == 0
    rows = read_csv(out / "certificates.csv")
    assert list(rows[0])[:6] == ["v0_1", "v0_2", "x_1", "x_2", "v_1", "v_2"]
    for r in rows:
        assert abs(float(r["x_1"]) - float(r["v0_1"]) / 5.0) <= 1e-4
        assert abs(float(r["x_2"]) - float(r["v0_2"]) / 1.5) <= 1e-4


@pytest.mark.parametrize("argv", [
    ["verify", "--input", "missing.json"],
    ["verify"],
    ["verify", "--input", "{bad}", "--box", "1,2"],
    ["resolve", "--input", "{ok}", "--tol", "-1"],
    ["resolve", "--input", "{ok}", "--budget", "0"],
    ["verify", "--input", "{ok}", "--margin", "0.5"],
    ["verify", "--input", "{ok}", "--box=1,0,5"],
    ["verify", "--input", "{ok}", "--box=0,1,5", "--box=0,1,5", "--box=0,1,5"],
    ["verify", "--input", "{garbage}"],
    ["verify", "--input", "{bad}"],
    ["bogus"],
    [],
])
def test_input_errors_exit_1(tmp_path, argv, capsys):
    (tmp_path / "garbage.json").write_text("{not json")
    (tmp_path / "bad.json").write_text(json.dumps({"representative": {"form": "closed", "id": "nope"}}))
    ok = spec_file(tmp_path, IDENTITY, name="ok.json")
    subst = {"{garbage}": str(tmp_path / "garbage.json"), "{bad}": str(tmp_path / "bad.json"), "{ok}": ok}
    argv = [subst.get(a, a) for a in argv]
    assert main(argv + ["--out", str(tmp_path / "out")] if argv and argv[0] != "bogus" else argv) == 1
    assert "Traceback" not in capsys.readouterr().err


def test_demo_empty_catalog_exits_1(tmp_path):
    path = tmp_path / "catalog.json"
    path.write_text(json.dumps({"catalog": []}))
    assert run("demo", "--input", path, "--out", tmp_path / "out") == 1


def test_demo_corrupt_grid_file_exits_1(tmp_path):
    (tmp_path / "h.grid").write_text("gridfn v1\ndim 2\naxis 0 -1 1 3\n")
    path = tmp_path / "catalog.json"
    path.write_text(json.dumps({"catalog": [{
        "name": "identity",
        "operator": {"kind": "linear", "A": [[1.0]]},
        "representatives": ["phi", {"form": "grid", "file": "h.grid"}],
        "box": [[-1.0, 1.0, 5]],
        "probes": [[-1.0, 1.0, 3]],
    }]}))
    assert run("demo", "--input", path, "--out", tmp_path / "out") == 1


@pytest.mark.parametrize("entry", [
    {"name": "x"},
    {"name": "x", "operator": {"kind": "linear", "A": [[1.0]]}, "box": [[-1, 1, 5]], "probes": "nope"},
    {"name": "x", "operator": {"kind": "linear", "A": [[1.0]]}, "box": [[-1, 1, 5]], "probes": {"points": []}},
    {"name": "x", "operator": {"kind": "linear", "A": [[1.0]]}, "box": [[-1, 1, 5]], "probes": [[-1, 1, 3]],
     "representatives": ["largest"]},
    {"name": "x", "operator": {"kind": "linear", "A": [[1.0]]}, "box": [[-1, 1, 5]], "probes": [[-1, 1, 3]],
     "representatives": [{"form": "closed", "id": "identity-phi", "dim": 2}]},
])
def test_bad_catalog_entries(tmp_path, entry):
    path = tmp_path / "catalog.json"
    path.write_text(json.dumps({"catalog": [entry]}))
    with pytest.raises(SpecError):
        load_catalog(str(path))


def test_bundled_catalog_loads():
    entries = load_catalog(None)
    assert [e["name"] for e in entries] == ["identity", "subdiff-quadratic", "linear-skew", "rotation-90",
                                             "normal-cone-box"]


def test_demo_runs_and_is_deterministic(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert cmd_demo(RunConfig("demo", None, str(a), tol=1e-4)) == 0
    assert cmd_demo(RunConfig("demo", None, str(b), tol=1e-4, plots=False)) == 0
    assert (a / "demo_summary.csv").read_bytes() == (b / "demo_summary.csv").read_bytes()
    rows = read_csv(a / "demo_summary.csv")
    assert all(r["status"] == "PASS" for r in rows)
    assert (a / "figures" / "overview.png").exists()
    assert not (b / "figures").exists()


def test_box_helpers():
    assert parse_box("-1,1,5") == (-1.0, 1.0, 5)
    assert build_box([(-1.0, 1.0, 3)], 2, 1).counts == (3, 3)
    assert build_box([(0.0, 1.0, 3), (0.0, 2.0, 5)], 4, 2).counts == (3, 5, 3, 5)
    with pytest.raises(SpecError):
        build_box([(0.0, 1.0, 3)] * 3, 4, 2)
    with pytest.raises(SpecError):
        parse_box("a,b,c")

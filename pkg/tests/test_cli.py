import io
import json
import subprocess
import sys

import pytest

from propalloc.cli import main
from propalloc.instance import gen_complete, gen_path3, serialize, to_document


def run(argv, capsys, stdin: str | None = None, monkeypatch=None):
    if stdin is not None:
        monkeypatch.setattr(sys, "stdin", io.StringIO(stdin))
    try:
        code = main(argv)
    except SystemExit as exc:  # argparse usage errors
        code = exc.code
    out, err = capsys.readouterr()
    payload = json.loads(out) if code in (0, 1) else None
    if code in (0, 1):
        assert out.count("\n") == 1
    return code, payload, err


@pytest.fixture
def files(tmp_path):
    def write(name, doc):
        p = tmp_path / name
        p.write_text(doc if isinstance(doc, str) else json.dumps(doc))
        return str(p)

    k22 = {
        "left": [{"id": "i1", "supply": 1}, {"id": "i2", "supply": 2}],
        "right": [{"id": "j1", "capacity": 1}, {"id": "j2", "capacity": 2}],
        "edges": [["i1", "j1"], ["i1", "j2"], ["i2", "j1"], ["i2", "j2"]],
    }
    cut = to_document(gen_path3())
    cut["edges"] = [["i1", "j2"], ["i2", "j2"]]
    a, b = gen_complete(2), gen_complete(2)
    squares = {
        "left": [{"id": f"{t}{n.id}", "supply": 1} for t in "ab" for n in a.left],
        "right": [{"id": f"{t}{n.id}", "capacity": 1} for t in "ab" for n in b.right],
        "edges": [[f"{t}{i}", f"{t}{j}"] for t in "ab" for i, j in a.edges],
    }
    return {
        "path3": write("path3.json", serialize(gen_path3())),
        "k22": write("k22.json", k22),
        "cut": write("cut.json", cut),
        "squares": write("squares.json", squares),
        "broken": write("broken.json", '{"left": ['),
        "invalid": write("invalid.json", {"left": [], "right": [], "edges": [["x", "y"]]}),
        "dir": tmp_path,
        "write": write,
    }


def test_gen(capsys, tmp_path):
    code, doc, _ = run(["gen", "path3"], capsys)
    assert code == 0 and doc == to_document(gen_path3())
    code, doc, _ = run(["gen", "cycle", "--n", "3"], capsys)
    assert code == 0 and len(doc["edges"]) == 6
    code, doc, _ = run(["gen", "twocap-powers", "--n", "4"], capsys)
    assert [it["c"] for it in doc["items"]] == [1, 2, 4, 8]
    assert [it["v"] for it in doc["items"]] == [8, 4, 2, 1]
    out = tmp_path / "g.json"
    code, doc, _ = run(["gen", "random-mc", "--n", "5", "--extra", "3", "--seed", "4", "--out", str(out)], capsys)
    assert code == 0 and json.loads(out.read_text()) == doc
    code, _, _ = run(["gen", "cycle", "--n", "1"], capsys)
    assert code == 2
    code, _, _ = run(["gen", "nonsense"], capsys)
    assert code == 2


def test_opt(capsys, files):
    assert run(["opt", files["path3"]], capsys)[:2] == (0, {"opt": 2, "perfect": True})
    assert run(["opt", files["cut"]], capsys)[:2] == (0, {"opt": 1, "perfect": False})
    assert run(["opt", files["broken"]], capsys)[0] == 2
    assert run(["opt", files["invalid"]], capsys)[0] == 2
    assert run(["opt", str(files["dir"] / "missing.json")], capsys)[0] == 2


def test_opt_stdin(capsys, monkeypatch):
    code, doc, _ = run(["opt", "-"], capsys, serialize(gen_path3()), monkeypatch)
    assert (code, doc) == (0, {"opt": 2, "perfect": True})


def test_check_mc(capsys, files):
    assert run(["check-mc", files["path3"]], capsys)[:2] == (
        0, {"matching_covered": False, "tight_set": ["i2"]})
    assert run(["check-mc", files["k22"]], capsys)[:2] == (0, {"matching_covered": True})
    assert run(["check-mc", files["squares"]], capsys)[:2] == (
        0, {"matching_covered": False, "disconnected": True})
    assert run(["check-mc", files["cut"]], capsys)[:2] == (1, {"error": "no perfect matching"})
    assert run(["check-mc", files["broken"]], capsys)[0] == 2


def test_weights(capsys, files):
    code, doc, _ = run(["gen", "cycle", "--n", "3"], capsys)
    hexagon = files["write"]("hex.json", doc)
    code, doc, _ = run(["weights", hexagon], capsys)
    assert code == 0 and doc["weights"] == {"j1": 1.0, "j2": 1.0, "j3": 1.0}
    assert doc["residual"] <= 1e-9 and doc["iterations"] >= 1
    code, doc, _ = run(["weights", files["k22"]], capsys)
    assert doc["weights"]["j1"] == 1.0 and doc["weights"]["j2"] == pytest.approx(2.0, rel=1e-8)
    code, doc, err = run(["weights", files["path3"]], capsys)
    assert code == 1 and doc == {"error": "not matching covered", "tight_set": ["i2"]}
    assert "not matching covered" in err
    assert run(["weights", files["cut"]], capsys)[0] == 1
    assert run(["weights", files["broken"]], capsys)[0] == 2


def test_strategy_allocate_eval(capsys, files):
    code, strat, _ = run(["strategy", files["path3"]], capsys)
    assert code == 0 and strat == {"ranks": {"j1": 2, "j2": 1}, "weights": {"j1": 1.0, "j2": 1.0}}
    sfile = files["write"]("s.json", strat)
    code, alloc, _ = run(["allocate", files["path3"], "--strategy", sfile], capsys)
    assert code == 0 and alloc["value"] == 2.0
    afile = files["write"]("a.json", alloc)
    code, ev, _ = run(["eval", files["path3"], afile], capsys)
    assert code == 0 and ev == {"value": 2.0, "opt": 2}

    code, alloc, _ = run(["allocate", files["path3"], "--weights", "uniform"], capsys)
    assert alloc["x"] == [["i1", "j1", 0.5], ["i1", "j2", 0.5], ["i2", "j2", 1.0]]
    afile = files["write"]("u.json", alloc)
    assert run(["eval", files["path3"], afile], capsys)[1] == {"value": 1.5, "opt": 2}

    assert run(["strategy", files["squares"]], capsys)[0] == 1
    assert run(["strategy", files["cut"]], capsys)[0] == 1
    assert run(["strategy", files["broken"]], capsys)[0] == 2
    assert run(["allocate", files["path3"]], capsys)[0] == 2
    assert run(["allocate", files["path3"], "--strategy", files["broken"]], capsys)[0] == 2
    assert run(["eval", files["path3"], files["broken"]], capsys)[0] == 2


def test_allocate_with_weights_file(capsys, files):
    code, w, _ = run(["weights", files["k22"]], capsys)
    wfile = files["write"]("w.json", w)
    code, alloc, _ = run(["allocate", files["k22"], "--weights", wfile], capsys)
    assert code == 0 and alloc["value"] == pytest.approx(3.0, abs=1e-6)


def test_allocate_isolated_left_is_domain_failure(capsys, files):
    doc = {"left": [{"id": "i1", "supply": 1}, {"id": "i2", "supply": 1}],
           "right": [{"id": "j1", "capacity": 2}], "edges": [["i1", "j1"]]}
    f = files["write"]("iso.json", doc)
    code, payload, _ = run(["allocate", f, "--weights", "uniform"], capsys)
    assert code == 1 and "no neighbors" in payload["error"]


def test_strategy_on_mc_has_unit_ranks(capsys, files):
    code, doc, _ = run(["gen", "random-mc", "--n", "6", "--extra", "4", "--seed", "1"], capsys)
    f = files["write"]("mc.json", doc)
    code, strat, _ = run(["strategy", f], capsys)
    assert set(strat["ranks"].values()) == {1}


def test_twocap_violation(capsys, files):
    _, doc, _ = run(["gen", "twocap-powers", "--n", "10"], capsys)
    f10 = files["write"]("t10.json", doc)
    code, rep, _ = run(["twocap-violation", f10, "--samples", "1000", "--seed", "3"], capsys)
    assert code == 0 and rep["lower_bound"] == 1.6 and rep["bound_holds"] is True
    _, doc, _ = run(["gen", "twocap-powers", "--n", "4"], capsys)
    f4 = files["write"]("t4.json", doc)
    code, rep, _ = run(["twocap-violation", f4, "--weights", "uniform"], capsys)
    assert rep == {"min_factor_observed": 3.75, "lower_bound": 0.5, "bound_holds": True}
    _, doc, _ = run(["gen", "twocap-powers", "--n", "2"], capsys)
    f2 = files["write"]("t2.json", doc)
    code, rep, _ = run(["twocap-violation", f2], capsys)
    assert rep["lower_bound"] == 0.5 and rep["bound_holds"] is True
    assert run(["twocap-violation", files["broken"]], capsys)[0] == 2
    assert run(["twocap-violation", files["path3"]], capsys)[0] == 2


def test_twocap_isolated_item_is_domain_failure(capsys, files):
    doc = {"items": [{"id": "a", "c": 1, "v": 1}], "bins": [{"id": "b", "C": 1, "V": 1}], "edges": []}
    f = files["write"]("iso2.json", doc)
    assert run(["twocap-violation", f, "--weights", "uniform"], capsys)[0] == 1


def _cli(*args, stdin=None):
    return subprocess.run(
        [sys.executable, "-m", "propalloc", *args], input=stdin, capture_output=True, text=True, check=False
    )


def test_pipeline_byte_identical():
    outs = []
    for _ in range(2):
        gen = _cli("gen", "random-mc", "--n", "7", "--extra", "5", "--seed", "11")
        res = _cli("weights", "-", stdin=gen.stdout)
        assert res.returncode == 0
        outs.append(gen.stdout + res.stdout)
    assert outs[0] == outs[1]


def test_module_exit_codes():
    assert _cli("check-mc", "-", stdin='{"left":').returncode == 2
    path3 = _cli("gen", "path3").stdout
    bad = _cli("weights", "-", stdin=path3)
    assert bad.returncode == 1 and json.loads(bad.stdout)["tight_set"] == ["i2"]

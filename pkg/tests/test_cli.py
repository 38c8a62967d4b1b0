from __future__ import annotations

import json

import pytest
from click.testing import CliRunner

from refuterlab.cli import main
from refuterlab.resolution import Node, dumps_proof, read_dimacs


@pytest.fixture
def run(tmp_path):
    runner = CliRunner()

    def invoke(*args: str, code: int = 0):
        res = runner.invoke(main, [str(a) for a in args], catch_exceptions=False)
        assert res.exit_code == code, res.output
        return res

    return invoke


@pytest.fixture
def php21(tmp_path, run):
    path = tmp_path / "php21.cnf"
    run("gen", "formula", "--kind", "php", "--n", "1", "-o", path)
    return path


def test_gen_formula_php(run, php21):
    nv, cnf = read_dimacs(php21)
    assert nv == 2 and len(cnf) == 3


@pytest.mark.parametrize(
    "args",
    [
        ("--kind", "ephp", "--n", "2"),
        ("--kind", "tseitin", "--graph", "complete:4"),
        ("--kind", "random", "--n", "5", "--m", "10", "--seed", "3"),
    ],
)
def test_gen_formula_kinds(run, args):
    out = run("gen", "formula", *args).output
    assert out.startswith("p cnf")


def test_gen_formula_missing_option_is_malformed(run):
    run("gen", "formula", "--kind", "ephp", code=2)


def test_iter_roundtrip_and_verify(run, tmp_path):
    path = tmp_path / "it.json"
    run("gen", "iter", "--length", "6", "--seed", "1", "-o", path)
    obj = json.loads(path.read_text())
    assert obj["orientation"] == "reversed" and obj["S"][-1] < 5
    x = json.loads(run("solve", "iter", "--instance", path).output)
    run("verify", "iter", "--instance", path, "--solution", x)
    assert run("verify", "iter", "--instance", path, "--solution", 99, code=1).output.strip() == "invalid"


def test_gen_iter_bad_length_is_infeasible(run):
    run("gen", "iter", "--length", "0", code=3)


def test_verify_refutation_valid_and_invalid(run, tmp_path, php21):
    good = tmp_path / "good.jsonl"
    run("gen", "proof", "--cnf", php21, "--tree", "-o", good)
    assert run("verify", "refutation", "--cnf", php21, "--proof", good).output.strip() == "valid"
    bad = tmp_path / "bad.jsonl"
    bad.write_text(dumps_proof([Node.wk([], -1)]))
    out = run("verify", "refutation", "--cnf", php21, "--proof", bad, code=1).output
    assert "invalid node 0" in out
    assert json.loads(run("solve", "width-refuter", "--cnf", php21, "--proof", bad).output) == [0]
    run("verify", "width-refuter", "--cnf", php21, "--proof", bad, "--node", 0)
    run("verify", "width-refuter", "--cnf", php21, "--proof", good, "--node", 0, code=1)


def test_malformed_proof_file(run, tmp_path, php21):
    bad = tmp_path / "junk.jsonl"
    bad.write_text("{not json\n")
    run("verify", "refutation", "--cnf", php21, "--proof", bad, code=2)


def test_hardness_reduction_and_walk(run, tmp_path):
    cnf = tmp_path / "k4.cnf"
    run("gen", "formula", "--kind", "tseitin", "--graph", "complete:4", "-o", cnf)
    it = tmp_path / "it.json"
    it.write_text(json.dumps({"orientation": "reversed", "S": [0, 0, 1, 2]}))
    proof = tmp_path / "p.jsonl"
    run("reduce", "iter-to-width-refuter", "--in", it, "--cnf", cnf, "-o", proof)
    assert json.loads(run("solve", "width-refuter", "--cnf", cnf, "--proof", proof).output) == [1]
    one = run("reduce", "iter-to-width-refuter", "--in", it, "--cnf", cnf, "--query", 1).output
    assert len(one.strip().splitlines()) == 1
    out = run("reduce", "width-refuter-to-iter", "--family", "tseitin", "--graph", "complete:4", "--cnf", cnf, "--proof", proof).output
    assert json.loads(out)["kind"] == "iter"
    rep = json.loads(run("meter", "--reduction", "iter-to-width-refuter", "--in", it, "--cnf", cnf).output)
    assert rep["within_budget"]


def test_cri_command(run):
    out = json.loads(run("cri", "--family", "ephp", "--n", "3").output)
    assert out["value"] == 4
    out = json.loads(run("cri", "--family", "tseitin", "--graph", "cycle:6").output)
    assert out == {"value": 6, "critical_set": [0, 1, 2, 3, 4, 5]}
    run("cri", "--family", "ephp", "--n", "3", "--clause", "a", code=2)


def test_bound_exit_codes(run):
    out = json.loads(run("bound", "--kind", "php", "--n", "4", "--W", "18", "--L", "1").output)
    assert out["feasible"]
    res = run("bound", "--kind", "php", "--n", "4", "--W", "3", "--L", "1", code=3)
    assert "infeasible" in res.output
    run("bound", "--kind", "xor", "--n", "4", "--L", "1", code=2)


def test_rwphp_gen_solve_verify_and_gadget(run, tmp_path, php21):
    rw = tmp_path / "rw.json"
    run("gen", "rwphp", "--M", "1", "--L-it", "2", "--seed", "4", "-o", rw)
    sols = json.loads(run("solve", "rwphp", "--instance", rw, "--all").output)
    for y, a in sols:
        run("verify", "rwphp", "--instance", rw, "--y", y, "--answer", a)
    proof = tmp_path / "gad.jsonl"
    run("reduce", "rwphp-to-size", "--in", rw, "--cnf", php21, "-o", proof)
    invalid = json.loads(run("solve", "width-refuter", "--cnf", php21, "--proof", proof).output)
    assert bool(invalid) == bool(sols)
    run("reduce", "rwphp-to-size", "--in", rw, "--cnf", php21, "--sF", "1", code=3)


def test_amplify_command(run, tmp_path):
    rw = tmp_path / "rw.json"
    rw.write_text(json.dumps({"M": 2, "N": 3, "f": [0, 1], "orientation": "forward", "inner": [[0], [0], [0]], "labels": [[0], [1], [0]], "general": True}))
    out = json.loads(run("amplify", "--in", rw, "--eps", "1/2", "--N", "8", "--solve").output)
    assert out["N"] == 8 and out["mapped_valid"]


def test_formulation_compile_and_rft(run, tmp_path, php21):
    fm = tmp_path / "fm.json"
    run("gen", "formulation", "--cnf", php21, "--M", "2", "--seed", "0", "-o", fm)
    proof = tmp_path / "pls.jsonl"
    run("compile", "pls-to-res", "--formulation", fm, "--cnf", php21, "-o", proof)
    run("verify", "refutation", "--cnf", php21, "--proof", proof)
    assert json.loads(run("solve", "rft", "--formulation", fm, "--cnf", php21).output) == []
    run("verify", "rft", "--formulation", fm, "--cnf", php21, "--solution", '{"rho": [[1, 1], [2, 1]], "o": 0}', code=1)


def test_refute_wlb(run, tmp_path):
    res = run("refute", "wlb-cnf", "--n", "1", "--w0", "1", "--L", "2")
    assert '"valid": true' in res.output
    run("refute", "wlb-cnf", "--n", "2", "--w0", "3", "--L", "3", code=3)


def test_seed_from_environment(tmp_path):
    runner = CliRunner()
    a = runner.invoke(main, ["gen", "iter", "--length", "9"], env={"REFUTERLAB_SEED": "5"}).output
    b = runner.invoke(main, ["gen", "iter", "--length", "9", "--seed", "5"]).output
    assert a == b

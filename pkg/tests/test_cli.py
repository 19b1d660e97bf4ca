import json
import subprocess
import sys

import pytest

from hamgrow.cli import main
from hamgrow.graph import parse_graph, petersen_graph


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture
def files(tmp_path, capsys):
    made = {}
    for name, argv in {
        "c4": ["--model", "cycle", "--n", "4"],
        "c5": ["--model", "cycle", "--n", "5"],
        "p4": ["--model", "path", "--n", "4"],
        "p5": ["--model", "path", "--n", "5"],
        "k6": ["--model", "complete", "--n", "6"],
        "pet": ["--model", "petersen"],
    }.items():
        path = tmp_path / f"{name}.txt"
        assert main(["gen", *argv, "--out", str(path)]) == 0
        made[name] = str(path)
    capsys.readouterr()
    return made


def test_gen(files, capsys):
    with open(files["pet"]) as fh:
        assert parse_graph(fh.read()) == petersen_graph()
    a = run(capsys, "gen", "--model", "gnp", "--n", "8", "--p", "0.5", "--seed", "42")
    b = run(capsys, "gen", "--model", "gnp", "--n", "8", "--p", "0.5", "--seed", "42")
    assert a == b and a[0] == 0
    assert run(capsys, "gen", "--model", "gnp", "--n", "8")[0] == 1
    assert run(capsys, "gen", "--model", "cycle")[0] == 1
    assert run(capsys, "gen", "--model", "bogus", "--n", "3")[0] == 1


def test_solve(files, capsys):
    code, out, _ = run(capsys, "solve", "--in", files["c5"])
    assert code == 0 and out.splitlines()[0] == "HAMILTONIAN"
    assert "witness: 0 1 2 3 4" in out
    code, out, _ = run(capsys, "solve", "--in", files["p5"], "--trace")
    lines = out.splitlines()
    assert lines[0] == "NOT HAMILTONIAN" and "final_cost: 1" in lines
    header = lines.index(next(x for x in lines if x.startswith("m\t")))
    assert len(lines) - header - 1 == 1 and "d_star" in lines[header] and "c_star" in lines[header]
    code, out, _ = run(capsys, "solve", "--in", files["pet"], "--order", "shuffle:3", "--provider", "oracle")
    assert code == 0 and "final_cost" in out
    assert run(capsys, "solve", "--in", files["k6"])[1].startswith("HAMILTONIAN (all-zero quad shortcut)")
    assert run(capsys, "solve", "--in", files["p5"], "--order", "0,1,2")[0] == 1
    assert run(capsys, "solve", "--in", files["p5"], "--order", "4,3,2,1,0")[0] == 0


def test_solve_bad_input(tmp_path, capsys):
    bad = tmp_path / "bad.txt"
    bad.write_text("3 1\n0 x\n")
    code, _, err = run(capsys, "solve", "--in", str(bad))
    assert code == 1 and "line 2" in err
    assert run(capsys, "solve", "--in", str(tmp_path / "missing"))[0] == 1


def test_oracle(files, capsys):
    assert run(capsys, "oracle", "--in", files["pet"], "--hc", "--tsp")[1] == "false\n1\n"
    assert run(capsys, "oracle", "--in", files["k6"], "--tsp")[1] == "0\n"
    assert run(capsys, "oracle", "--in", files["p4"], "--tsp")[1] == "1\n"
    assert run(capsys, "oracle", "--in", files["p4"])[0] == 1


def test_oracle_capacity(tmp_path, capsys):
    path = tmp_path / "k19.txt"
    main(["gen", "--model", "complete", "--n", "19", "--out", str(path)])
    code, _, err = run(capsys, "oracle", "--in", str(path), "--tsp")
    assert code == 1 and "18" in err


def test_verify_empty_and_quad(files, tmp_path, capsys):
    code, out, _ = run(capsys, "verify", "--check", "table1", "--n-range", "5..5", "--trials", "0")
    assert code == 0 and json.loads(out)["trials"] == 0
    jl = tmp_path / "quad.jsonl"
    code, out, _ = run(capsys, "verify", "--check", "quad", "--in", files["c4"], files["k6"], "--out", str(jl))
    assert code == 2 and json.loads(out)["discrepancies"] == {"shortcut_claim_violated": 1}
    assert len(jl.read_text().splitlines()) == 1
    assert run(capsys, "replay", "--in", str(jl))[0] == 0


def test_verify_deterministic_and_replay(tmp_path, capsys):
    outs = []
    for name in ("a", "b"):
        path = tmp_path / f"{name}.jsonl"
        code, _, _ = run(capsys, "verify", "--check", "table1", "--n-range", "5..7", "--trials", "60",
                         "--seed", "11", "--out", str(path))
        assert code in (0, 2)
        outs.append(path.read_bytes())
    assert outs[0] == outs[1]
    if outs[0]:
        path = tmp_path / "a.jsonl"
        code, out, _ = run(capsys, "replay", "--in", str(path), "--index", "0")
        assert code == 0 and "1/1 reproduced" in out


def test_replay_errors(tmp_path, files, capsys):
    jl = tmp_path / "quad.jsonl"
    run(capsys, "verify", "--check", "quad", "--in", files["c4"], "--out", str(jl))
    rec = json.loads(jl.read_text())
    assert run(capsys, "replay", "--in", str(jl), "--index", "5")[0] == 1
    rec["expected"] = 2
    jl.write_text(json.dumps(rec) + "\n")
    code, out, _ = run(capsys, "replay", "--in", str(jl))
    assert code == 3 and "NOT REPRODUCED" in out
    jl.write_text("garbage\n")
    assert run(capsys, "replay", "--in", str(jl))[0] == 1


def test_usage_errors(capsys):
    assert run(capsys, "verify", "--check", "table1", "--n-range", "9..3")[0] == 1
    assert run(capsys, "verify", "--check", "table1", "--generator", "zzz")[0] == 1
    assert run(capsys, "verify", "--check", "nope")[0] == 1
    assert run(capsys)[0] == 1
    assert run(capsys, "--help")[0] == 0


def test_hunt_small(capsys):
    code, out, _ = run(capsys, "hunt", "--n-range", "5..7", "--trials", "10", "--seed", "3")
    assert code in (0, 2) and json.loads(out)["config"]["campaign"] == "endtoend"


def test_module_entry_point(files):
    res = subprocess.run([sys.executable, "-m", "hamgrow", "oracle", "--in", files["c5"], "--hc"],
                         capture_output=True, text=True)
    assert res.returncode == 0 and res.stdout == "true\n"

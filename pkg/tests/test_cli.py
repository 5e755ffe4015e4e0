import json
import subprocess
import sys

import pytest

from specgraph.cli import main
from specgraph.graph_core import fan_graph
from specgraph.relations import identity
from specgraph.sequences import make_sequence


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


@pytest.fixture
def arc_file(tmp_path, capsys):
    path = tmp_path / "arc.json"
    assert run(capsys, "generate", "arc_dyadic", "--levels", 4, "--out", path)[0] == 0
    return path


def nodes(dot: str) -> int:
    return sum(1 for line in dot.splitlines() if line.strip().endswith('";') and "--" not in line)


def test_generate_to_stdout(capsys):
    code, out, err = run(capsys, "generate", "cantor_fan", "--levels", 2)
    assert code == 0
    data = json.loads(out)
    assert len(data["graphs"]) == 3
    assert "sizes" in err


def test_export_round_trip_is_byte_identical(tmp_path, capsys, arc_file):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert run(capsys, "export", arc_file, "--json", a)[0] == 0
    assert run(capsys, "export", a, "--json", b)[0] == 0
    assert a.read_bytes() == b.read_bytes()


def test_export_dot_counts(tmp_path, capsys, arc_file):
    d = tmp_path / "dot"
    assert run(capsys, "export", arc_file, "--dot", d, "--poset")[0] == 0
    assert nodes((d / "level_3.dot").read_text()) == 7
    assert (d / "poset.dot").exists()

    claw = fan_graph([1, 1, 1])
    seq = tmp_path / "claw.json"
    seq.write_text(make_sequence([claw, claw], [identity(claw)]).dumps())
    assert run(capsys, "export", seq, "--dot", tmp_path / "c")[0] == 0
    assert nodes((tmp_path / "c" / "level_0.dot").read_text()) == 4


def test_check_exit_codes(tmp_path, capsys, arc_file):
    code, out, err = run(capsys, "check", arc_file, "--property", "edge-witnessing")
    assert code == 0 and json.loads(out)["status"] == "Holds"
    assert "Holds" in err
    code, out, _ = run(capsys, "check", arc_file, "--property", "strictly-anti-injective")
    assert code == 3 and json.loads(out)["status"] == "Unknown"
    ci = tmp_path / "ci.json"
    run(capsys, "generate", "clique_iteration", "--levels", 3, "--out", ci)
    code, out, _ = run(capsys, "check", ci, "--property", "strictly-anti-injective")
    assert code == 2 and json.loads(out)["status"] == "FailsOnPrefix"
    assert run(capsys, "check", arc_file, "--property", "no-such-ideal")[0] == 1


def test_classify_output(tmp_path, capsys, arc_file):
    code, out, err = run(capsys, "classify", arc_file, "--category", "a")
    data = json.loads(out)
    assert code == 0 and data["category"] == "A"
    assert data["lax"]["status"] == "Holds" and data["fraisse"]["status"] == "Unknown"
    assert "lax-Fraïssé at horizon 4: Holds" in err.splitlines()

    nasty = tmp_path / "nasty.json"
    run(capsys, "generate", "nasty_fan", "--levels", 3, "--out", nasty)
    code, out, _ = run(capsys, "classify", nasty, "--category", "X")
    assert code == 2 and json.loads(out)["lax"]["status"] == "FailsOnPrefix"

    cyc = tmp_path / "cycle.json"
    run(capsys, "generate", "cycle_roots", "--levels", 3, "--out", cyc)
    code, out, _ = run(capsys, "classify", cyc, "--category", "C")
    assert code == 0 and "fraisse" not in json.loads(out)


def test_amalgamate_and_fraisse(tmp_path, capsys):
    claw = fan_graph([1, 1, 1])
    f = tmp_path / "f.json"
    f.write_text(json.dumps(identity(claw).to_json()))
    code, out, _ = run(capsys, "amalgamate", "--category", "X", f, f)
    assert code == 0 and len(json.loads(out)["object"]["vertices"]) >= 4

    log = tmp_path / "log.json"
    code, out, err = run(capsys, "fraisse", "--category", "D", "--steps", 3, "--seed", 1, "--log", log)
    assert code == 0 and len(json.loads(out)["graphs"]) == 4
    assert json.loads(log.read_text())
    assert "absorbed requests" in err


def test_spectrum_report(tmp_path, capsys):
    seq = tmp_path / "cf.json"
    run(capsys, "generate", "cantor_fan", "--levels", 3, "--out", seq)
    rep = tmp_path / "rep.json"
    code, _, err = run(capsys, "spectrum", seq, "--report", rep)
    data = json.loads(rep.read_text())
    assert code == 0 and data["fanLimit"]["kind"] == "CantorFanEvidence"
    assert "fan=CantorFanEvidence" in err


def test_invalid_input(tmp_path, capsys):
    assert run(capsys, "generate", "no_such_generator")[0] == 1
    assert run(capsys, "check", tmp_path / "missing.json", "--property", "anti-injective")[0] == 1
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert run(capsys, "export", bad, "--json", tmp_path / "x.json")[0] == 1
    assert run(capsys, "frobnicate")[0] == 1
    assert run(capsys, "generate", "arc_dyadic", "--param", "levels")[0] == 1


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "specgraph", "generate", "arc_dyadic", "--levels", "1"],
                         capture_output=True, text=True, env={"SPECGRAPH_THREADS": "1", "PATH": ""})
    assert res.returncode == 0
    assert len(json.loads(res.stdout)["graphs"]) == 2


def test_spectrum_of_cantor_doubling(tmp_path, capsys):
    seq = tmp_path / "cd.json"
    run(capsys, "generate", "cantor_doubling", "--levels", 4, "--out", seq)
    code, out, err = run(capsys, "spectrum", seq)
    data = json.loads(out)
    assert code == 0
    assert [data[k]["status"] for k in ("connected", "hausdorff", "perfect")] == ["FailsOnPrefix", "Holds", "Holds"]
    assert "fanLimit" not in data and "connected=FailsOnPrefix" in err


def test_poset_export_of_modification_fail(tmp_path, capsys):
    seq = tmp_path / "mf.json"
    run(capsys, "generate", "modification_fail", "--levels", 4, "--out", seq)
    assert run(capsys, "export", seq, "--dot", tmp_path / "d", "--poset")[0] == 0
    dot = (tmp_path / "d" / "poset.dot").read_text()
    data = json.loads(seq.read_text())
    assert dot.count("rank=same") == 5
    assert dot.count("->") == sum(len(st["pairs"]) for st in data["steps"])

import json
import random
from importlib import resources

import jsonschema
import pytest

from vindex.cli import main

SCHEMA = json.loads((resources.files("vindex") / "data" / "report.schema.json").read_text())


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def run_json(capsys, *argv):
    code, out, _ = run(capsys, "--json", *argv)
    report = json.loads(out)
    jsonschema.validate(report, SCHEMA)
    return code, report


def test_index_table(capsys):
    code, out, _ = run(capsys, "index", "michaelis-menten", "E,S")
    assert code == 0
    rows = dict(line.split() for line in out.splitlines()[1:5])
    assert rows == {"E": "0", "S": "0", "C": "1", "P": "2"}


def test_index_json(capsys):
    code, report = run_json(capsys, "index", "michaelis-menten", "P")
    assert code == 0
    assert report["results"]["species"] == {"E": "inf", "S": "inf", "C": "inf", "P": 0}
    assert report["results"]["steps"] == ["inf"] * 3
    assert list(report) == ["command", "seed", "network", "options", "results", "timing_ms", "warnings"]


def test_index_zero_complex(capsys):
    code, report = run_json(capsys, "index", "zero-complex")
    assert report["results"]["species"] == {"X": 1} and report["results"]["steps"] == [0]


@pytest.mark.parametrize("engine", ["brute", "ilp", "lex"])
def test_minimal_engines(capsys, engine):
    code, out, _ = run(capsys, "minimal", "michaelis-menten", "--engine", engine, "--verify")
    assert code == 0 and out.splitlines() == ["C", "E S"]
    code, out, _ = run(capsys, "minimal", "michaelis-menten", "--engine", engine, "--intermediates", "C")
    assert out.splitlines() == ["E S"]
    code, report = run_json(capsys, "minimal", "mapk-biomd26", "--engine", engine, "--verify")
    assert report["results"]["count"] == 17 and report["results"]["verified"]


def test_minimal_lex_flags(capsys):
    code, out, _ = run(capsys, "minimal", "mapk-biomd26", "--engine", "lex", "--order", "frequency",
                       "--ordering", "lex", "--shards", "2", "--cap", "2")
    assert code == 0 and len(out.splitlines()) == 14


def test_saving(capsys):
    code, out, _ = run(capsys, "saving", "emanuel-knorre")
    assert code == 0 and out.strip() == "0.8413"
    code, report = run_json(capsys, "saving", "emanuel-knorre")
    assert report["results"]["ratio"] == "53/63"


def test_exit_codes(capsys, tmp_path):
    bad = tmp_path / "bad.rxn"
    bad.write_text("A -> B -> C\n")
    assert run(capsys, "index", str(bad))[0] == 2
    assert run(capsys, "index", "no-such-file")[0] == 2
    assert run(capsys, "index", "michaelis-menten", "Q")[0] == 3
    assert run(capsys, "minimal", "michaelis-menten", "--intermediates", "Q")[0] == 3
    assert run(capsys, "minimal", "mapk-biomd26", "--brute-limit", "3")[0] == 4
    assert run(capsys, "minimal", "mapk-biomd26", "--engine", "ilp", "--node-cap", "3")[0] == 4
    opaque = tmp_path / "opaque.rxn"
    opaque.write_text("E -> X1\n")
    assert run(capsys, "saving", str(opaque))[0] == 5


def test_error_report_validates(capsys):
    code, report = run_json(capsys, "index", "michaelis-menten", "Q")
    assert code == 3 and report["error"]["code"] == 3


def test_node_cap_env(capsys, monkeypatch):
    monkeypatch.setenv("VINDEX_ILP_NODECAP", "3")
    assert run(capsys, "minimal", "mapk-biomd26", "--engine", "ilp")[0] == 4


def test_export_ilp(capsys, tmp_path):
    target = tmp_path / "mm.lp"
    code, _, _ = run(capsys, "export-ilp", "michaelis-menten", "-o", str(target))
    text = target.read_text()
    assert code == 0 and text.startswith("Minimize")
    binaries = text.split("Binary\n")[1].split("End")[0].split()
    assert len(binaries) == 25
    code, out, _ = run(capsys, "export-ilp", "michaelis-menten", "--intermediates", "C")
    assert "fix_m2: y_2_0 = 0" in out


def test_bench_csv(capsys):
    code, out, _ = run(capsys, "bench", "michaelis-menten", "--repetitions", "3", "--csv")
    lines = out.splitlines()
    assert code == 0 and lines[0] == "engine,median_ms,sets,agrees"
    assert [line.split(",")[0] for line in lines[1:]] == ["brute", "ilp", "lex"]
    assert all(line.endswith(",2,True") for line in lines[1:])


def test_bench_random(capsys):
    code, report = run_json(capsys, "--seed", "1", "bench", "--random", "12", "--repetitions", "1")
    assert code == 0 and report["seed"] == 1 and report["results"]["agree"]
    assert report["network"]["M"] <= 12


def test_bench_mapk(capsys):
    code, report = run_json(capsys, "bench", "mapk-biomd26", "--engines", "brute", "lex", "--repetitions", "1")
    assert [r["sets"] for r in report["results"]["rows"]] == [17, 17]


def test_gen_replays(capsys, tmp_path):
    _, first, _ = run(capsys, "gen", "--seed", "9", "--species", "6", "--steps", "8")
    _, second, _ = run(capsys, "--seed", "9", "gen", "--species", "6", "--steps", "8")
    assert first == second
    path = tmp_path / "g.rxn"
    run(capsys, "gen", "--seed", "9", "--species", "6", "--steps", "8", "-o", str(path))
    code, out, _ = run(capsys, "minimal", str(path), "--verify")
    assert code == 0


@pytest.mark.parametrize("name", ["michaelis-menten", "emanuel-knorre", "mapk-biomd26", "zero-complex"])
def test_verify_bundled(capsys, name):
    for engine in ("brute", "lex", "ilp"):
        assert run(capsys, "minimal", name, "--engine", engine, "--verify")[0] == 0


def test_verify_on_1000_random_nets(capsys, tmp_path):
    rng = random.Random(31)
    path = tmp_path / "r.rxn"
    for seed in range(1000):
        m, r = rng.randint(1, 10), rng.randint(1, 15)
        run(capsys, "gen", "--seed", str(seed), "--species", str(m), "--steps", str(r), "-o", str(path))
        for engine in ("brute", "lex", "ilp"):
            code, out, err = run(capsys, "minimal", str(path), "--engine", engine, "--verify")
            assert code == 0, (seed, engine, err)


def test_quiet_hides_warnings(capsys):
    _, _, err = run(capsys, "saving", "michaelis-menten")
    assert "warning" in err
    _, _, err = run(capsys, "--quiet", "saving", "michaelis-menten")
    assert err == ""

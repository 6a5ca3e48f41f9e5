import json
import random
import subprocess
import sys

import pytest

from braidkit import pipeline
from braidkit.cli import main
from braidkit.core import parse_word


def run(capsys, *argv):
    try:
        code = main(list(argv))
    except SystemExit as exc:  # argparse rejects malformed flags itself
        code = exc.code
    out, err = capsys.readouterr()
    return code, out, err


def test_encode(capsys):
    code, out, err = run(capsys, "encode", "--encoding", "es2", "abAB")
    assert code == 0
    assert out.splitlines() == ["1 1 0 1", "-1 0 -1 -1", "0 -1 1 0"]
    assert err.startswith("config: ")
    code, out, _ = run(capsys, "encode", "--encoding", "ep1", "")
    assert code == 0 and out == ""
    code, _, _ = run(capsys, "encode", "--encoding", "es1", "--strands", "4", "ac")
    assert code == 1


def test_encode_flat(capsys):
    code, out, _ = run(capsys, "encode", "--encoding", "es2", "--flat", "1212")
    assert out.splitlines() == ["1 1 0 1", "1 0 1 1", "0 1 1 0"]


def test_check_examples(capsys):
    code, out, _ = run(capsys, "check", "aBaBaB", "", "abaBAB")
    verdicts = [json.loads(line) for line in out.splitlines()]
    assert code == 0
    assert [v["trivial"] for v in verdicts] == [False, True, True]
    assert verdicts[0]["rejected_by"] == "AUT"


def test_check_matches_library_on_fuzzed_words(capsys, tmp_path):
    rng = random.Random(0)
    words = ["".join(rng.choice("aAbB") for _ in range(rng.choice(range(0, 21, 2)))) for _ in range(1000)]
    path = tmp_path / "words.txt"
    path.write_text("\n".join(words) + "\n")
    code, out, _ = run(capsys, "check", "--word-file", str(path), "--strategy", "cep-aut")
    assert code == 0
    got = [json.loads(line) for line in out.splitlines()]
    nonempty = [w for w in words if w]
    assert [g["word"] for g in got] == nonempty
    for g in got:
        assert g["trivial"] == pipeline.check(parse_word(g["word"]), "cep-aut").trivial


def test_usage_errors_under_fuzz(capsys):
    rng = random.Random(1)
    for _ in range(200):
        junk = "".join(rng.choice("aAbBcz19-,#") for _ in range(rng.randint(1, 8)))
        try:
            parse_word(junk)
        except ValueError:
            code, _, err = run(capsys, "check", junk)
            assert code == 2
    with pytest.raises(SystemExit) as exc:
        main(["nosuchcommand"])
    assert exc.value.code == 2
    code, _, _ = run(capsys, "check", "--strategy", "cep-ces2", "ab")
    assert code == 2


def test_untangle_and_certify(capsys, tmp_path):
    cert = tmp_path / "c.jsonl"
    code, _, _ = run(capsys, "untangle-flat", "1221", "-o", str(cert))
    assert code == 0
    assert len(cert.read_text().splitlines()) == 3
    code, out, _ = run(capsys, "untangle-flat", "--certify", str(cert))
    assert code == 0 and json.loads(out)["certified"]
    code, out, _ = run(capsys, "untangle-flat", "1212")
    assert json.loads(out)["invariant"] == [-1, 1, 0]
    lines = cert.read_text().splitlines()
    cert.write_text("\n".join(lines[:1] + ['{"kind":"R2_REMOVE","pos":3}']) + "\n")
    code, out, _ = run(capsys, "untangle-flat", "--certify", str(cert))
    assert code == 1 and not json.loads(out)["certified"]


def test_enumerate(capsys):
    code, out, _ = run(capsys, "enumerate", "--max-length", "8")
    assert out.splitlines() == ["0,1", "1,0", "2,4", "3,0", "4,28", "5,0", "6,244", "7,0", "8,2412"]


def test_gen_is_reproducible(capsys, tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    args = ["gen", "--strands", "3", "--length", "12", "--flat", "--encoding", "es2", "--balanced", "--count", "200", "--seed", "7"]
    assert run(capsys, *args, "-o", str(a))[0] == 0
    assert run(capsys, *args, "-o", str(b))[0] == 0
    assert a.read_bytes() == b.read_bytes()
    lines = a.read_text().splitlines()
    assert len(lines) == 201 and sum(line.endswith(",trivial") for line in lines) == 100


def test_gen_arff_and_errors(capsys, tmp_path):
    out = tmp_path / "d.arff"
    code, _, _ = run(capsys, "gen", "--length", "6", "--count", "4", "--format", "arff", "--seed", "3", "-o", str(out))
    assert code == 0 and '"seed": 3' in out.read_text()
    code, _, _ = run(capsys, "gen", "--length", "11", "--balanced", "--count", "4", "-o", str(out))
    assert code == 1
    code, _, _ = run(capsys, "gen", "--length", "6", "--balanced", "--count", "3", "-o", str(out))
    assert code == 2


def test_bench(capsys, tmp_path):
    out, hist = tmp_path / "b.csv", tmp_path / "h.csv"
    code, _, _ = run(
        capsys, "bench", "--lengths", "10,20", "--count", "100", "--strategies", "aut,cep-ces2-aut",
        "-o", str(out), "--histogram", str(hist),
    )
    assert code == 0
    lines = out.read_text().splitlines()
    assert lines[0].split(",") == pipeline.BENCH_HEADER and len(lines) == 5
    assert len(hist.read_text().splitlines()) == 61


def test_train(capsys, tmp_path):
    data, model, report = tmp_path / "d.csv", tmp_path / "m.json", tmp_path / "r.json"
    run(capsys, "gen", "--length", "8", "--flat", "--balanced", "--count", "200", "--seed", "1", "-o", str(data))
    code, out, _ = run(
        capsys, "train", "--data", str(data), "--flat", "--hidden", "0", "--condition", "CES2",
        "--model", str(model), "--report", str(report),
    )
    assert code == 0
    rep = json.loads(out)
    assert rep["weighted_precision"] > 0.9 and rep["agreement"]["CES2"] > 0.9
    assert json.loads(model.read_text())["hidden"] == 0
    code, out, _ = run(capsys, "train", "--data", str(data), "--flat", "--sweep", "0", "--epochs", "5")
    assert out.splitlines()[0] == "H,split50,split67,split75,fold2,fold3,fold4"
    code, _, _ = run(capsys, "train", "--data", str(tmp_path / "missing.csv"))
    assert code == 2


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "braidkit", "check", "abAB"], capture_output=True, text=True)
    assert res.returncode == 0 and json.loads(res.stdout)["trivial"] is False

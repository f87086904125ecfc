import json
import shutil
import subprocess
import sys
from pathlib import Path

import pytest

from causalsum import acceptance
from causalsum.cli import main
from causalsum.formats import load_model, read_sequent
from causalsum.proofs import corpus
from causalsum.semantics import satisfies_sequent

ROOT = Path(__file__).resolve().parent.parent
DATA = ROOT / "data"


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def test_eval_frontdoor(capsys):
    code, out, err = run(capsys, "eval", "--model", DATA / "frontdoor.scm",
                         "--formula", DATA / "concl.fml", "--json", "-")
    assert code == 0
    # with --json - the human lines move to stderr
    assert "valid in the model" in err
    body = json.loads(out)
    assert body["schema"] == 1 and body["valid"] is True
    assert len(body["rows"]) == 4


def test_sat_writes_a_witness_that_reloads(capsys, tmp_path):
    w = tmp_path / "w.scm"
    code, out, _ = run(capsys, "sat", "--n", 2, "--denom", 8, DATA / "gamma.seq", "--out", w)
    assert code == 0 and out.startswith("SAT")
    assert satisfies_sequent(load_model(w), read_sequent(DATA / "gamma.seq"))


def test_sat_unsat_is_definitive(capsys):
    code, out, _ = run(capsys, "sat", "--n", 1, "--denom", 1, DATA / "gamma.seq")
    assert code == 0 and out.startswith("UNSAT")


def test_prove_corpus_name(capsys):
    code, out, _ = run(capsys, "prove", "--system", "AX_2", "sum_eq_2")
    assert code == 0 and "sum_eq_2: verified" in out


def test_circuit_commands(capsys, tmp_path):
    code, out, _ = run(capsys, "circuit", "feasible", "--tree", "sum_product")
    assert code == 0 and "x0=1/2, x1=1/2" in out
    net = tmp_path / "t.ckt"
    assert run(capsys, "circuit", "encode", "--tree", "x_plus_x", "--out", net)[0] == 0
    code, out, _ = run(capsys, "circuit", "decode", net, "--width", 3)
    assert code == 0 and out.splitlines()[0] == "(= (+ x0 x0) 2)"


def test_unknown_exit_code(capsys):
    code, out, _ = run(capsys, "find-countermodel", DATA / "implication_gap.seq",
                       "--max-range", 2, "--random-models", 20)
    assert code == 2 and "UNKNOWN" in out


def test_error_exit_code(capsys):
    code, _, err = run(capsys, "eval", "--model", "missing.scm", "--formula", "P(X=c1) >= 0")
    assert code == 1 and "error" in err


def test_json_is_byte_identical(capsys, tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for path in (a, b):
        run(capsys, "find-countermodel", "|- P(X=c1) == P(X=c2)", "--seed", 7,
            "--random-models", 30, "--json", path)
    assert a.read_bytes() == b.read_bytes()
    body = json.loads(a.read_text())
    assert list(body) == sorted(body)


def test_corpus_only(capsys):
    code, out, _ = run(capsys, "corpus", "--only", "cwc")
    assert code == 0
    assert out.startswith("[PASS] 3. cwc")


def test_corrupted_corpus_is_a_named_failure(capsys, tmp_path, monkeypatch):
    bad = tmp_path / "corpus"
    shutil.copytree(corpus.CORPUS_DIR, bad)
    f = bad / "mp_chain.prf"
    f.write_text(f.read_text().replace("FROM s4, s3", "FROM s1, s3"))
    monkeypatch.setattr(corpus, "CORPUS_DIR", bad)
    code, out, _ = run(capsys, "corpus", "--only", "proofs")
    assert code == 1
    assert "[FAIL] 8. proofs" in out and "mp_chain" in out
    assert not acceptance.run("proofs").ok


def test_console_script_entry():
    exe = shutil.which("causalsum")
    cmd = [exe] if exe else [sys.executable, "-m", "causalsum"]
    r = subprocess.run(cmd + ["parse", "P(X=c1) >= 1/2"], capture_output=True, text=True)
    assert r.returncode == 0, r.stderr

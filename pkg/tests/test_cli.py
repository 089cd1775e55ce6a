import json
import subprocess
import sys
from pathlib import Path

import pytest

from relclass.cli import EXIT_BUDGET, EXIT_INPUT, EXIT_OK, EXIT_VIOLATION, load_corpus, main

ROOT = Path(__file__).resolve().parent.parent


def run_cli(args):
    proc = subprocess.run(
        [sys.executable, "-m", "relclass.cli", *args], capture_output=True, text=True, cwd=str(ROOT)
    )
    return proc.returncode, proc.stdout, proc.stderr


def test_field_rational():
    code, out, err = run_cli(["field", "--n", "1"])
    assert code == EXIT_OK
    data = json.loads(out)
    assert data["hF"] == 1 and data["dF"] == 1


def test_field_quadratic_and_rejection():
    code, out, _ = run_cli(["field", "--n", "2", "--m", "5"])
    assert code == EXIT_OK and json.loads(out)["dF"] == 5
    code, out, err = run_cli(["field", "--n", "2", "--m", "12"])
    assert code == EXIT_INPUT
    assert "NonSquarefree" in err


def test_classify_examples():
    code, out, _ = run_cli(["classify", "--n", "1", "--delta-a", "-5"])
    assert code == EXIT_OK
    data = json.loads(out)
    assert data["weak_classes"] == 2 and data["h_K"] == 2 and data["bijection_ok"]
    code, out, _ = run_cli(["classify", "--n", "1", "--delta-a", "-1"])
    assert json.loads(out)["weak_classes"] == 1
    code, out, _ = run_cli(["classify", "--n", "1", "--delta-a", "-23"])
    data = json.loads(out)
    assert data["orbits"] == 2 and data["h_K"] == 3


def test_corpus_parsing(tmp_path):
    p = tmp_path / "c.txt"
    p.write_text("# comment\n1,-,-5,0,2,2\n\n2,5,-11,0\n")
    entries = load_corpus(str(p))
    assert len(entries) == 2
    assert entries[0].expected_hK == 2 and entries[0].expected_t == 2
    assert entries[1].m == 5 and entries[1].expected_hK is None


def test_verify_ok_and_violation(tmp_path):
    p = tmp_path / "good.txt"
    p.write_text("1,-,-5,0,2,2\n1,-,-23,0,3,1\n")
    code, out, _ = run_cli(["verify", "--corpus", str(p), "--checks", "regression,genus,vsum"])
    assert code == EXIT_OK
    data = json.loads(out)
    assert data["summary"]["violations"] == 0
    bad = tmp_path / "bad.txt"
    bad.write_text("1,-,-5,0,7,2\n")
    code, out, _ = run_cli(["verify", "--corpus", str(bad), "--checks", "regression"])
    assert code == EXIT_VIOLATION
    assert json.loads(out)["summary"]["violations"] == 1


def test_verify_empty_corpus(tmp_path):
    p = tmp_path / "empty.txt"
    p.write_text("# nothing\n")
    code, out, _ = run_cli(["verify", "--corpus", str(p)])
    assert code == EXIT_OK
    assert json.loads(out)["summary"]["entries"] == 0


def test_verify_missing_corpus():
    code, _, err = run_cli(["verify", "--corpus", "/nonexistent/file.txt"])
    assert code == EXIT_INPUT


def test_bound_rows(tmp_path):
    p = tmp_path / "c.txt"
    p.write_text("1,-,-5,0\n2,5,-11,0\n")
    code, out, _ = run_cli(
        ["bound", "--corpus", str(p), "--lambda-grid", "1e29,1e30", "--pmax", "400"]
    )
    assert code == EXIT_OK
    rows = json.loads(out)
    assert rows[0]["status"] == "ok"
    assert float(rows[0]["bound"]) <= rows[0]["h_K"]
    assert rows[0]["rigor_G1"] == "heuristic"
    assert rows[0]["vsum_ok"] is True
    # the quartic base field has odd-s 37-splitting: flagged, not failed
    assert rows[1]["status"].startswith("ParityFails")


def test_bound_injected(tmp_path):
    inj = tmp_path / "g.json"
    inj.write_text(json.dumps({"G1": 1e-12, "G2": 25.0, "G3": 1e6}))
    p = tmp_path / "c.txt"
    p.write_text("1,-,-23,0\n")
    code, out, _ = run_cli(
        [
            "bound",
            "--corpus",
            str(p),
            "--strategy",
            f"injected:{inj}",
            "--lambda-grid",
            "1e37,1e39",
            "--pmax",
            "300",
        ]
    )
    assert code == EXIT_OK
    rows = json.loads(out)
    assert rows[0]["rigor_G1"] == "injected"
    assert rows[0]["status"] == "ok"


def test_csv_output(tmp_path):
    p = tmp_path / "c.txt"
    p.write_text("1,-,-5,0,2,\n")
    code, out, _ = run_cli(["verify", "--corpus", str(p), "--checks", "regression", "--csv"])
    assert code == EXIT_OK
    lines = out.strip().splitlines()
    assert len(lines) == 2 and "entry" in lines[0]

import csv
import io
import json
import shutil
import subprocess
import sys

import pytest

from neuroscore.cli import EXIT_CONFIG, EXIT_CONTRACT, EXIT_OK, EXIT_PARSE, EXIT_USAGE, main
from neuroscore.lexicon import DEFAULT_LEXICON_DIR


def tree_bytes(root):
    return {p.relative_to(root).as_posix(): p.read_bytes() for p in sorted(root.rglob("*")) if p.is_file()}


@pytest.fixture(scope="module")
def corpus(tmp_path_factory):
    out = tmp_path_factory.mktemp("corpus")
    assert main(["synth", "--count", "6", "--seed", "5", "--out", str(out),
                 "--substitution", "0.3", "--recovery", "0.5"]) == EXIT_OK
    return out


def test_synth_layout(corpus):
    manifest = json.loads((corpus / "manifest.json").read_text())
    assert len(manifest["sessions"]) == 6
    assert len(list((corpus / "sessions").glob("*_manual.jsonl"))) == 6
    assert manifest["generator"].startswith("mt19937")


def test_synth_is_byte_identical(tmp_path, corpus):
    main(["synth", "--count", "6", "--seed", "5", "--out", str(tmp_path),
          "--substitution", "0.3", "--recovery", "0.5"])
    assert tree_bytes(tmp_path) == tree_bytes(corpus)


def test_synth_count_zero(tmp_path):
    assert main(["synth", "--count", "0", "--out", str(tmp_path)]) == EXIT_OK
    assert json.loads((tmp_path / "manifest.json").read_text())["sessions"] == []


def test_synth_unwritable(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    assert main(["synth", "--count", "1", "--out", str(blocker / "sub")]) != EXIT_OK


def test_score_formats(corpus, capsys):
    session = str(corpus / "sessions" / "S001_manual.jsonl")
    assert main(["score", session, "--format", "csv"]) == EXIT_OK
    rows = list(csv.DictReader(io.StringIO(capsys.readouterr().out)))
    items = {r["item"]: r for r in rows}
    assert items["SKT_total"]["status"] == "scored"
    assert main(["score", session, "--format", "jsonl"]) == EXIT_OK
    lines = capsys.readouterr().out.splitlines()
    assert all(json.loads(line)["subject_id"] == "S001" for line in lines)
    assert main(["score", session]) == EXIT_OK
    assert "CERAD_total" in capsys.readouterr().out


def test_score_lists_unscored(tmp_path, corpus, capsys):
    text = (corpus / "sessions" / "S001_manual.jsonl").read_text()
    stripped = "".join(l + "\n" for l in text.splitlines() if '"recognition"' not in l)
    p = tmp_path / "s.jsonl"
    p.write_text(stripped)
    assert main(["score", str(p), "--format", "csv"]) == EXIT_OK
    rows = {r["item"]: r for r in csv.DictReader(io.StringIO(capsys.readouterr().out))}
    assert rows["CERAD7"]["status"] == "unscored"


def test_bad_lexicon_path(tmp_path, corpus, capsys):
    out = tmp_path / "report.csv"
    code = main(["score", str(corpus / "sessions" / "S001_manual.jsonl"),
                 "--lexicons", str(tmp_path / "nope"), "--out", str(out)])
    assert code == EXIT_CONFIG
    captured = capsys.readouterr()
    assert captured.out == "" and not out.exists()
    assert "nope" in captured.err


def test_parse_error_names_file_and_line(tmp_path, capsys):
    p = tmp_path / "bad.jsonl"
    p.write_text('{"kind": "header", "subject_id": "x", "age": 70, "sex": "f", '
                 '"iq_band": "avg", "education_years": 9}\n{oops\n')
    assert main(["score", str(p)]) == EXIT_PARSE
    assert f"{p}:2" in capsys.readouterr().err


def test_evaluate(corpus, tmp_path, capsys):
    out1, out2 = tmp_path / "a", tmp_path / "b"
    args = [str(corpus / "manifest.json"), str(corpus / "ground_truth.csv")]
    assert main(["evaluate", *args, "--out", str(out1)]) == EXIT_OK
    assert main(["evaluate", *args, "--out", str(out2)]) == EXIT_OK
    assert (out1 / "correlations.csv").read_bytes() == (out2 / "correlations.csv").read_bytes()
    rows = list(csv.DictReader(io.StringIO((out1 / "correlations.csv").read_text())))
    manual = [r for r in rows if r["column"] == "manual" and r["status"] == "ok"]
    assert manual and all(abs(float(r["r"]) - 1) < 1e-9 for r in manual)
    assert "Trans." in (out1 / "correlations.txt").read_text()


def test_evaluate_empty_manifest(tmp_path, capsys):
    (tmp_path / "manifest.json").write_text('{"sessions": []}')
    (tmp_path / "e.csv").write_text("subject_id,key,value\n")
    assert main(["evaluate", str(tmp_path / "manifest.json"), str(tmp_path / "e.csv")]) == EXIT_CONTRACT


def test_validate(tmp_path, capsys):
    assert main(["validate"]) == EXIT_OK
    assert "SYNTHETIC" in capsys.readouterr().out
    lexdir = tmp_path / "lex"
    shutil.copytree(DEFAULT_LEXICON_DIR, lexdir)
    (lexdir / "skt_objects_A.tsv").write_text("hund\nhund\n")
    assert main(["validate", "--lexicons", str(lexdir)]) == EXIT_CONTRACT


def test_usage_errors(capsys):
    with pytest.raises(SystemExit) as info:
        main(["score"])
    assert info.value.code == EXIT_USAGE
    with pytest.raises(SystemExit) as info:
        main(["evaluate", "m", "e", "--alternatives", "0"])
    assert info.value.code == EXIT_USAGE


def test_console_script_runs():
    exe = shutil.which("neuroscore")
    cmd = [exe] if exe else [sys.executable, "-m", "neuroscore.cli"]
    done = subprocess.run(cmd + ["--help"], capture_output=True, text=True)
    assert done.returncode == 0 and "evaluate" in done.stdout

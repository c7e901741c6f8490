import json

import pytest

from eat.cli import main
from conftest import FIXTURES


def run_args(tmp_path, *extra):
    return ["run", "--input", str(FIXTURES / "zh_e2e.bio"), "--lang", "zh", "--backend", "replay",
            "--fixtures", str(FIXTURES / "llm_store"), "--backend-id", "mock:scripted",
            "--out", str(tmp_path / "out"), *extra]


def test_run_replay(tmp_path, capsys):
    assert main(run_args(tmp_path)) == 0
    assert "sentences: 10 failures: 0" in capsys.readouterr().out
    out = tmp_path / "out"
    assert (out / "predictions.bio").read_bytes().rstrip() == (FIXTURES / "zh_e2e.bio").read_bytes().rstrip()
    assert json.loads((out / "manifest.json").read_text())["backend_id"] == "mock:scripted"


def test_run_missing_fixtures(tmp_path, capsys):
    args = run_args(tmp_path)
    args[args.index("--fixtures") + 1] = str(tmp_path / "missing")
    assert main(args) == 1
    assert "config error" in capsys.readouterr().err


def test_run_rounds_zero(tmp_path):
    assert main(run_args(tmp_path, "--rounds", "0")) == 1


def test_run_replay_miss_reports_digest(tmp_path, capsys):
    assert main(run_args(tmp_path, "--rounds", "3")) == 3
    assert "replay miss: digest" in capsys.readouterr().err


def test_run_bad_input(tmp_path):
    bad = tmp_path / "bad.bio"
    bad.write_text("x I-PER\n", encoding="utf-8")
    args = run_args(tmp_path)
    args[args.index("--input") + 1] = str(bad)
    assert main(args) == 2


def test_record_needs_credentials(tmp_path, monkeypatch):
    monkeypatch.delenv("EAT_API_BASE", raising=False)
    monkeypatch.delenv("EAT_API_KEY", raising=False)
    args = ["record", "--input", str(FIXTURES / "zh_e2e.bio"), "--lang", "zh",
            "--fixtures", str(tmp_path / "rec"), "--out", str(tmp_path / "out"), "--model", "m"]
    assert main(args) == 1


def test_unknown_flag_fails_fast(tmp_path):
    assert main(run_args(tmp_path, "--bogus")) == 1


@pytest.mark.parametrize("command", ["run", "record", "eval", "translate-metrics", "build-eacl"])
def test_help(command, capsys):
    assert main([command, "--help"]) == 0
    assert "--" in capsys.readouterr().out


def write(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text, encoding="utf-8")
    return str(p)


def test_eval_identical(tmp_path, capsys):
    gold = str(FIXTURES / "zh_e2e.bio")
    assert main(["eval", "--gold", gold, "--pred", gold]) == 0
    assert json.loads(capsys.readouterr().out)["f1"]["f1"] == 1.0


def test_eval_derived_case(tmp_path, capsys):
    gold = write(tmp_path, "g.bio", "Gao B-PER\nMing I-PER\nin O\nBeijing B-LOC\n\n")
    pred = write(tmp_path, "p.bio", "Gao B-PER\nMing O\nin O\nBeijing B-ORG\n\n")
    assert main(["eval", "--gold", gold, "--pred", pred]) == 0
    f1 = json.loads(capsys.readouterr().out)["f1"]
    assert (f1["tp"], f1["fp"], f1["fn"], f1["f1"]) == (1, 1, 2, 0.4)


def test_eval_token_count_mismatch(tmp_path, capsys):
    gold = write(tmp_path, "g.bio", "a O\nb O\n\nc O\n\n")
    pred = write(tmp_path, "p.bio", "a O\nb O\n\nc O\nd O\n\n")
    assert main(["eval", "--gold", gold, "--pred", pred]) == 2
    assert "sentence 1" in capsys.readouterr().err


def test_translate_metrics_identical(tmp_path, capsys):
    a = write(tmp_path, "a.txt", "the cat sat on the mat\na b c b a c\n")
    assert main(["translate-metrics", "--original", a, "--roundtrip", a]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["mean_bleu"] == 1.0 and doc["mean_entropy_loss"] == 1.0


def test_translate_metrics_cat_sat(tmp_path, capsys):
    orig = write(tmp_path, "o.txt", "the cat sat on the mat\n")
    rt = write(tmp_path, "r.txt", "the cat sat on mat\n")
    assert main(["translate-metrics", "--original", orig, "--roundtrip", rt]) == 0
    assert abs(json.loads(capsys.readouterr().out)["mean_bleu"] - 0.57893) < 1e-4


def test_translate_metrics_chars(tmp_path, capsys):
    text = write(tmp_path, "zh.txt", "高明在北京工作\n")
    assert main(["translate-metrics", "--original", text, "--roundtrip", text]) == 0
    assert json.loads(capsys.readouterr().out)["mean_bleu"] == 0.0
    assert main(["translate-metrics", "--original", text, "--roundtrip", text, "--chars"]) == 0
    assert json.loads(capsys.readouterr().out)["mean_bleu"] == 1.0


def test_translate_metrics_line_mismatch(tmp_path):
    a = write(tmp_path, "a.txt", "x y\n")
    b = write(tmp_path, "b.txt", "x y\nz\n")
    assert main(["translate-metrics", "--original", a, "--roundtrip", b]) == 2


def eacl_args(tmp_path, entities, *extra):
    return ["build-eacl", "--entities", str(entities), "--langs", "ja,zh", "--out", str(tmp_path / "eacl"),
            "--fixtures", str(FIXTURES / "wiki_store"), "--rate", "1000", *extra]


def test_build_eacl_from_fixtures(tmp_path, capsys):
    assert main(eacl_args(tmp_path, FIXTURES / "wiki_entities.txt")) == 0
    out = tmp_path / "eacl"
    zh = json.loads((out / "eacl_zh.json").read_text(encoding="utf-8"))
    assert [r["conversations"][1]["value"] for r in zh] == ["德国", "日本", "比尔·克林顿"]
    counts = json.loads((out / "counts.json").read_text(encoding="utf-8"))
    assert counts["ja"]["pairs"] == 2 and counts["zh"]["pairs"] == 3
    assert "zh\tpairs=3" in capsys.readouterr().out


def test_build_eacl_empty_entities(tmp_path):
    empty = write(tmp_path, "none.txt", "")
    assert main(eacl_args(tmp_path, empty)) == 0
    assert json.loads((tmp_path / "eacl" / "eacl_zh.json").read_text()) == []


def test_build_eacl_rerun_identical(tmp_path):
    assert main(eacl_args(tmp_path, FIXTURES / "wiki_entities.txt")) == 0
    first = (tmp_path / "eacl" / "eacl_ja.json").read_bytes()
    assert main(eacl_args(tmp_path, FIXTURES / "wiki_entities.txt")) == 0
    assert (tmp_path / "eacl" / "eacl_ja.json").read_bytes() == first


def test_build_eacl_bad_language(tmp_path):
    args = eacl_args(tmp_path, FIXTURES / "wiki_entities.txt")
    args[args.index("--langs") + 1] = "japanese"
    assert main(args) == 1

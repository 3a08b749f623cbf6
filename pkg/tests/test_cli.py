import json
import os
import subprocess
import sys

import pytest

from manas.cli import SUBCOMMANDS, main
from manas.report import SWEEP_TITLE, parse_report_markdown


@pytest.fixture
def workdir(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    monkeypatch.delenv("MANAS_SEED", raising=False)
    assert main(["synth", "--n", "120", "--seed", "7", "--output", "corpus.csv"]) == 0
    return tmp_path


def test_synth_train_predict(workdir, capsys):
    assert main(["train", "--algo", "rfc", "--corpus", "corpus.csv", "--n-trees", "5"]) == 0
    assert (workdir / "model.rfc.mdl").exists()
    capsys.readouterr()
    assert main(["predict", "--model", "model.rfc.mdl", "--text", "সময়"]) == 0
    out = capsys.readouterr().out.splitlines()
    assert out[0] in ("label: 1 (Yes)", "label: 0 (No)")
    assert out[1].startswith("probability: ") and len(out[1].split(".")[1]) == 6


def test_unknown_algorithm_is_usage_error(workdir, capsys):
    assert main(["train", "--algo", "xgb"]) == 1
    err = capsys.readouterr().err
    assert "usage:" in err and "xgb" in err


def test_unknown_flag(workdir, capsys):
    assert main(["synth", "--bogus"]) == 1
    assert "usage:" in capsys.readouterr().err


def test_no_subcommand(capsys):
    assert main([]) == 1


@pytest.mark.parametrize("command", SUBCOMMANDS)
def test_help_exits_zero(command, capsys):
    assert main([command, "--help"]) == 0
    assert "usage:" in capsys.readouterr().out


def test_top_level_help(capsys):
    assert main(["--help"]) == 0


def test_missing_corpus_is_data_error(workdir, capsys):
    assert main(["train", "--algo", "mnb", "--corpus", "missing.csv"]) == 2
    assert "[corpus]" in capsys.readouterr().err


def test_degenerate_split_names_stage(workdir, capsys):
    assert main(["train", "--algo", "mnb", "--corpus", "corpus.csv", "--fraction", "0.005"]) == 2
    assert "[split]" in capsys.readouterr().err


def test_tampered_model_exit_2(workdir, capsys):
    assert main(["train", "--algo", "mnb", "--corpus", "corpus.csv"]) == 0
    path = workdir / "model.mnb.mdl"
    body = json.loads(path.read_text(encoding="utf-8"))
    body["vocabulary"] = body["vocabulary"][:-1] + ["অচেনা"]
    path.write_text(json.dumps(body, ensure_ascii=False), encoding="utf-8")
    capsys.readouterr()
    assert main(["predict", "--model", str(path), "--text", "সময়"]) == 2
    err = capsys.readouterr().err
    assert "CorruptModelFile" in err
    assert "[model]" in err


def test_compare_splits_byte_identical(workdir, capsys):
    args = ["compare-splits", "--corpus", "corpus.csv", "--algos", "mnb", "lr", "--fractions", "0.5", "0.8"]
    outputs = []
    for run in ("a", "b"):
        assert main(args + ["--results", f"{run}.json", "--report-md", f"{run}.md",
                            "--report-csv", f"{run}.csv", "--quiet"]) == 0
        outputs.append([(workdir / f"{run}.{ext}").read_bytes() for ext in ("json", "md", "csv")])
    assert outputs[0] == outputs[1]
    doc = parse_report_markdown(outputs[0][1].decode("utf-8"))
    assert doc[SWEEP_TITLE][0] == ["Train/Test Size", "MNB", "LR"]


def test_evaluate_and_report(workdir):
    assert main(["evaluate", "--corpus", "corpus.csv", "--algos", "mnb", "dtc"]) == 0
    for name in ("results.json", "report.md", "report.csv", "figures.csv"):
        assert (workdir / name).exists()
    first = (workdir / "report.md").read_bytes()
    (workdir / "report.md").unlink()
    assert main(["report", "--format", "markdown"]) == 0
    assert (workdir / "report.md").read_bytes() == first


def test_report_missing_results(workdir):
    assert main(["report", "--results", "nope.json"]) == 2


def test_wordfreq(workdir, capsys):
    assert main(["wordfreq", "--corpus", "corpus.csv", "--top", "5", "--quiet"]) == 0
    lines = (workdir / "wordfreq.csv").read_text(encoding="utf-8").splitlines()
    assert lines[0] == "rank,token,count" and len(lines) == 6


def test_config_echoed(workdir, capsys):
    assert main(["--seed", "3", "synth", "--n", "20", "--output", "x.csv"]) == 0
    err = capsys.readouterr().err
    line = next(l for l in err.splitlines() if l.startswith("config: "))
    assert json.loads(line[len("config: "):])["seed"] == 3


def _echoed_seed(capsys):
    err = capsys.readouterr().err
    line = next(l for l in err.splitlines() if l.startswith("config: "))
    return json.loads(line[len("config: "):])["seed"]


def test_seed_precedence(workdir, capsys, monkeypatch):
    capsys.readouterr()
    (workdir / "cfg.ini").write_text("[global]\nseed = 11\n[synth]\nn = 30\n", encoding="utf-8")
    monkeypatch.setenv("MANAS_SEED", "5")
    assert main(["synth", "--output", "x.csv"]) == 0
    assert _echoed_seed(capsys) == 5
    assert main(["--config", "cfg.ini", "synth", "--output", "x.csv"]) == 0
    assert _echoed_seed(capsys) == 11
    assert main(["--config", "cfg.ini", "synth", "--output", "x.csv", "--seed", "2"]) == 0
    assert _echoed_seed(capsys) == 2


def test_config_file_sets_flags_and_cli_overrides(workdir, capsys):
    (workdir / "cfg.ini").write_text("[synth]\nn = 30\nbalance = 0.25\n", encoding="utf-8")
    assert main(["--config", "cfg.ini", "synth", "--output", "a.csv"]) == 0
    assert len((workdir / "a.csv").read_text(encoding="utf-8").splitlines()) == 31
    assert main(["--config", "cfg.ini", "synth", "--n", "12", "--output", "b.csv"]) == 0
    assert len((workdir / "b.csv").read_text(encoding="utf-8").splitlines()) == 13


@pytest.mark.parametrize("body", ["[synth]\nbogus = 1\n", "[nowhere]\nn = 1\n", "[synth]\nn = abc\n"])
def test_bad_config_file(workdir, capsys, body):
    (workdir / "cfg.ini").write_text(body, encoding="utf-8")
    assert main(["--config", "cfg.ini", "synth", "--output", "x.csv"]) == 1


def test_module_entry_point(tmp_path):
    env = dict(os.environ)
    env.pop("MANAS_SEED", None)
    proc = subprocess.run([sys.executable, "-m", "manas", "train", "--algo", "xgb"],
                          capture_output=True, text=True, cwd=tmp_path, env=env)
    assert proc.returncode == 1 and "usage:" in proc.stderr


def test_quiet_suppresses_summaries(workdir, capsys):
    capsys.readouterr()
    assert main(["synth", "--n", "20", "--output", "q.csv", "--quiet"]) == 0
    assert main(["train", "--algo", "mnb", "--corpus", "q.csv", "--fraction", "0.5", "--quiet"]) == 0
    assert capsys.readouterr().out == ""

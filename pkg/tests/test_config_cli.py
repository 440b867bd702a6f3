import json
import os
import subprocess
import sys
from pathlib import Path

import pytest

from conftest import DATA
from defectpred.cli import main
from defectpred.config import apply_setting, known_keys, load_config, parse_config_text, parse_value
from defectpred.errors import ConfigError
from defectpred.config import PipelineConfig

FAST = ["--folds", "2", "--set", "rf.trees=10"]


def test_parse_value():
    assert parse_value(" 10 ") == 10
    assert parse_value("0.5") == 0.5
    assert parse_value("yes") is True
    assert parse_value("none") is None
    assert parse_value("[1, 2, 2]") == [1, 2, 2]
    assert parse_value("[cart, rf]") == ["cart", "rf"]
    assert parse_value('"quoted"') == "quoted"


def test_parse_config_text():
    cfg = parse_config_text(
        "# comment\nrepo = ../cli\nfolds = 5\nmodels = nb, lr, vote\n"
        "vote.scheme = hard\nvote.weights = [1, 1, 1, 1, 1, 1, 2]\nrf.trees = 50\nknn.k = 3\n")
    assert cfg.repo == "../cli"
    assert cfg.folds == 5
    assert cfg.models == ["gnb", "logreg", "vote"]
    assert cfg.vote_scheme == "hard"
    assert cfg.vote_spec().weights == (1, 1, 1, 1, 1, 1, 2)
    assert (cfg.hyper.rf.trees, cfg.hyper.knn.k) == (50, 3)


def test_alias_sections_and_all_models():
    cfg = PipelineConfig()
    apply_setting(cfg, "lr.lam", 0.01)
    apply_setting(cfg, "models", "all")
    assert cfg.hyper.logreg.lam == 0.01
    assert len(cfg.models) == 8


@pytest.mark.parametrize("text, fragment", [
    ("rf.tres = 10", "rf.tres"),
    ("colour = blue", "colour"),
    ("folds = many", "folds"),
    ("models = cart, svr", "svr"),
    ("just a line", "line 1"),
])
def test_invalid_config(text, fragment):
    with pytest.raises(ConfigError, match=fragment):
        parse_config_text(text)


@pytest.mark.parametrize("override", [{"folds": 1}, {"knn.k": 0}, {"average": "macro"},
                                      {"vote.weights": [1, 2]}])
def test_validation(override):
    with pytest.raises(ConfigError):
        load_config(None, override)


def test_known_keys_cover_sections():
    keys = known_keys()
    assert "rf.trees" in keys and "vote.scheme" in keys and "seed" in keys


def test_load_config_file_and_overrides(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text("folds = 4\nseed = 1\n")
    cfg = load_config(path, {"seed": 9})
    assert (cfg.folds, cfg.seed) == (4, 9)
    with pytest.raises(ConfigError):
        load_config(tmp_path / "missing.cfg")


def test_cli_unknown_key_exit_code(capsys, tmp_path):
    code = main(["evaluate", "--dataset", str(DATA / "fixture_dataset.csv"), "--out", str(tmp_path / "r.json"),
                 "--set", "rf.tres=10"])
    assert code == 2
    assert "rf.tres" in capsys.readouterr().err


def test_subcommands_individually(fixture_repo, tmp_path):
    repo, _ = fixture_repo
    h, lab, ds, rep, md = (tmp_path / n for n in ("h.jsonl", "l.csv", "d.csv", "r.json", "r.md"))
    assert main(["mine", "--repo", str(repo), "--branch", "main", "--out", str(h)]) == 0
    assert main(["label", "--history", str(h), "--out", str(lab)]) == 0
    assert main(["featurize", "--history", str(h), "--labels", str(lab), "--out", str(ds)]) == 0
    assert ds.read_bytes().replace(b"\r\n", b"\n") == (DATA / "fixture_dataset.csv").read_bytes()
    assert main(["evaluate", "--dataset", str(ds), "--out", str(rep), *FAST]) == 0
    assert main(["report", "--report", str(rep), "--out", str(md)]) == 0
    report = json.loads(rep.read_text())
    assert len(report["models"]) == 8
    assert md.read_text().count("\n| ") == 9   # header + 8 model rows


def test_run_and_resume(fixture_repo, tmp_path, capsys):
    repo, _ = fixture_repo
    out = tmp_path / "out"
    args = ["run", "--repo", str(repo), "--branch", "main", "--out-dir", str(out), *FAST]
    assert main(args) == 0
    names = ("history.jsonl", "labels.csv", "dataset.csv", "report.json", "report.md")
    assert all((out / n).exists() for n in names)
    assert "mine, label, featurize, evaluate, report" in capsys.readouterr().out
    before = (out / "report.json").read_bytes()
    (out / "report.md").unlink()
    assert main(args + ["--resume"]) == 0
    assert capsys.readouterr().out.strip() == "stages run: report"
    assert (out / "report.md").exists()
    assert (out / "report.json").read_bytes() == before


def test_repository_error_exit_code(tmp_path, capsys):
    assert main(["mine", "--repo", str(tmp_path), "--out", str(tmp_path / "h.jsonl")]) == 3
    assert "mine" in capsys.readouterr().err


def test_unknown_branch_exit_code(fixture_repo, tmp_path):
    repo, _ = fixture_repo
    assert main(["mine", "--repo", str(repo), "--branch", "nope", "--out", str(tmp_path / "h.jsonl")]) == 3


def test_data_error_exit_code(tmp_path, capsys):
    bad = tmp_path / "d.csv"
    bad.write_text("commit_hash,path,n_authors,age_days,n_changes,loc,lines_added,lines_deleted,buggy\n"
                   "a,x,1,0.0,1,1,1,0,0\nb,y,1,0.0,1,1,1,0,1\n")
    code = main(["evaluate", "--dataset", str(bad), "--out", str(tmp_path / "r.json")])
    assert code == 4
    assert "evaluate" in capsys.readouterr().err


def test_console_script_entry_point(tmp_path):
    env = dict(os.environ)
    result = subprocess.run([sys.executable, "-m", "defectpred.cli", "--help"], capture_output=True, text=True,
                            env=env)
    assert result.returncode == 0
    for sub in ("mine", "label", "featurize", "evaluate", "report", "run"):
        assert sub in result.stdout

import json

import pytest

from triage.cli import main
from triage.corpus import write_csv
from triage.synthetic import synthetic_corpus


@pytest.fixture(scope="module")
def workdir(tmp_path_factory):
    d = tmp_path_factory.mktemp("cli")
    write_csv(synthetic_corpus(160, seed=21), d / "issues.csv")
    return d


def _run(*argv):
    return main([str(a) for a in argv])


def test_bad_model_is_usage_error(capsys):
    assert _run("train", "--model", "bogus", "--input", "x.csv") == 2
    assert "bogus" in capsys.readouterr().err


def test_bad_task_is_usage_error(capsys):
    assert _run("eval", "--task", "managers", "--input", "x.csv") == 2


def test_missing_input_file_is_data_error(tmp_path, capsys):
    assert _run("eval", "--input", tmp_path / "nope.csv") == 1
    err = capsys.readouterr().err.strip()
    assert "--input" in err and len(err.splitlines()) == 1


def test_missing_required_column_is_data_error(tmp_path, capsys):
    bad = tmp_path / "bad.csv"
    bad.write_text("summary,assignee_role\nx,Tester\n", encoding="utf-8")
    assert _run("eval", "--input", bad) == 1
    assert "description" in capsys.readouterr().err


def test_eval_writes_reports_deterministically(workdir, capsys):
    out1, out2 = workdir / "e1.json", workdir / "e2.json"
    for out in (out1, out2):
        assert _run("eval", "--task", "team", "--model", "rf", "--features", "curated", "--folds", 4,
                    "--input", workdir / "issues.csv", "--output", out) == 0
    assert out1.read_bytes() == out2.read_bytes()
    doc = json.loads(out1.read_text())
    assert doc["config"]["model"] == "rf" and doc["config"]["folds"] == 4 and doc["config"]["seed"] == 42
    assert len(doc["input_sha256"]) == 64
    assert 0.0 <= doc["metrics"]["accuracy"] <= 1.0
    assert (workdir / "e1.confusion.csv").read_bytes() == (workdir / "e2.confusion.csv").read_bytes()
    assert "Accuracy" in capsys.readouterr().out


def test_jobs_do_not_change_reports(workdir):
    outs = []
    for jobs in (1, 2):
        out = workdir / f"j{jobs}.json"
        assert _run("eval", "--model", "svm", "--folds", 3, "--jobs", jobs, "--input", workdir / "issues.csv",
                    "--output", out) == 0
        outs.append(out.read_bytes())
    assert outs[0] == outs[1]


def test_config_file_with_flag_override(workdir):
    cfg = workdir / "run.json"
    cfg.write_text(json.dumps({"model": "dt", "folds": 3, "seed": 5}), encoding="utf-8")
    out = workdir / "c.json"
    assert _run("eval", "--config", cfg, "--seed", 9, "--input", workdir / "issues.csv", "--output", out) == 0
    resolved = json.loads(out.read_text())["config"]
    assert (resolved["model"], resolved["folds"], resolved["seed"]) == ("dt", 3, 9)


def test_unknown_config_key_is_usage_error(workdir):
    cfg = workdir / "bad.json"
    cfg.write_text(json.dumps({"colour": "red"}), encoding="utf-8")
    assert _run("eval", "--config", cfg, "--input", workdir / "issues.csv") == 2


def test_compare_prints_decision(workdir, capsys):
    out = workdir / "cmp.json"
    assert _run("compare", "--a", "lr", "--b", "dt", "--alpha", 0.05, "--input", workdir / "issues.csv",
                "--output", out) == 0
    printed = capsys.readouterr().out
    assert "p-value" in printed and ("Accept" in printed or "Reject" in printed)
    doc = json.loads(out.read_text())["comparison"]
    assert 0.0 <= doc["p_value"] <= 1.0
    assert len(doc["p"]) == 5 and len(doc["s2"]) == 5


def test_importance_command(workdir):
    out = workdir / "imp.json"
    assert _run("importance", "--model", "rf", "--folds", 3, "--input", workdir / "issues.csv", "--output", out) == 0
    doc = json.loads(out.read_text())
    for method in ("TargetCoefficient", "ModelWeights"):
        assert len(doc["methods"][method]["top_k"]) == 8
        assert len(doc["methods"][method]["ranking"]) == 39


def test_ingest_and_featurize(workdir):
    norm = workdir / "norm.csv"
    assert _run("ingest", "--input", workdir / "issues.csv", "--output", norm) == 0
    assert json.loads((workdir / "norm.meta.json").read_text())["records"] == 160
    feats = workdir / "feats.csv"
    assert _run("featurize", "--features", "tfidf", "--input", norm, "--output", feats) == 0
    meta = json.loads((workdir / "feats.meta.json").read_text())
    assert len(meta["labels"]) == 160
    assert feats.read_text().splitlines()[0].split(",") == meta["columns"]


@pytest.fixture(scope="module")
def team_model(workdir):
    path = workdir / "model.json"
    assert _run("train", "--task", "team", "--model", "rf", "--input", workdir / "issues.csv", "--output", path) == 0
    return path


def _predict(model, tmp_path, issue, capsys):
    path = tmp_path / "issue.json"
    path.write_text(json.dumps(issue), encoding="utf-8")
    assert _run("predict", "--model", model, "--input", path) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    return {label: float(p) for label, p in (line.split("\t") for line in lines)}, lines


def test_predict_ranking_and_determinism(team_model, tmp_path, capsys):
    issue = {"summary": "Login page crash", "description": "server error when saving", "issue_type": "Bug"}
    probs, lines = _predict(team_model, tmp_path, issue, capsys)
    _, again = _predict(team_model, tmp_path, issue, capsys)
    assert lines == again
    assert sum(probs.values()) == pytest.approx(1.0, abs=1e-5)
    assert list(probs.values()) == sorted(probs.values(), reverse=True)


def test_test_words_raise_tester_probability(team_model, tmp_path, capsys):
    base = {"summary": "Login page update", "description": "please check the list view", "issue_type": "Task"}
    plain, _ = _predict(team_model, tmp_path, base, capsys)
    marked, _ = _predict(team_model, tmp_path, {**base, "description": base["description"] + " test request"}, capsys)
    assert marked["Tester"] > plain["Tester"]


def test_empty_description_predicts(team_model, tmp_path, capsys):
    probs, _ = _predict(team_model, tmp_path, {"summary": "Icon colour", "description": ""}, capsys)
    assert len(probs) == 4


def test_predict_missing_field(team_model, tmp_path, capsys):
    path = tmp_path / "issue.json"
    path.write_text(json.dumps({"summary": "only a summary"}), encoding="utf-8")
    assert _run("predict", "--model", team_model, "--input", path) == 1
    assert "description" in capsys.readouterr().err


def test_predict_version_mismatch(team_model, tmp_path, capsys):
    doc = json.loads(team_model.read_text())
    doc["version"] = 2
    stale = tmp_path / "stale.json"
    stale.write_text(json.dumps(doc), encoding="utf-8")
    issue = tmp_path / "issue.json"
    issue.write_text(json.dumps({"summary": "a", "description": "b"}), encoding="utf-8")
    assert _run("predict", "--model", stale, "--input", issue) == 1
    assert "v2" in capsys.readouterr().err

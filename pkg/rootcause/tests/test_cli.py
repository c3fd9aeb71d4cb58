import json
from pathlib import Path

import pytest

from rootcause.core.corpus import RootCause, load_corpus, save_corpus
from rootcause.main import EXIT_ERROR, EXIT_OK, EXIT_REJECTS, main
from rootcause.tests.conftest import make_record, write_jsonl


@pytest.fixture
def separable_file(tmp_path, separable):
    path = tmp_path / "separable.jsonl"
    save_corpus(separable, path, "jsonl")
    return str(path)


def _stderr_error(capsys):
    return json.loads(capsys.readouterr().err.strip().splitlines()[-1])


def test_ingest_clean_file(tmp_path, corpus_file, capsys):
    out = tmp_path / "clean.jsonl"
    assert main(["ingest", corpus_file, "--out", str(out)]) == EXIT_OK
    assert "Ingested 3 reports" in capsys.readouterr().out
    corpus, rejects = load_corpus(out, "jsonl")
    assert len(corpus) == 3 and rejects == []
    assert not Path(f"{out}.rejects.jsonl").exists()


def test_ingest_with_rejects_writes_a_sidecar(tmp_path, records, capsys):
    source = write_jsonl(tmp_path / "raw.jsonl", records + [make_record("B-1", "functional-issue")])
    out = tmp_path / "clean.jsonl"
    assert main(["ingest", source, "--out", str(out), "--json"]) == EXIT_REJECTS

    summary = json.loads(capsys.readouterr().out)
    assert summary["accepted"] == 3
    assert summary["rejected"] == 1
    sidecar = Path(summary["rejects_file"])
    [reject] = [json.loads(line) for line in sidecar.read_text(encoding="utf-8").splitlines()]
    assert reject["reason"] == "unknown label"
    assert reject["row"] == 4


def test_ingest_from_a_tracker(tmp_path, tracker_server, capsys):
    tracker_server.records = [make_record(f"T-{i}") for i in range(3)]
    out = tmp_path / "tracker.jsonl"
    code = main(["ingest", tracker_server.url, "--query", "product=Ant", "--out", str(out),
                 "--tracker-page-size", "2", "--tracker-token", "abc", "--json"])
    assert code == EXIT_OK
    assert json.loads(capsys.readouterr().out)["accepted"] == 3
    assert tracker_server.authorization[0] == "Bearer abc"
    assert len(load_corpus(out, "jsonl")[0]) == 3


def test_stats_table_and_json(study_corpus_file, capsys):
    assert main(["stats", study_corpus_file]) == EXIT_OK
    table = capsys.readouterr().out
    assert "41.3%" in table
    assert "Total labeled" in table

    assert main(["stats", study_corpus_file, "--json"]) == EXIT_OK
    data = json.loads(capsys.readouterr().out)
    assert data["frequency"]["program-anomaly-issue"]["count"] == 470
    assert sum(v["share"] for v in data["frequency"].values()) == pytest.approx(1.0)
    assert data["ecosystems"][-1]["ecosystem"] == "Overall"


def test_train_then_classify(tmp_path, separable_file, capsys):
    model_path = tmp_path / "model.json"
    assert main(["train", separable_file, "--out", str(model_path), "--json"]) == EXIT_OK
    trained = json.loads(capsys.readouterr().out)
    assert trained["reports"] == 180
    assert trained["features"] > 0
    assert model_path.exists()

    new = write_jsonl(tmp_path / "new.jsonl", [make_record("N-1", None, "the of and with")])
    predictions_path = tmp_path / "predictions.jsonl"
    assert main(["classify", new, "--model", str(model_path), "--out", str(predictions_path)]) == EXIT_OK
    [prediction] = [json.loads(line) for line in predictions_path.read_text(encoding="utf-8").splitlines()]
    assert prediction["id"] == "N-1"
    assert prediction["summary"] == "the of and with"
    assert prediction["project"] == "ant"
    assert prediction["events"] == []
    assert prediction["predicted_label"] in {c.value for c in RootCause}
    assert prediction["warnings"] == ["zero-vector"]
    assert sum(prediction["probabilities"].values()) == pytest.approx(1.0)


def test_evaluate_json(separable_file, capsys):
    code = main(["evaluate", separable_file, "--evaluate-runs", "1", "--evaluate-folds", "2", "--json"])
    assert code == EXIT_OK
    report = json.loads(capsys.readouterr().out)
    assert report["runs"] == 1 and report["folds"] == 2
    assert report["overall"]["f_measure"] > 0.9


def test_timefix_csv(separable_file, capsys):
    assert main(["timefix", separable_file, "--timefix-metric", "dbr"]) == EXIT_OK
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "category,metric,n,min,q1,median,mean,q3,max"
    assert len(lines) == 10
    assert all(",DBR,20," in line for line in lines[1:])


def test_topics_json(separable_file, capsys):
    code = main(["topics", separable_file, "--json",
                 "--topics-population", "2", "--topics-generations", "1",
                 "--topics-k-min", "2", "--topics-k-max", "3",
                 "--topics-lda-iterations", "20", "--topics-burn-in", "5"])
    assert code == EXIT_OK
    data = json.loads(capsys.readouterr().out)
    assert len(data["categories"]) == 9
    assert all(2 <= entry["best_k"] <= 3 for entry in data["categories"].values())


def test_dump_config_reflects_flags(capsys):
    assert main(["stats", "unused.jsonl", "--dump-config", "--seed", "7"]) == EXIT_OK
    assert json.loads(capsys.readouterr().out)["seed"] == 7


def test_missing_file_is_a_json_error(tmp_path, capsys):
    assert main(["stats", str(tmp_path / "absent.jsonl")]) == EXIT_ERROR
    error = _stderr_error(capsys)
    assert error["command"] == "stats"
    assert error["message"]


def test_invalid_configuration_is_a_json_error(corpus_file, capsys):
    assert main(["stats", corpus_file, "--evaluate-folds", "1"]) == EXIT_ERROR
    assert _stderr_error(capsys)["error"] == "ConfigError"


def test_usage_error(capsys):
    assert main(["frobnicate"]) == EXIT_ERROR
    assert _stderr_error(capsys)["error"] == "UsageError"

import pytest

from rootcause.config.settings import RunConfig
from rootcause.core.corpus import BugReport, CorpusError, RootCause
from rootcause.core.pipeline import (
    ZERO_VECTOR_WARNING,
    PipelineOptions,
    classify_reports,
    fit_model,
    hyperparams_from_config,
)
from rootcause.core.synthetic import separable_corpus
from rootcause.core.textprep import Pipeline
from rootcause.tests.conftest import corpus_of


def _unlabeled(report_id, summary):
    return BugReport(id=report_id, ecosystem="Apache", project="ant", title="", summary=summary)


def test_fit_model_classifies_its_own_categories(separable, classifier_prep):
    fitted = fit_model(list(separable), classifier_prep, hyperparams_from_config(RunConfig()), seed=1)
    model = fitted.model
    assert model.vocab is not None and model.prep is classifier_prep
    assert model.loss_history[-1] < model.loss_history[0]

    sample = [r for r in separable if r.id.endswith("-0000")]
    predictions = classify_reports(model, sample)
    assert [p.label for p in predictions] == [r.label for r in sample]
    for prediction in predictions:
        assert sum(prediction.probabilities.values()) == pytest.approx(1.0)
        assert list(prediction.probabilities) == list(RootCause)
        assert prediction.warnings == []


def test_report_without_vocabulary_terms_gets_the_zero_vector_warning(separable, classifier_prep):
    model = fit_model(list(separable), classifier_prep, hyperparams_from_config(RunConfig())).model
    [prediction] = classify_reports(model, [_unlabeled("U-1", "the and of with")])
    assert prediction.warnings == [ZERO_VECTOR_WARNING]
    assert sum(prediction.probabilities.values()) == pytest.approx(1.0)

    record = prediction.to_record()
    assert set(record) == {
        "id", "ecosystem", "project", "title", "summary", "label", "resolution", "events",
        "predicted_label", "probabilities", "warnings",
    }
    assert record["summary"] == "the and of with"
    assert record["label"] is None
    assert record["predicted_label"] == prediction.label.value


def test_training_needs_labels(classifier_prep):
    with pytest.raises(CorpusError):
        fit_model([_unlabeled("U-1", "server crash")], classifier_prep, hyperparams_from_config(RunConfig()))


def test_classify_nothing(separable, classifier_prep):
    model = fit_model(list(separable), classifier_prep, hyperparams_from_config(RunConfig())).model
    assert classify_reports(model, []) == []


def test_grid_search_runs_when_configured(classifier_prep):
    small = separable_corpus(per_class=6, seed=2, categories=[RootCause.GUI, RootCause.SECURITY])
    options = PipelineOptions(grid={"l2_strength": [0.1, 0.001]}, grid_folds=2, smote_k=2)
    fitted = fit_model(list(small), classifier_prep, hyperparams_from_config(RunConfig()), options, seed=4)
    assert len(fitted.grid_table) == 2
    assert fitted.model.hyper.l2_strength in (0.1, 0.001)


def test_pipeline_options_follow_the_run_config():
    config = RunConfig(balance_k=3, model_grid_search=True, vectorize_min_df=1)
    options = PipelineOptions.from_run_config(config)
    assert options.smote_k == 3
    assert options.min_df == 1
    assert options.grid == config.grid()
    assert PipelineOptions.from_run_config(RunConfig()).grid is None


def test_include_title_adds_title_tokens(classifier_prep):
    reports = corpus_of(
        BugReport(id="A", ecosystem="x", project="p", title="zapdok", summary="gavbik", label=RootCause.GUI),
        BugReport(id="B", ecosystem="x", project="p", title="zapdok", summary="kovpad", label=RootCause.SECURITY),
    )
    plain = fit_model(list(reports), classifier_prep, hyperparams_from_config(RunConfig()),
                      PipelineOptions(min_df=1, max_df_ratio=1.0, balance_enabled=False))
    titled = fit_model(list(reports), classifier_prep, hyperparams_from_config(RunConfig()),
                       PipelineOptions(min_df=1, max_df_ratio=1.0, balance_enabled=False, include_title=True))
    assert "zapdok" not in plain.model.vocab
    assert titled.model.include_title
    assert classifier_prep.pipeline is Pipeline.CLASSIFIER

"""
Classifier Pipeline

End-to-end glue shared by the train, classify and evaluate commands:
token streams -> vocabulary -> TF-IDF -> (grid search) -> SMOTE -> train,
and model + raw reports -> predictions.
"""

import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence

import numpy as np

from .balance import LabeledDataset, balance_training_set
from .corpus import CANONICAL_ORDER, BugReport, CorpusError, RootCause
from .model import GridScore, Hyperparams, Model, ModelError, grid_search, train
from .textprep import Pipeline, PrepConfig, TokenStream, normalize_all
from .vectorize import fit_vocabulary, tfidf_matrix
from ..config.settings import RunConfig, derive_seed

logger = logging.getLogger(__name__)

ZERO_VECTOR_WARNING = "zero-vector"


@dataclass(frozen=True)
class PipelineOptions:
    """Feature and balancing options of the classifier pipeline"""
    include_title: bool = False
    min_df: int = 2
    max_df_ratio: float = 0.95
    l2_normalize: bool = False
    balance_enabled: bool = True
    smote_k: int = 5
    smote_metric: str = "euclidean"
    grid: Optional[Dict[str, List[float]]] = None
    grid_folds: int = 3

    @classmethod
    def from_run_config(cls, config: RunConfig) -> "PipelineOptions":
        return cls(
            include_title=config.prep_include_title,
            min_df=config.vectorize_min_df,
            max_df_ratio=config.vectorize_max_df_ratio,
            l2_normalize=config.vectorize_l2_normalize,
            balance_enabled=config.balance_enabled,
            smote_k=config.balance_k,
            smote_metric=config.balance_metric,
            grid=config.grid() if config.model_grid_search else None,
            grid_folds=config.model_grid_folds,
        )


def hyperparams_from_config(config: RunConfig) -> Hyperparams:
    return Hyperparams(
        l2_strength=config.model_l2_strength,
        learning_rate=config.model_learning_rate,
        max_epochs=config.model_max_epochs,
        convergence_tol=config.model_convergence_tol,
    )


def prep_from_config(config: RunConfig, pipeline: Pipeline = Pipeline.CLASSIFIER) -> PrepConfig:
    return PrepConfig.from_files(
        pipeline,
        stopwords_file=config.prep_stopwords_file,
        keywords_file=config.prep_keywords_file,
        lexicon_file=config.prep_lexicon_file,
        min_token_len=config.prep_min_token_len,
        spell_correction=config.prep_spell_correction,
        pos_filter=config.prep_pos_filter,
    )


@dataclass
class FitResult:
    model: Model
    grid_table: List[GridScore] = field(default_factory=list)
    warnings: List[str] = field(default_factory=list)


def fit_streams(
    streams: Sequence[TokenStream],
    labels: np.ndarray,
    prep: PrepConfig,
    hyper: Hyperparams,
    options: PipelineOptions,
    seed: int = 0,
    index: int = 0,
    jobs: int = 1
) -> FitResult:
    """
    Fit vocabulary, features and classifier on already-normalized streams.

    Args:
        streams: Training token streams
        labels: Canonical category index per stream
        seed: Root seed; SMOTE, training and grid search derive from it
        index: Distinguishes fits sharing one root seed (e.g. CV folds)
    """
    vocab = fit_vocabulary(streams, options.min_df, options.max_df_ratio)
    data = LabeledDataset(tfidf_matrix(streams, vocab, options.l2_normalize), labels)

    grid_table: List[GridScore] = []
    warnings: List[str] = []
    if options.grid:
        hyper, grid_table = grid_search(
            options.grid, data, options.grid_folds, derive_seed(seed, "grid", index),
            base=hyper, balance_enabled=options.balance_enabled,
            smote_k=options.smote_k, smote_metric=options.smote_metric, jobs=jobs,
        )
        warnings.extend(f"grid {score.to_dict()['params']}: {score.note}" for score in grid_table if score.note)

    balanced = balance_training_set(
        data, options.balance_enabled, options.smote_k, options.smote_metric,
        derive_seed(seed, "smote", index),
    )
    warnings.extend(balanced.warnings)

    model = train(
        balanced.data, hyper, derive_seed(seed, "train", index),
        vocab=vocab, prep=prep,
        include_title=options.include_title, l2_normalize=options.l2_normalize,
    )
    return FitResult(model, grid_table, warnings)


def fit_model(
    reports: Sequence[BugReport],
    prep: PrepConfig,
    hyper: Hyperparams,
    options: Optional[PipelineOptions] = None,
    seed: int = 0,
    jobs: int = 1
) -> FitResult:
    """
    Train a classifier on labeled reports.

    Raises:
        CorpusError: If no report carries a label
    """
    options = options or PipelineOptions()
    labeled = [report for report in reports if report.label is not None]
    if not labeled:
        raise CorpusError("Training needs at least one labeled report")

    streams = normalize_all(labeled, prep, options.include_title)
    labels = np.array([report.label.index for report in labeled], dtype=np.int64)
    logger.info(f"🚀 Training on {len(labeled)} labeled reports")
    return fit_streams(streams, labels, prep, hyper, options, seed, jobs=jobs)


@dataclass
class Prediction:
    """A predicted root cause attached to the report it was made for"""
    id: str
    label: RootCause
    probabilities: Dict[RootCause, float]
    warnings: List[str] = field(default_factory=list)
    report: Optional[BugReport] = None

    def to_record(self) -> Dict[str, Any]:
        """The report's canonical record plus predicted_label, probabilities and warnings"""
        record = self.report.to_record() if self.report is not None else {"id": self.id}
        record.update({
            "predicted_label": self.label.value,
            "probabilities": {cause.value: p for cause, p in self.probabilities.items()},
            "warnings": list(self.warnings),
        })
        return record


def classify_reports(model: Model, reports: Sequence[BugReport]) -> List[Prediction]:
    """
    Predict the root cause of each report.

    A report with no in-vocabulary term is still classified (the bias alone
    decides) and flagged with the "zero-vector" warning.
    """
    if model.vocab is None or model.prep is None:
        raise ModelError("Model carries no vocabulary or text-preparation settings")
    if not reports:
        return []

    streams = normalize_all(reports, model.prep, model.include_title)
    X = tfidf_matrix(streams, model.vocab, model.l2_normalize)
    probabilities = model.predict_proba(X)
    nonzero = np.diff(X.indptr)

    predictions = []
    for row, report in enumerate(reports):
        distribution = {cause: float(p) for cause, p in zip(CANONICAL_ORDER, probabilities[row])}
        label = RootCause.from_index(int(np.argmax(probabilities[row])))
        warnings = [] if nonzero[row] else [ZERO_VECTOR_WARNING]
        predictions.append(Prediction(report.id, label, distribution, warnings, report))

    flagged = sum(1 for p in predictions if p.warnings)
    if flagged:
        logger.warning(f"⚠️ {flagged} of {len(predictions)} reports have no in-vocabulary term")
    return predictions

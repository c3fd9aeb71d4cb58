"""
Cross-Validation

Repeated stratified k-fold evaluation of the classifier pipeline and the
per-category metrics report (precision, recall, F-measure, AUC-ROC, MCC).

Aggregation:
- within a run, fold confusion matrices are summed and held-out class
  probabilities pooled; per-class metrics and AUC are computed per run
- per-class values are then averaged over runs
- the Overall row is the unweighted mean of the 9 per-class values; AUC
  averages only the categories where it is defined
"""

import json
import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
from joblib import Parallel, delayed

from .corpus import CANONICAL_ORDER, Corpus, RootCause
from .metrics import (
    ConfusionMatrix,
    EvaluationError,
    auc_roc,
    f_measure,
    macro_f_measure,
    mcc,
    precision,
    recall,
    stratified_kfold,
)
from .model import Hyperparams, TrainingDivergedError
from .pipeline import PipelineOptions, fit_streams
from .textprep import PrepConfig, normalize_all
from .vectorize import VocabularyError, tfidf_matrix

logger = logging.getLogger(__name__)

TABLE_FOOTER = (
    "Values in percent. P/R/F-M with a zero denominator count as 0; MCC with a zero "
    "denominator counts as 0; '-' marks an undefined AUC. Overall = unweighted mean "
    "of the 9 categories (AUC over categories where it is defined)."
)


@dataclass(frozen=True)
class ClassMetrics:
    precision: float
    recall: float
    f_measure: float
    auc_roc: Optional[float]
    mcc: float
    support: int = 0

    def to_dict(self) -> Dict[str, Any]:
        return {
            "precision": self.precision,
            "recall": self.recall,
            "f_measure": self.f_measure,
            "auc_roc": self.auc_roc,
            "mcc": self.mcc,
            "support": self.support,
        }


def _percent(value: Optional[float]) -> str:
    return "-" if value is None else f"{round(value * 100):d}"


@dataclass
class MetricsReport:
    per_class: Dict[RootCause, ClassMetrics]
    overall: ClassMetrics
    runs: int
    folds: int
    seed: int
    warnings: List[str] = field(default_factory=list)
    failed_folds: int = 0

    def to_table(self) -> str:
        """Human table: Category | P | R | F-M | AR | MCC (integer percentages)"""
        header = f"{'Category':<32}{'P':>6}{'R':>6}{'F-M':>6}{'AR':>6}{'MCC':>6}"
        lines = [header, "-" * len(header)]
        rows = [(cause.display_name, m) for cause, m in self.per_class.items()]
        rows.append(("Overall", self.overall))
        for name, m in rows:
            lines.append(
                f"{name:<32}{_percent(m.precision):>6}{_percent(m.recall):>6}"
                f"{_percent(m.f_measure):>6}{_percent(m.auc_roc):>6}{_percent(m.mcc):>6}"
            )
        lines.append("")
        lines.append(f"{self.runs} run(s) x {self.folds}-fold stratified CV, seed {self.seed}.")
        lines.append(TABLE_FOOTER)
        return "\n".join(lines)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "per_class": {cause.value: m.to_dict() for cause, m in self.per_class.items()},
            "overall": self.overall.to_dict(),
            "runs": self.runs,
            "folds": self.folds,
            "seed": self.seed,
            "failed_folds": self.failed_folds,
            "warnings": list(self.warnings),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


@dataclass
class FoldOutcome:
    run: int
    fold: int
    test_idx: np.ndarray
    probabilities: Optional[np.ndarray] = None
    warnings: List[str] = field(default_factory=list)
    error: str = ""


def _run_fold(
    run: int,
    fold: int,
    train_idx: np.ndarray,
    test_idx: np.ndarray,
    streams: list,
    labels: np.ndarray,
    prep: PrepConfig,
    hyper: Hyperparams,
    options: PipelineOptions,
    seed: int,
    fit_index: int
) -> FoldOutcome:
    try:
        fitted = fit_streams(
            [streams[i] for i in train_idx], labels[train_idx],
            prep, hyper, options, seed=seed, index=fit_index,
        )
    except (TrainingDivergedError, VocabularyError, EvaluationError) as e:
        return FoldOutcome(run, fold, test_idx, error=f"run {run} fold {fold}: {e}")

    X_test = tfidf_matrix([streams[i] for i in test_idx], fitted.model.vocab, options.l2_normalize)
    probabilities = fitted.model.predict_proba(X_test)
    return FoldOutcome(run, fold, test_idx, probabilities, fitted.warnings)


def _run_metrics(
    labels: np.ndarray,
    outcomes: List[FoldOutcome]
) -> Tuple[ConfusionMatrix, Dict[RootCause, Optional[float]]]:
    succeeded = [o for o in outcomes if o.probabilities is not None]
    cm = ConfusionMatrix.zeros()
    for outcome in succeeded:
        predicted = np.argmax(outcome.probabilities, axis=1)
        cm = cm + ConfusionMatrix.from_predictions(labels[outcome.test_idx], predicted)

    aucs: Dict[RootCause, Optional[float]] = {}
    if succeeded:
        truth = np.concatenate([labels[o.test_idx] for o in succeeded])
        pooled = np.vstack([o.probabilities for o in succeeded])
        for cause in CANONICAL_ORDER:
            aucs[cause] = auc_roc(pooled[:, cause.index], truth == cause.index)
    return cm, aucs


def _mean(values: List[float]) -> float:
    return float(np.mean(values)) if values else 0.0


def cross_validate(
    corpus: Corpus,
    prep: PrepConfig,
    hyper: Hyperparams,
    k: int = 10,
    runs: int = 100,
    seed: int = 0,
    options: Optional[PipelineOptions] = None,
    jobs: int = 1
) -> MetricsReport:
    """
    Repeated stratified k-fold cross-validation.

    Run r stratifies with seed + r. The fit for fold f of run r derives its
    SMOTE, grid and training seeds from the root seed with index r * k + f.
    Vocabulary, SMOTE (and grid search when configured) are fitted on each
    training split only. A fold whose training fails (including a training
    split too small for the inner grid folds) is reported as a warning; the
    report is built from the remaining folds.

    Raises:
        EvaluationError: If there is no labeled report, runs < 1, or no fold succeeds
    """
    options = options or PipelineOptions()
    labeled = [report for report in corpus if report.label is not None]
    if not labeled:
        raise EvaluationError("Cross-validation needs at least one labeled report")
    if runs < 1:
        raise EvaluationError(f"runs must be >= 1, got {runs}")

    streams = normalize_all(labeled, prep, options.include_title)
    labels = np.array([report.label.index for report in labeled], dtype=np.int64)
    all_rows = np.arange(len(labeled))

    tasks = []
    for run in range(runs):
        run_seed = seed + run
        for fold, test_idx in enumerate(stratified_kfold(labels, k, run_seed)):
            train_idx = np.setdiff1d(all_rows, test_idx)
            # each (run, fold) fit gets its own SMOTE, grid and train seeds
            tasks.append((run, fold, train_idx, test_idx, run * k + fold))

    logger.info(f"🚀 Cross-validating {len(labeled)} reports: {runs} run(s) x {k} folds")
    outcomes: List[FoldOutcome] = Parallel(n_jobs=jobs, prefer="threads")(
        delayed(_run_fold)(run, fold, train_idx, test_idx, streams, labels, prep, hyper, options, seed, fit_index)
        for run, fold, train_idx, test_idx, fit_index in tasks
    )

    warnings: List[str] = []
    failed = [o for o in outcomes if o.error]
    for outcome in outcomes:
        warnings.extend(outcome.warnings)
        if outcome.error:
            logger.warning(f"⚠️ Fold failed, {outcome.error}")
            warnings.append(f"fold failed, {outcome.error}")
    if len(failed) == len(outcomes):
        raise EvaluationError("Every cross-validation fold failed")

    scores: Dict[RootCause, Dict[str, List[float]]] = {
        cause: {"precision": [], "recall": [], "f_measure": [], "auc_roc": [], "mcc": []}
        for cause in CANONICAL_ORDER
    }
    for run in range(runs):
        run_outcomes = [o for o in outcomes if o.run == run]
        if all(o.error for o in run_outcomes):
            continue
        cm, aucs = _run_metrics(labels, run_outcomes)
        for cause in CANONICAL_ORDER:
            scores[cause]["precision"].append(precision(cm, cause))
            scores[cause]["recall"].append(recall(cm, cause))
            scores[cause]["f_measure"].append(f_measure(cm, cause))
            scores[cause]["mcc"].append(mcc(cm, cause))
            if aucs.get(cause) is not None:
                scores[cause]["auc_roc"].append(aucs[cause])

    support = np.bincount(labels, minlength=len(CANONICAL_ORDER))
    per_class = {
        cause: ClassMetrics(
            precision=_mean(s["precision"]),
            recall=_mean(s["recall"]),
            f_measure=_mean(s["f_measure"]),
            auc_roc=_mean(s["auc_roc"]) if s["auc_roc"] else None,
            mcc=_mean(s["mcc"]),
            support=int(support[cause.index]),
        )
        for cause, s in scores.items()
    }

    defined_auc = [per_class[c].auc_roc for c in CANONICAL_ORDER if per_class[c].auc_roc is not None]
    overall = ClassMetrics(
        precision=_mean([per_class[c].precision for c in CANONICAL_ORDER]),
        recall=_mean([per_class[c].recall for c in CANONICAL_ORDER]),
        f_measure=_mean([per_class[c].f_measure for c in CANONICAL_ORDER]),
        auc_roc=_mean(defined_auc) if defined_auc else None,
        mcc=_mean([per_class[c].mcc for c in CANONICAL_ORDER]),
        support=len(labeled),
    )

    logger.info(f"✅ Cross-validation done: overall F {overall.f_measure:.3f}, {len(failed)} failed fold(s)")
    return MetricsReport(per_class, overall, runs, k, seed, warnings, len(failed))


__all__ = [
    "ClassMetrics",
    "ConfusionMatrix",
    "EvaluationError",
    "MetricsReport",
    "auc_roc",
    "cross_validate",
    "f_measure",
    "macro_f_measure",
    "mcc",
    "precision",
    "recall",
    "stratified_kfold",
]

"""
Root-Cause Core Modules

Corpus ingestion, text preprocessing, TF-IDF features, SMOTE balancing,
multinomial logistic regression, cross-validated evaluation, LDA-GA topics
and time-to-fix statistics.
"""

from .corpus import (
    BugEvent,
    BugReport,
    Corpus,
    CorpusError,
    CorpusFormatError,
    DuplicateIdError,
    EventKind,
    RecordError,
    RejectedRow,
    Resolution,
    RootCause,
    ecosystem_summary,
    frequency,
    frequency_by_ecosystem,
    load_corpus,
    save_corpus,
)

from .tracker_client import (
    FieldMapping,
    TrackerClient,
    TrackerConnectionError,
    TrackerError,
    TrackerHTTPError,
    TrackerSchemaError,
    fetch_tracker,
    ingest_tracker,
)

from .textprep import (
    Pipeline,
    PrepConfig,
    TokenStream,
    normalize,
    normalize_report,
)

from .vectorize import (
    Vocabulary,
    VocabularyError,
    fit_vocabulary,
    tfidf,
    tfidf_matrix,
)

from .balance import (
    BalanceError,
    LabeledDataset,
    smote,
)

from .model import (
    Hyperparams,
    InvalidHyperparamsError,
    Model,
    ModelError,
    TrainingDivergedError,
    grid_search,
    predict,
    predict_proba,
    train,
)

from .pipeline import (
    PipelineOptions,
    Prediction,
    classify_reports,
    fit_model,
)

from .evaluate import (
    ConfusionMatrix,
    EvaluationError,
    MetricsReport,
    cross_validate,
    stratified_kfold,
)

from .topics import (
    GaConfig,
    TopicModel,
    TopicModelError,
    TopicsReport,
    lda_fit,
    lda_ga,
    silhouette_fitness,
    topics_by_category,
)

from .timefix import (
    BoxStats,
    DelayMetric,
    TimelineError,
    delay_hours,
    delay_report,
    delay_stats,
    to_csv,
)

__all__ = [
    # Corpus
    "BugEvent",
    "BugReport",
    "Corpus",
    "CorpusError",
    "CorpusFormatError",
    "DuplicateIdError",
    "EventKind",
    "RecordError",
    "RejectedRow",
    "Resolution",
    "RootCause",
    "ecosystem_summary",
    "frequency",
    "frequency_by_ecosystem",
    "load_corpus",
    "save_corpus",
    # Tracker client
    "FieldMapping",
    "TrackerClient",
    "TrackerConnectionError",
    "TrackerError",
    "TrackerHTTPError",
    "TrackerSchemaError",
    "fetch_tracker",
    "ingest_tracker",
    # Text preprocessing
    "Pipeline",
    "PrepConfig",
    "TokenStream",
    "normalize",
    "normalize_report",
    # Features
    "Vocabulary",
    "VocabularyError",
    "fit_vocabulary",
    "tfidf",
    "tfidf_matrix",
    # Balancing
    "BalanceError",
    "LabeledDataset",
    "smote",
    # Model
    "Hyperparams",
    "InvalidHyperparamsError",
    "Model",
    "ModelError",
    "TrainingDivergedError",
    "grid_search",
    "predict",
    "predict_proba",
    "train",
    # Pipeline
    "PipelineOptions",
    "Prediction",
    "classify_reports",
    "fit_model",
    # Evaluation
    "ConfusionMatrix",
    "EvaluationError",
    "MetricsReport",
    "cross_validate",
    "stratified_kfold",
    # Topics
    "GaConfig",
    "TopicModel",
    "TopicModelError",
    "TopicsReport",
    "lda_fit",
    "lda_ga",
    "silhouette_fitness",
    "topics_by_category",
    # Time to fix
    "BoxStats",
    "DelayMetric",
    "TimelineError",
    "delay_hours",
    "delay_report",
    "delay_stats",
    "to_csv",
]

"""
Root-Cause Classifier

Multinomial (softmax) logistic regression over TF-IDF features, trained by
deterministic full-batch gradient descent with step halving, plus the
Cartesian grid search used to pick its hyperparameters.

Objective: mean softmax cross-entropy + (l2_strength / 2) * ||W||^2.
The bias is not regularized. Weights start at zero.
"""

import itertools
import json
import logging
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np
from joblib import Parallel, delayed
from scipy import sparse
from scipy.special import logsumexp, softmax

from .balance import LabeledDataset, balance_training_set
from .corpus import CANONICAL_ORDER, NUM_CLASSES
from .metrics import ConfusionMatrix, macro_f_measure, stratified_kfold
from .textprep import Pipeline, PrepConfig
from .vectorize import Vocabulary
from ..config.settings import derive_seed

logger = logging.getLogger(__name__)

MODEL_SCHEMA_VERSION = 1

# Step halvings allowed within one epoch before giving up on the step
MAX_HALVINGS = 40


class ModelError(Exception):
    """Base exception for classifier errors"""
    pass


class InvalidHyperparamsError(ModelError):
    """Raised when hyperparameters are out of range"""
    pass


class DimensionMismatchError(ModelError):
    """Raised when a feature vector does not match the model's vocabulary"""
    pass


class TrainingDivergedError(ModelError):
    """Raised when the training loss becomes non-finite"""
    pass


@dataclass(frozen=True)
class Hyperparams:
    l2_strength: float = 0.01
    learning_rate: float = 1.0
    max_epochs: int = 500
    convergence_tol: float = 1e-6

    def __post_init__(self):
        errors = []
        if not self.l2_strength >= 0:
            errors.append(f"l2_strength must be >= 0, got {self.l2_strength}")
        if not self.learning_rate > 0:
            errors.append(f"learning_rate must be > 0, got {self.learning_rate}")
        if int(self.max_epochs) != self.max_epochs or self.max_epochs < 1:
            errors.append(f"max_epochs must be an integer >= 1, got {self.max_epochs}")
        if not self.convergence_tol > 0:
            errors.append(f"convergence_tol must be > 0, got {self.convergence_tol}")
        if errors:
            raise InvalidHyperparamsError("; ".join(errors))

    def to_dict(self) -> Dict[str, Any]:
        return {f.name: getattr(self, f.name) for f in fields(self)}


# ============================================================================
# Model
# ============================================================================

@dataclass(eq=False)
class Model:
    """
    Trained classifier: one weight row and one bias per root cause, in
    canonical category order.
    """
    weights: np.ndarray
    bias: np.ndarray
    hyper: Hyperparams = field(default_factory=Hyperparams)
    seed: int = 0
    vocab: Optional[Vocabulary] = None
    prep: Optional[PrepConfig] = None
    include_title: bool = False
    l2_normalize: bool = False
    loss_history: List[float] = field(default_factory=list)

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=np.float64)
        self.bias = np.asarray(self.bias, dtype=np.float64)
        if self.weights.ndim != 2 or self.weights.shape[0] != NUM_CLASSES:
            raise DimensionMismatchError(f"weights must be {NUM_CLASSES} x d, got {self.weights.shape}")
        if self.bias.shape != (NUM_CLASSES,):
            raise DimensionMismatchError(f"bias must have length {NUM_CLASSES}, got {self.bias.shape}")
        if self.vocab is not None and len(self.vocab) != self.weights.shape[1]:
            raise DimensionMismatchError(
                f"weights have {self.weights.shape[1]} features but the vocabulary has {len(self.vocab)} terms"
            )

    @classmethod
    def zeros(cls, n_features: int, **kwargs) -> "Model":
        return cls(np.zeros((NUM_CLASSES, n_features)), np.zeros(NUM_CLASSES), **kwargs)

    @property
    def n_features(self) -> int:
        return self.weights.shape[1]

    def logits(self, X) -> np.ndarray:
        X = _as_matrix(X)
        if X.shape[1] != self.n_features:
            raise DimensionMismatchError(
                f"Feature vector has dimension {X.shape[1]}, model expects {self.n_features}"
            )
        return np.asarray(X @ self.weights.T) + self.bias

    def predict_proba(self, X) -> np.ndarray:
        """
        Softmax class distribution.

        A 1-D input gives a length-9 vector; a matrix gives one row per input row.
        """
        probabilities = softmax(self.logits(X), axis=1)
        return probabilities[0] if _is_single(X) else probabilities

    def predict(self, X):
        """Most probable root cause; ties go to the first class in canonical order"""
        probabilities = softmax(self.logits(X), axis=1)
        winners = [CANONICAL_ORDER[i] for i in np.argmax(probabilities, axis=1)]
        return winners[0] if _is_single(X) else winners

    # ------------------------------------------------------------------
    # Serialization
    # ------------------------------------------------------------------

    def to_dict(self) -> Dict[str, Any]:
        data: Dict[str, Any] = {
            "schema_version": MODEL_SCHEMA_VERSION,
            "classes": [cause.value for cause in CANONICAL_ORDER],
            "weights": self.weights.tolist(),
            "bias": self.bias.tolist(),
            "hyperparams": self.hyper.to_dict(),
            "seed": self.seed,
            "features": {"include_title": self.include_title, "l2_normalize": self.l2_normalize},
        }
        if self.vocab is not None:
            data["vocabulary"] = self.vocab.to_dict()
            data["vocabulary_sha256"] = self.vocab.fingerprint()
        if self.prep is not None:
            data["prep"] = {
                "pipeline": self.prep.pipeline.value,
                "min_token_len": self.prep.min_token_len,
                "spell_correction": self.prep.spell_correction,
                "pos_filter": self.prep.pos_filter,
                "stopwords": sorted(self.prep.stopwords),
                "keywords": sorted(self.prep.keywords),
            }
        return data

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "Model":
        version = data.get("schema_version")
        if version != MODEL_SCHEMA_VERSION:
            raise ModelError(f"Unsupported model schema version: {version}")
        classes = data.get("classes")
        if classes != [cause.value for cause in CANONICAL_ORDER]:
            raise ModelError(f"Model class order does not match this build: {classes}")

        vocab = None
        if "vocabulary" in data:
            vocab = Vocabulary.from_dict(data["vocabulary"])
            if data.get("vocabulary_sha256") != vocab.fingerprint():
                raise ModelError("Embedded vocabulary does not match its recorded hash")

        prep = None
        if "prep" in data:
            p = data["prep"]
            prep = PrepConfig(
                pipeline=Pipeline(p["pipeline"]),
                stopwords=frozenset(p["stopwords"]),
                keywords=frozenset(p["keywords"]),
                min_token_len=int(p["min_token_len"]),
                spell_correction=bool(p["spell_correction"]),
                pos_filter=bool(p["pos_filter"]),
            )

        features = data.get("features", {})
        try:
            return cls(
                weights=np.array(data["weights"], dtype=np.float64),
                bias=np.array(data["bias"], dtype=np.float64),
                hyper=Hyperparams(**data["hyperparams"]),
                seed=int(data["seed"]),
                vocab=vocab,
                prep=prep,
                include_title=bool(features.get("include_title", False)),
                l2_normalize=bool(features.get("l2_normalize", False)),
            )
        except KeyError as e:
            raise ModelError(f"Model file lacks field {e}") from e

    def save(self, path) -> None:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(self.to_dict()), encoding="utf-8")
        logger.info(f"💾 Model saved to {path}")

    @classmethod
    def load(cls, path) -> "Model":
        try:
            data = json.loads(Path(path).read_text(encoding="utf-8"))
        except (OSError, ValueError) as e:
            raise ModelError(f"Cannot read model {path}: {e}") from e
        return cls.from_dict(data)


def _as_matrix(X):
    if sparse.issparse(X):
        return X.tocsr()
    X = np.asarray(X, dtype=np.float64)
    return X[np.newaxis, :] if X.ndim == 1 else X


def _is_single(X) -> bool:
    return not sparse.issparse(X) and np.ndim(X) == 1


def predict_proba(model: Model, x) -> np.ndarray:
    return model.predict_proba(x)


def predict(model: Model, x):
    return model.predict(x)


# ============================================================================
# Training
# ============================================================================

def one_hot(labels: np.ndarray) -> np.ndarray:
    Y = np.zeros((len(labels), NUM_CLASSES), dtype=np.float64)
    Y[np.arange(len(labels)), labels] = 1.0
    return Y


def loss_and_gradient(
    W: np.ndarray,
    b: np.ndarray,
    X,
    Y: np.ndarray,
    l2_strength: float,
    class_mask: Optional[np.ndarray] = None
) -> Tuple[float, np.ndarray, np.ndarray]:
    """
    Regularized cross-entropy and its gradient.

    Args:
        W: Weights (9 x d)
        b: Bias (9)
        X: Features (n x d), sparse or dense
        Y: One-hot targets (n x 9)
        l2_strength: Ridge coefficient on W
        class_mask: Classes whose weight rows may move; others get zero gradient

    Returns:
        Tuple of (loss, dW, db)
    """
    n = Y.shape[0]
    logits = np.asarray(X @ W.T) + b
    log_norm = logsumexp(logits, axis=1, keepdims=True)
    log_probs = logits - log_norm
    loss = -np.sum(Y * log_probs) / n + 0.5 * l2_strength * np.sum(W * W)

    residual = (np.exp(log_probs) - Y) / n
    dW = np.asarray(X.T @ residual).T + l2_strength * W
    db = residual.sum(axis=0)
    if class_mask is not None:
        dW[~class_mask] = 0.0
    return float(loss), dW, db


def train(
    data: LabeledDataset,
    hyper: Hyperparams,
    seed: int = 0,
    vocab: Optional[Vocabulary] = None,
    prep: Optional[PrepConfig] = None,
    include_title: bool = False,
    l2_normalize: bool = False
) -> Model:
    """
    Fit the classifier by full-batch gradient descent.

    A step that raises the loss (or makes it non-finite) is retried with
    half the learning rate, and the smaller rate is kept for later epochs.
    Training stops once an accepted step lowers the loss by less than
    convergence_tol, or after max_epochs.

    Raises:
        ModelError: If data is empty
        TrainingDivergedError: If the loss is non-finite and step halving
            cannot recover it
    """
    if len(data) == 0:
        raise ModelError("Cannot train on an empty dataset")

    X = data.vectors
    Y = one_hot(data.labels)
    class_mask = Y.sum(axis=0) > 0
    W = np.zeros((NUM_CLASSES, X.shape[1]))
    b = np.zeros(NUM_CLASSES)
    rate = hyper.learning_rate

    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        loss, dW, db = loss_and_gradient(W, b, X, Y, hyper.l2_strength, class_mask)
        if not np.isfinite(loss):
            raise TrainingDivergedError(f"Initial loss is not finite ({loss})")
        history = [loss]

        for epoch in range(hyper.max_epochs):
            for _ in range(MAX_HALVINGS):
                W_next = W - rate * dW
                b_next = b - rate * db
                next_loss, next_dW, next_db = loss_and_gradient(
                    W_next, b_next, X, Y, hyper.l2_strength, class_mask
                )
                if np.isfinite(next_loss) and next_loss <= loss:
                    break
                rate /= 2.0
            else:
                if not np.isfinite(next_loss):
                    raise TrainingDivergedError(
                        f"Loss diverged at epoch {epoch} (learning rate {hyper.learning_rate})"
                    )
                logger.debug(f"No descent step found at epoch {epoch}; stopping")
                break

            improvement = loss - next_loss
            W, b, loss, dW, db = W_next, b_next, next_loss, next_dW, next_db
            history.append(loss)
            if improvement < hyper.convergence_tol:
                break

    logger.debug(f"Trained on {len(data)} rows in {len(history) - 1} epochs, loss {history[0]:.4f} -> {loss:.4f}")
    return Model(
        weights=W,
        bias=b,
        hyper=hyper,
        seed=seed,
        vocab=vocab,
        prep=prep,
        include_title=include_title,
        l2_normalize=l2_normalize,
        loss_history=history,
    )


# ============================================================================
# Grid search
# ============================================================================

@dataclass(frozen=True)
class GridScore:
    """One grid combination and its inner-CV macro F-measure"""
    params: Tuple[Tuple[str, Any], ...]
    score: float
    note: str = ""

    def to_dict(self) -> Dict[str, Any]:
        return {"params": dict(self.params), "macro_f": self.score, "note": self.note}


def _score_combination(
    hyper: Hyperparams,
    data: LabeledDataset,
    folds: List[np.ndarray],
    seed: int,
    balance_enabled: bool,
    smote_k: int,
    smote_metric: str
) -> Tuple[float, str]:
    cm = ConfusionMatrix.zeros()
    all_rows = np.arange(len(data))
    for f, test_idx in enumerate(folds):
        train_idx = np.setdiff1d(all_rows, test_idx)
        train_data = LabeledDataset(data.vectors[train_idx], data.labels[train_idx])
        balanced = balance_training_set(
            train_data, balance_enabled, smote_k, smote_metric, derive_seed(seed, "smote", f)
        )
        try:
            model = train(balanced.data, hyper, derive_seed(seed, "train", f))
        except TrainingDivergedError as e:
            return 0.0, f"diverged: {e}"
        predicted = np.argmax(model.logits(data.vectors[test_idx]), axis=1)
        cm = cm + ConfusionMatrix.from_predictions(data.labels[test_idx], predicted)
    return macro_f_measure(cm), ""


def grid_search(
    grid: Mapping[str, Sequence[Any]],
    data: LabeledDataset,
    folds: int = 3,
    seed: int = 0,
    base: Optional[Hyperparams] = None,
    balance_enabled: bool = True,
    smote_k: int = 5,
    smote_metric: str = "euclidean",
    jobs: int = 1
) -> Tuple[Hyperparams, List[GridScore]]:
    """
    Brute-force search over the Cartesian product of the grid.

    Every combination is scored by stratified inner cross-validation on macro
    F-measure (SMOTE applied to each inner training split). Combinations are
    enumerated in the grid's key order; the first best one wins ties. A
    diverging combination scores 0 and is noted in the table.

    Returns:
        Tuple of (best hyperparameters, score table in enumeration order)

    Raises:
        InvalidHyperparamsError: On an empty grid, an empty value list or an
            unknown parameter name
    """
    if not grid or any(len(values) == 0 for values in grid.values()):
        raise InvalidHyperparamsError("Grid must name at least one value per parameter")
    known = {f.name for f in fields(Hyperparams)}
    unknown = sorted(set(grid) - known)
    if unknown:
        raise InvalidHyperparamsError(f"Unknown grid parameters: {', '.join(unknown)}")

    base = base or Hyperparams()
    names = list(grid)
    combinations = [replace(base, **dict(zip(names, values))) for values in itertools.product(*grid.values())]
    split = stratified_kfold(data.labels, folds, derive_seed(seed, "grid"))

    logger.info(f"Grid search: {len(combinations)} combinations x {folds} folds")
    outcomes = Parallel(n_jobs=jobs, prefer="threads")(
        delayed(_score_combination)(hyper, data, split, seed, balance_enabled, smote_k, smote_metric)
        for hyper in combinations
    )

    table = []
    for hyper, (score, note) in zip(combinations, outcomes):
        params = tuple((name, getattr(hyper, name)) for name in names)
        if note:
            logger.warning(f"⚠️ Grid combination {dict(params)} {note}")
        table.append(GridScore(params, score, note))

    best_index = max(range(len(table)), key=lambda i: (table[i].score, -i))
    logger.info(f"Grid search picked {dict(table[best_index].params)} (macro F {table[best_index].score:.3f})")
    return combinations[best_index], table

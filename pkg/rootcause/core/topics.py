"""
Topic Extraction (LDA-GA)

Collapsed Gibbs sampling LDA and a genetic search over the number of topics
whose fitness is the silhouette of documents clustered by dominant topic
(cosine distance on document-topic rows). Run per root-cause category to
produce the relevant-topics table.

Defaults: alpha = 50 / k, beta = 0.01, 500 Gibbs sweeps with the first 100
treated as burn-in for the log-likelihood trace.
"""

import json
import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
from joblib import Parallel, delayed
from scipy.special import gammaln
from sklearn.metrics import silhouette_score

from .corpus import Corpus, RootCause
from .textprep import PrepConfig, TokenStream, normalize
from ..config.settings import derive_seed

logger = logging.getLogger(__name__)


class TopicModelError(Exception):
    """Raised when a topic model cannot be fitted"""
    pass


@dataclass(eq=False)
class TopicModel:
    k: int
    phi: np.ndarray
    theta: np.ndarray
    alpha: float
    beta: float
    iterations: int
    seed: int
    terms: Tuple[str, ...] = ()
    log_likelihood: List[float] = field(default_factory=list)

    @property
    def prevalence(self) -> np.ndarray:
        """Total document-topic mass per topic"""
        return self.theta.sum(axis=0)


@dataclass(frozen=True)
class GaConfig:
    population: int = 6
    generations: int = 5
    k_min: int = 2
    k_max: int = 8
    mutation_rate: float = 0.3
    elitism: int = 1
    tournament_size: int = 2

    def __post_init__(self):
        errors = []
        if self.k_min < 2:
            errors.append("k_min must be >= 2")
        if self.k_max <= self.k_min:
            errors.append("k_max must be > k_min")
        if self.population < 2:
            errors.append("population must be >= 2")
        if self.generations < 0:
            errors.append("generations must be >= 0")
        if not 0.0 <= self.mutation_rate <= 1.0:
            errors.append("mutation_rate must be in [0, 1]")
        if not 1 <= self.elitism <= self.population:
            errors.append("elitism must be between 1 and population")
        if self.tournament_size < 1:
            errors.append("tournament_size must be >= 1")
        if errors:
            raise TopicModelError("Invalid GA configuration: " + "; ".join(errors))


# ============================================================================
# Collapsed Gibbs sampling
# ============================================================================

def _log_likelihood(n_dk, n_wk, n_k, n_d, alpha, beta) -> float:
    """Collapsed joint log p(w, z)"""
    n_terms, k = n_wk.shape
    n_docs = n_dk.shape[0]
    word_part = (
        k * (gammaln(n_terms * beta) - n_terms * gammaln(beta))
        + gammaln(n_wk + beta).sum()
        - gammaln(n_k + n_terms * beta).sum()
    )
    doc_part = (
        n_docs * (gammaln(k * alpha) - k * gammaln(alpha))
        + gammaln(n_dk + alpha).sum()
        - gammaln(n_d + k * alpha).sum()
    )
    return float(word_part + doc_part)


def lda_fit(
    docs: Sequence[TokenStream],
    k: int,
    alpha: Optional[float] = None,
    beta: float = 0.01,
    iterations: int = 500,
    seed: int = 0,
    burn_in: int = 100
) -> TopicModel:
    """
    Fit LDA by collapsed Gibbs sampling (single chain).

    phi and theta are estimated from the counts after the final sweep:
    theta[d, t] = (n_dt + alpha) / (n_d + k * alpha)
    phi[t, w] = (n_wt + beta) / (n_t + V * beta)

    Raises:
        TopicModelError: On k < 1, no documents, or an empty vocabulary
    """
    if k < 1:
        raise TopicModelError(f"k must be >= 1, got {k}")
    if not docs:
        raise TopicModelError("LDA needs at least one document")
    alpha = 50.0 / k if alpha is None else alpha
    if alpha <= 0 or beta <= 0:
        raise TopicModelError("alpha and beta must be positive")

    terms = tuple(sorted({token for doc in docs for token in doc.tokens}))
    if not terms:
        raise TopicModelError("Empty vocabulary: every document normalized to zero tokens")
    term_index = {term: i for i, term in enumerate(terms)}
    n_terms = len(terms)
    n_docs = len(docs)

    words = np.array([term_index[t] for doc in docs for t in doc.tokens], dtype=np.int64)
    doc_of = np.array([d for d, doc in enumerate(docs) for _ in doc.tokens], dtype=np.int64)

    rng = np.random.default_rng(seed)
    z = rng.integers(0, k, size=len(words))

    n_dk = np.zeros((n_docs, k), dtype=np.int64)
    n_wk = np.zeros((n_terms, k), dtype=np.int64)
    np.add.at(n_dk, (doc_of, z), 1)
    np.add.at(n_wk, (words, z), 1)
    n_k = n_wk.sum(axis=0)
    n_d = n_dk.sum(axis=1)

    v_beta = n_terms * beta
    trace: List[float] = []
    for sweep in range(iterations):
        draws = rng.random(len(words))
        for i in range(len(words)):
            w, d, t = words[i], doc_of[i], z[i]
            n_dk[d, t] -= 1
            n_wk[w, t] -= 1
            n_k[t] -= 1

            weights = (n_dk[d] + alpha) * (n_wk[w] + beta) / (n_k + v_beta)
            cumulative = np.cumsum(weights)
            t = int(np.searchsorted(cumulative, draws[i] * cumulative[-1], side="right"))
            t = min(t, k - 1)

            z[i] = t
            n_dk[d, t] += 1
            n_wk[w, t] += 1
            n_k[t] += 1

        if sweep >= burn_in:
            trace.append(_log_likelihood(n_dk, n_wk, n_k, n_d, alpha, beta))

    theta = (n_dk + alpha) / (n_d[:, np.newaxis] + k * alpha)
    phi = ((n_wk + beta) / (n_k + v_beta)).T
    logger.debug(f"LDA k={k}: {len(words)} tokens, {n_terms} terms, {n_docs} docs, {iterations} sweeps")
    return TopicModel(k, phi, theta, alpha, beta, iterations, seed, terms, trace)


def top_terms(model: TopicModel, topic: int, n: int = 10) -> List[Tuple[str, float]]:
    """
    The n highest-probability terms of a topic, descending; equal
    probabilities are ordered by term.

    Raises:
        TopicModelError: If topic is out of range
    """
    if not 0 <= topic < model.k:
        raise TopicModelError(f"Topic {topic} out of range for k={model.k}")
    row = model.phi[topic]
    ranked = sorted(range(len(model.terms)), key=lambda w: (-row[w], model.terms[w]))
    return [(model.terms[w], float(row[w])) for w in ranked[:n]]


# ============================================================================
# Genetic search over k
# ============================================================================

def silhouette_fitness(theta: np.ndarray) -> float:
    """
    Mean silhouette of documents clustered by dominant topic (cosine distance).

    Fewer than two non-empty clusters scores -1; one document per cluster
    scores 0.
    """
    labels = np.argmax(theta, axis=1)
    clusters = len(np.unique(labels))
    if clusters < 2:
        return -1.0
    if clusters >= len(labels):
        return 0.0
    return float(silhouette_score(theta, labels, metric="cosine"))


@dataclass
class LdaGaResult:
    best_k: int
    model: TopicModel
    history: List[float]
    fitness_by_k: Dict[int, float]
    warnings: List[str] = field(default_factory=list)


def _initial_population(ga: GaConfig) -> List[int]:
    return [int(k) for k in np.rint(np.linspace(ga.k_min, ga.k_max, ga.population))]


def _rank_key(k: int, fitness: Dict[int, float]) -> Tuple[float, int]:
    return (-fitness[k], k)


def lda_ga(
    docs: Sequence[TokenStream],
    ga: GaConfig,
    lda_iterations: int = 500,
    seed: int = 0,
    burn_in: int = 100,
    beta: float = 0.01,
    jobs: int = 1
) -> LdaGaResult:
    """
    Choose the number of topics with a genetic algorithm.

    Genome: k in [k_min, k_max]. Operators: tournament selection,
    integer-blend crossover, +/-1 mutation, elitism. Each k is fitted once
    (seeded from the root seed and k) and its fitness cached, so the result
    is deterministic and the best-of-generation series never decreases.

    Raises:
        TopicModelError: If fewer than 4 documents are given
    """
    if len(docs) < 4:
        raise TopicModelError(f"LDA-GA needs at least 4 documents, got {len(docs)}")

    rng = np.random.default_rng(seed)
    models: Dict[int, TopicModel] = {}
    fitness: Dict[int, float] = {}

    def evaluate(population: List[int]) -> None:
        pending = sorted(set(population) - set(models))
        fitted = Parallel(n_jobs=jobs, prefer="threads")(
            delayed(lda_fit)(docs, k, None, beta, lda_iterations, derive_seed(seed, "lda", k), burn_in)
            for k in pending
        )
        for k, model in zip(pending, fitted):
            models[k] = model
            fitness[k] = silhouette_fitness(model.theta)
            logger.debug(f"LDA-GA: k={k} fitness {fitness[k]:.4f}")

    def tournament(population: List[int]) -> int:
        entrants = rng.choice(len(population), size=ga.tournament_size, replace=True)
        return min((population[i] for i in entrants), key=lambda k: _rank_key(k, fitness))

    population = _initial_population(ga)
    evaluate(population)
    history = [max(fitness[k] for k in population)]

    for generation in range(ga.generations):
        ranked = sorted(population, key=lambda k: _rank_key(k, fitness))
        offspring = ranked[:ga.elitism]
        while len(offspring) < ga.population:
            first, second = tournament(population), tournament(population)
            child = int(np.rint(first + rng.random() * (second - first)))
            if rng.random() < ga.mutation_rate:
                child += 1 if rng.random() < 0.5 else -1
            offspring.append(int(np.clip(child, ga.k_min, ga.k_max)))
        population = offspring
        evaluate(population)
        history.append(max(fitness[k] for k in population))

    warnings: List[str] = []
    if all(value <= -1.0 for value in fitness.values()):
        message = f"Every candidate k yields a single topic cluster; falling back to k={ga.k_min}"
        logger.warning(f"⚠️ {message}")
        warnings.append(message)
        evaluate([ga.k_min])
        best_k = ga.k_min
    else:
        best_k = min(fitness, key=lambda k: _rank_key(k, fitness))

    logger.info(f"LDA-GA picked k={best_k} (fitness {fitness[best_k]:.4f}) from {sorted(fitness)}")
    return LdaGaResult(best_k, models[best_k], history, dict(sorted(fitness.items())), warnings)


# ============================================================================
# Per-category topics
# ============================================================================

@dataclass
class CategoryTopics:
    cause: RootCause
    reports: int
    best_k: int
    topics: List[List[Tuple[str, float]]]
    fitness_by_k: Dict[int, float]
    history: List[float]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "reports": self.reports,
            "best_k": self.best_k,
            "topics": [[{"term": term, "p": p} for term, p in topic] for topic in self.topics],
            "fitness_by_k": {str(k): v for k, v in self.fitness_by_k.items()},
            "history": self.history,
        }


@dataclass
class TopicsReport:
    per_category: Dict[RootCause, CategoryTopics]
    skipped: List[RootCause] = field(default_factory=list)
    warnings: List[str] = field(default_factory=list)
    max_topics: int = 5

    def to_table(self) -> str:
        """Category x topic table; missing topics shown as '-'"""
        header = ["Category"] + [f"Topic {i + 1}" for i in range(self.max_topics)]
        rows = []
        for cause, result in self.per_category.items():
            cells = [", ".join(term for term, _ in topic) for topic in result.topics]
            cells += ["-"] * (self.max_topics - len(cells))
            rows.append([cause.display_name] + cells)
        widths = [max(len(row[i]) for row in [header] + rows) for i in range(len(header))]
        lines = [" | ".join(cell.ljust(w) for cell, w in zip(row, widths)).rstrip() for row in [header] + rows]
        lines.insert(1, "-+-".join("-" * w for w in widths))
        if self.skipped:
            lines.append("")
            lines.append("Skipped: " + ", ".join(cause.value for cause in self.skipped))
        return "\n".join(lines)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "categories": {cause.value: result.to_dict() for cause, result in self.per_category.items()},
            "skipped": [cause.value for cause in self.skipped],
            "warnings": list(self.warnings),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def topics_by_category(
    corpus: Corpus,
    prep: PrepConfig,
    ga: GaConfig,
    seed: int = 0,
    lda_iterations: int = 500,
    burn_in: int = 100,
    beta: float = 0.01,
    max_topics: int = 5,
    terms_per_topic: int = 1,
    min_reports: int = 4,
    jobs: int = 1
) -> TopicsReport:
    """
    Run the LDA pipeline and LDA-GA for every root-cause category.

    Categories with fewer than min_reports labeled reports (or no token left
    after normalization) are skipped with a warning. Up to max_topics topics
    per category are kept, most prevalent first.
    """
    if prep.spell_correction:
        prep = prep.with_spell_vocabulary(report.summary for report in corpus)

    per_category: Dict[RootCause, CategoryTopics] = {}
    skipped: List[RootCause] = []
    warnings: List[str] = []

    for cause, reports in corpus.by_category().items():
        if len(reports) < min_reports:
            message = f"Skipped {cause.value}: {len(reports)} labeled report(s), need {min_reports}"
            logger.warning(f"⚠️ {message}")
            skipped.append(cause)
            warnings.append(message)
            continue

        docs = [normalize(report.summary, prep, report.id) for report in reports]
        try:
            result = lda_ga(
                docs, ga, lda_iterations, derive_seed(seed, "topics", cause.index),
                burn_in=burn_in, beta=beta, jobs=jobs,
            )
        except TopicModelError as e:
            message = f"Skipped {cause.value}: {e}"
            logger.warning(f"⚠️ {message}")
            skipped.append(cause)
            warnings.append(message)
            continue

        warnings.extend(f"{cause.value}: {w}" for w in result.warnings)
        prevalence = result.model.prevalence
        order = sorted(range(result.model.k), key=lambda t: (-prevalence[t], t))[:max_topics]
        topics = [top_terms(result.model, t, terms_per_topic) for t in order]
        per_category[cause] = CategoryTopics(
            cause, len(reports), result.best_k, topics, result.fitness_by_k, result.history
        )
        logger.info(f"Topics for {cause.value}: k={result.best_k}")

    return TopicsReport(per_category, skipped, warnings, max_topics)

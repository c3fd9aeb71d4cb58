"""
TF-IDF Vectorization

relevance(w, c) = f(w, c) * ln(|C| / f(w, C))

f(w, c) is the count of term w in document c, f(w, C) the number of corpus
documents containing w and |C| the corpus size. No smoothing, natural log.
Feature vectors are 1 x |V| scipy CSR rows without stored zeros.
"""

import hashlib
import json
import logging
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Iterable, List, Sequence

import numpy as np
from scipy import sparse
from sklearn.preprocessing import normalize as l2_normalize_rows

from .textprep import TokenStream

logger = logging.getLogger(__name__)

VOCABULARY_SCHEMA_VERSION = 1

# A single document's features: 1 x |Vocabulary| CSR row
FeatureVector = sparse.csr_matrix


class VocabularyError(Exception):
    """Raised when a vocabulary cannot be fitted or read"""
    pass


@dataclass(frozen=True)
class Vocabulary:
    """Lexicographically ordered terms with their document frequencies"""
    terms: tuple
    doc_freq: tuple
    corpus_size: int
    index: Dict[str, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple(self.terms))
        object.__setattr__(self, "doc_freq", tuple(int(df) for df in self.doc_freq))
        if len(self.terms) != len(self.doc_freq):
            raise VocabularyError("terms and doc_freq differ in length")
        if list(self.terms) != sorted(set(self.terms)):
            raise VocabularyError("terms must be unique and lexicographically ordered")
        if any(df < 1 or df > self.corpus_size for df in self.doc_freq):
            raise VocabularyError("doc_freq must lie in [1, corpus_size]")
        object.__setattr__(self, "index", {term: i for i, term in enumerate(self.terms)})

    def __len__(self) -> int:
        return len(self.terms)

    def __contains__(self, term: str) -> bool:
        return term in self.index

    @property
    def idf(self) -> np.ndarray:
        """ln(|C| / f(w, C)) per term"""
        return np.log(self.corpus_size / np.asarray(self.doc_freq, dtype=np.float64))

    def to_dict(self) -> Dict:
        return {
            "schema_version": VOCABULARY_SCHEMA_VERSION,
            "terms": list(self.terms),
            "doc_freq": list(self.doc_freq),
            "corpus_size": self.corpus_size,
        }

    @classmethod
    def from_dict(cls, data: Dict) -> "Vocabulary":
        version = data.get("schema_version")
        if version != VOCABULARY_SCHEMA_VERSION:
            raise VocabularyError(f"Unsupported vocabulary schema version: {version}")
        try:
            return cls(tuple(data["terms"]), tuple(data["doc_freq"]), int(data["corpus_size"]))
        except KeyError as e:
            raise VocabularyError(f"Vocabulary lacks field {e}") from e

    def fingerprint(self) -> str:
        """SHA-256 of the canonical JSON form"""
        payload = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(payload.encode("utf-8")).hexdigest()

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2), encoding="utf-8")

    @classmethod
    def load(cls, path) -> "Vocabulary":
        try:
            data = json.loads(Path(path).read_text(encoding="utf-8"))
        except (OSError, ValueError) as e:
            raise VocabularyError(f"Cannot read vocabulary {path}: {e}") from e
        return cls.from_dict(data)


def fit_vocabulary(
    docs: Sequence[TokenStream],
    min_df: int = 2,
    max_df_ratio: float = 0.95
) -> Vocabulary:
    """
    Keep terms with min_df <= f(w, C) <= max_df_ratio * |C|.

    Raises:
        VocabularyError: If docs is empty or every term is filtered out
    """
    if not docs:
        raise VocabularyError("Cannot fit a vocabulary on zero documents")

    corpus_size = len(docs)
    doc_freq: Counter = Counter()
    for doc in docs:
        doc_freq.update(set(doc.tokens))

    max_df = max_df_ratio * corpus_size
    kept = sorted(term for term, df in doc_freq.items() if min_df <= df <= max_df)
    if not kept:
        raise VocabularyError(
            f"All {len(doc_freq)} terms filtered out (min_df={min_df}, max_df_ratio={max_df_ratio})"
        )

    logger.debug(f"Vocabulary: kept {len(kept)} of {len(doc_freq)} terms over {corpus_size} documents")
    return Vocabulary(tuple(kept), tuple(doc_freq[t] for t in kept), corpus_size)


def tfidf(doc: TokenStream, vocab: Vocabulary) -> FeatureVector:
    """TF-IDF row for one document; out-of-vocabulary terms are ignored"""
    return tfidf_matrix([doc], vocab)


def tfidf_matrix(
    docs: Iterable[TokenStream],
    vocab: Vocabulary,
    l2_normalize: bool = False
) -> sparse.csr_matrix:
    """
    Stack TF-IDF rows for many documents.

    Args:
        docs: Token streams
        vocab: Fitted vocabulary
        l2_normalize: Scale every non-zero row to unit Euclidean length

    Returns:
        n_docs x |V| CSR matrix with no stored zeros
    """
    rows: List[int] = []
    cols: List[int] = []
    counts: List[float] = []
    n_docs = 0
    for row, doc in enumerate(docs):
        n_docs += 1
        for term, count in Counter(doc.tokens).items():
            column = vocab.index.get(term)
            if column is not None:
                rows.append(row)
                cols.append(column)
                counts.append(float(count))

    matrix = sparse.csr_matrix(
        (counts, (rows, cols)), shape=(n_docs, len(vocab)), dtype=np.float64
    )
    matrix = matrix.multiply(vocab.idf[np.newaxis, :]).tocsr()
    if l2_normalize:
        matrix = l2_normalize_rows(matrix, norm="l2", copy=False).tocsr()
    matrix.eliminate_zeros()
    matrix.sort_indices()
    return matrix

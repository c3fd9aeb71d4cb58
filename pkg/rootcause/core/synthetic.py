"""
Synthetic Corpora

Generators for controlled fixtures:
- separable_corpus: nine categories with disjoint vocabularies plus shared
  noise words, each report carrying a full fixed timeline
- planted_topic_docs: documents drawn from two disjoint planted vocabularies
- downsample: shrink one category to a target share of the corpus

Generated words follow a consonant-vowel pattern that Porter stemming and
the stopword/keyword filters leave untouched.
"""

import logging
from datetime import datetime, timedelta, timezone
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .corpus import (
    CANONICAL_ORDER,
    BugEvent,
    BugReport,
    Corpus,
    EventKind,
    Resolution,
    RootCause,
)
from .textprep import TokenStream

logger = logging.getLogger(__name__)

CONSONANTS = "bdfgkpvz"
VOWELS = "ao"
ECOSYSTEMS = ("Apache", "Eclipse", "Mozilla")
EPOCH = datetime(2015, 1, 1, tzinfo=timezone.utc)


def pseudo_words(count: int, seed: int = 0) -> List[str]:
    """Distinct six-letter words of the form CVCCVC"""
    capacity = len(CONSONANTS) ** 4 * len(VOWELS) ** 2
    if count > capacity:
        raise ValueError(f"At most {capacity} pseudo-words available, asked for {count}")
    rng = np.random.default_rng(seed)
    words = []
    for code in rng.permutation(capacity)[:count]:
        code = int(code)
        letters = []
        for alphabet in (CONSONANTS, VOWELS, CONSONANTS, CONSONANTS, VOWELS, CONSONANTS):
            code, digit = divmod(code, len(alphabet))
            letters.append(alphabet[digit])
        words.append("".join(letters))
    return words


def synthetic_timeline(rng: np.random.Generator, start: datetime) -> Tuple[BugEvent, ...]:
    """Six events in order, whole-hour gaps of 0-48 h"""
    events = []
    moment = start
    for kind in EventKind:
        events.append(BugEvent(kind, moment))
        moment = moment + timedelta(hours=int(rng.integers(0, 49)))
    return tuple(events)


def separable_corpus(
    per_class: int = 120,
    vocab_words: int = 10,
    noise_words: int = 30,
    category_tokens: int = 6,
    noise_tokens: int = 4,
    seed: int = 0,
    categories: Optional[Sequence[RootCause]] = None
) -> Corpus:
    """
    Labeled corpus in which every category owns a disjoint vocabulary.

    Each summary mixes category_tokens words of its own vocabulary with
    noise_tokens words from a pool shared by all categories.
    """
    categories = list(categories or CANONICAL_ORDER)
    rng = np.random.default_rng(seed)
    words = pseudo_words(len(CANONICAL_ORDER) * vocab_words + noise_words, seed)
    noise = words[len(CANONICAL_ORDER) * vocab_words:]

    reports = []
    for cause in categories:
        own = words[cause.index * vocab_words:(cause.index + 1) * vocab_words]
        for i in range(per_class):
            tokens = list(rng.choice(own, size=category_tokens)) + list(rng.choice(noise, size=noise_tokens))
            rng.shuffle(tokens)
            ecosystem = ECOSYSTEMS[i % len(ECOSYSTEMS)]
            reports.append(BugReport(
                id=f"{cause.value}-{i:04d}",
                ecosystem=ecosystem,
                project=f"{ecosystem.lower()}-{i % 5}",
                title=f"Synthetic {cause.display_name.lower()} {i}",
                summary=" ".join(str(t) for t in tokens),
                label=cause,
                events=synthetic_timeline(rng, EPOCH + timedelta(days=i)),
                resolution=Resolution.FIXED,
            ))

    logger.debug(f"Generated separable corpus: {len(reports)} reports, {len(categories)} categories")
    return Corpus(tuple(reports), provenance=f"synthetic:separable:seed={seed}")


def planted_topic_docs(
    docs_per_topic: int = 50,
    words_per_topic: int = 10,
    tokens_per_doc: int = 30,
    seed: int = 0
) -> Tuple[List[TokenStream], List[str], List[str]]:
    """
    Two-topic corpus: the first half of the documents draws only from
    vocabulary A, the second half only from vocabulary B.

    Returns:
        Tuple of (documents, vocabulary A, vocabulary B)
    """
    rng = np.random.default_rng(seed)
    words = pseudo_words(2 * words_per_topic, seed)
    vocab_a, vocab_b = words[:words_per_topic], words[words_per_topic:]
    docs = []
    for topic, vocab in enumerate((vocab_a, vocab_b)):
        for i in range(docs_per_topic):
            tokens = tuple(str(t) for t in rng.choice(vocab, size=tokens_per_doc))
            docs.append(TokenStream(tokens, f"planted-{topic}-{i:03d}"))
    return docs, vocab_a, vocab_b


def downsample(corpus: Corpus, cause: RootCause, share: float, seed: int = 0) -> Corpus:
    """
    Keep a random subset of one category so that it makes up `share` of the
    labeled result (at least 2 reports are kept).
    """
    if not 0.0 < share < 1.0:
        raise ValueError("share must be in (0, 1)")
    target = [r for r in corpus if r.label is cause]
    others = [r for r in corpus if r.label is not cause]
    keep = max(2, int(round(share * len(others) / (1.0 - share))))
    rng = np.random.default_rng(seed)
    chosen = set(rng.choice(len(target), size=min(keep, len(target)), replace=False).tolist())
    kept_ids = {target[i].id for i in chosen}
    reports = tuple(r for r in corpus if r.label is not cause or r.id in kept_ids)
    return Corpus(reports, provenance=f"{corpus.provenance}:downsampled:{cause.value}={share}")

"""
Text Preparation

Turns bug-report summaries into stemmed token streams. One engine serves two
configurations: the lighter classifier pipeline and the fuller LDA pipeline
(contraction expansion, optional spell correction, noun/verb filtering and
singularization before the shared steps).

Shared steps, in order: camel-case splitting, lowercasing, removal of special
characters, digits, programming keywords and stopwords, Porter stemming.
"""

import logging
import re
import string
from collections import Counter
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, FrozenSet, Iterable, List, Mapping, Tuple

from nltk.stem.porter import PorterStemmer

from ..config import settings

logger = logging.getLogger(__name__)

_WORD_RE = re.compile(r"[A-Za-z0-9_]+", re.ASCII)
_NON_ALPHA_RE = re.compile(r"[^A-Za-z]+", re.ASCII)
_CAMEL_RE = re.compile(r"[A-Z]+(?=[A-Z][a-z])|[A-Z]?[a-z]+|[A-Z]+", re.ASCII)

# Irregular forms first, then the generic suffixes
_CONTRACTIONS = (
    ("won't", "will not"),
    ("can't", "cannot"),
    ("shan't", "shall not"),
    ("n't", " not"),
    ("'re", " are"),
    ("'ll", " will"),
    ("'ve", " have"),
    ("'m", " am"),
    ("'d", " would"),
    ("'s", ""),
)

KEPT_WORD_CLASSES = frozenset({"noun", "verb"})

_stemmer = PorterStemmer(mode=PorterStemmer.MARTIN_EXTENSIONS)


class Pipeline(Enum):
    CLASSIFIER = "classifier"
    LDA = "lda"


def load_term_list(path) -> FrozenSet[str]:
    """One term per line; blank lines and '#' comments are skipped"""
    terms = set()
    with open(path, "r", encoding="utf-8") as handle:
        for line in handle:
            line = line.strip()
            if line and not line.startswith("#"):
                terms.add(line.lower())
    return frozenset(terms)


def load_lexicon(path) -> Dict[str, str]:
    """Word-class lexicon: '<word> <class>' per line"""
    lexicon = {}
    with open(path, "r", encoding="utf-8") as handle:
        for line in handle:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if len(parts) >= 2:
                lexicon[parts[0].lower()] = parts[1].lower()
    return lexicon


@dataclass(frozen=True)
class PrepConfig:
    """
    Normalization settings.

    The LDA pipeline always expands contractions and singularizes; spell
    correction and the noun/verb filter are switches that only the LDA
    pipeline honours.
    """
    pipeline: Pipeline = Pipeline.CLASSIFIER
    stopwords: FrozenSet[str] = frozenset()
    keywords: FrozenSet[str] = frozenset()
    min_token_len: int = 2
    spell_correction: bool = False
    pos_filter: bool = True
    lexicon: Mapping[str, str] = field(default_factory=dict, compare=False)
    spell_vocabulary: Mapping[str, int] = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.min_token_len < 1:
            raise ValueError("min_token_len must be >= 1")

    @property
    def expand_contractions(self) -> bool:
        return self.pipeline is Pipeline.LDA

    @property
    def singularize(self) -> bool:
        return self.pipeline is Pipeline.LDA

    @classmethod
    def from_files(
        cls,
        pipeline: Pipeline,
        stopwords_file=None,
        keywords_file=None,
        lexicon_file=None,
        **options
    ) -> "PrepConfig":
        """Build a config from the vendored (or overriding) term lists"""
        return cls(
            pipeline=pipeline,
            stopwords=load_term_list(stopwords_file or settings.STOPWORDS_FILE),
            keywords=load_term_list(keywords_file or settings.KEYWORDS_FILE),
            lexicon=load_lexicon(lexicon_file or settings.LEXICON_FILE) if pipeline is Pipeline.LDA else {},
            **options
        )

    @classmethod
    def classifier(cls, **options) -> "PrepConfig":
        return cls.from_files(Pipeline.CLASSIFIER, **options)

    @classmethod
    def lda(cls, **options) -> "PrepConfig":
        return cls.from_files(Pipeline.LDA, **options)

    def with_spell_vocabulary(self, texts: Iterable[str]) -> "PrepConfig":
        """Copy of this config whose spell corrector knows the given corpus"""
        return PrepConfig(
            pipeline=self.pipeline,
            stopwords=self.stopwords,
            keywords=self.keywords,
            min_token_len=self.min_token_len,
            spell_correction=self.spell_correction,
            pos_filter=self.pos_filter,
            lexicon=self.lexicon,
            spell_vocabulary=build_spelling_vocabulary(texts),
        )


@dataclass(frozen=True)
class TokenStream:
    tokens: Tuple[str, ...]
    source_id: str = ""

    def __len__(self) -> int:
        return len(self.tokens)

    def __iter__(self):
        return iter(self.tokens)

    def text(self) -> str:
        return " ".join(self.tokens)


def camel_split(identifier: str) -> List[str]:
    """
    Split an identifier at underscores, digits, lower->upper transitions and
    upper->upper-followed-by-lower transitions. Digits and underscores are
    discarded.

    >>> camel_split("HTML5Parser")
    ['HTML', 'Parser']
    """
    pieces = []
    for chunk in _NON_ALPHA_RE.split(identifier):
        if chunk:
            pieces.extend(_CAMEL_RE.findall(chunk))
    return pieces


def porter_stem(word: str) -> str:
    """Classic Porter stem of a lowercase alphabetic word"""
    return _stemmer.stem(word, to_lowercase=False)


def expand_contractions(text: str) -> str:
    result = text.replace("’", "'")
    for short, full in _CONTRACTIONS:
        result = re.sub(re.escape(short), full, result, flags=re.IGNORECASE)
    return result


def singularize(word: str) -> str:
    """Rule-based plural stripping (ies, es, s)"""
    lower = word.lower()
    if len(lower) > 3 and lower.endswith("ies"):
        return word[:-3] + ("Y" if word[-1].isupper() else "y")
    if len(lower) > 3 and lower.endswith(("ches", "shes", "xes", "sses", "zes")):
        return word[:-2]
    if len(lower) > 2 and lower.endswith("s") and not lower.endswith(("ss", "us", "is")):
        return word[:-1]
    return word


def build_spelling_vocabulary(texts: Iterable[str]) -> Counter:
    """Lowercase word frequencies of a corpus, used by spell correction"""
    counts: Counter = Counter()
    for text in texts:
        counts.update(word.lower() for word in _NON_ALPHA_RE.split(text or "") if word)
    return counts


def _edits1(word: str) -> set:
    letters = string.ascii_lowercase
    splits = [(word[:i], word[i:]) for i in range(len(word) + 1)]
    deletes = [a + b[1:] for a, b in splits if b]
    replaces = [a + c + b[1:] for a, b in splits if b for c in letters]
    inserts = [a + c + b for a, b in splits for c in letters]
    return set(deletes + replaces + inserts) - {word}


def spell_correct(word: str, vocabulary: Mapping[str, int], rare: int = 1, common: int = 5) -> str:
    """
    Replace a word seen exactly `rare` times by its most frequent edit-distance-1
    neighbour seen at least `common` times. Ties go to the alphabetically
    first candidate. Other words are returned unchanged.
    """
    lower = word.lower()
    if not lower.isalpha() or vocabulary.get(lower, 0) != rare:
        return word
    candidates = [(vocabulary[c], c) for c in _edits1(lower) if vocabulary.get(c, 0) >= common]
    if not candidates:
        return word
    best = min(candidates, key=lambda item: (-item[0], item[1]))[1]
    logger.debug(f"Spell correction: {word} -> {best}")
    return best


def _keep(token: str, config: PrepConfig) -> bool:
    return (
        len(token) >= config.min_token_len
        and token.isalpha()
        and token not in config.keywords
        and token not in config.stopwords
    )


def normalize(text: str, config: PrepConfig, source_id: str = "") -> TokenStream:
    """
    Normalize free text into a TokenStream.

    Args:
        text: Summary (or title + summary) text; may be empty
        config: Pipeline configuration
        source_id: Report id recorded on the stream

    Returns:
        Possibly empty TokenStream of lowercase stemmed terms
    """
    if not text:
        return TokenStream((), source_id)

    if config.expand_contractions:
        text = expand_contractions(text)

    tokens: List[str] = []
    for word in _WORD_RE.findall(text):
        if config.pipeline is Pipeline.LDA:
            if config.spell_correction and config.spell_vocabulary:
                word = spell_correct(word, config.spell_vocabulary)
            if config.pos_filter and config.lexicon:
                word_class = config.lexicon.get(word.lower())
                if word_class is not None and word_class not in KEPT_WORD_CLASSES:
                    continue
            if config.singularize:
                word = singularize(word)

        for piece in camel_split(word):
            piece = piece.lower()
            if not _keep(piece, config):
                continue
            stem = porter_stem(piece)
            if _keep(stem, config):
                tokens.append(stem)

    return TokenStream(tuple(tokens), source_id)


def normalize_report(report, config: PrepConfig, include_title: bool = False) -> TokenStream:
    """Normalize one BugReport's classifier text"""
    return normalize(report.text(include_title), config, source_id=report.id)


def normalize_all(reports, config: PrepConfig, include_title: bool = False) -> List[TokenStream]:
    return [normalize_report(report, config, include_title) for report in reports]

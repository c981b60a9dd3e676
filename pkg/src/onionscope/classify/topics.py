"""Topic terms and TF-IDF rankings over the cleaned homepage corpus.

Both produce the corpus-dependent half of the domain bundle: 100 boolean
topic-term presence features (10 topics x top-10 terms) and the per-domain
top-10 TF-IDF term list.
"""

from __future__ import annotations

import math
import re
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
from sklearn.decomposition import LatentDirichletAllocation
from sklearn.feature_extraction.text import CountVectorizer

N_TOPICS = 10
TERMS_PER_TOPIC = 10
MIN_CORPUS_SIZE = 100

_TOKEN_RE = re.compile(r"[a-z0-9]+")


class CorpusTooSmall(ValueError):
    pass


def tokenize(text: str) -> list[str]:
    return _TOKEN_RE.findall(text.lower())


@dataclass(slots=True)
class TopicModel:
    """Fitted LDA summarized as its top terms; presence features only need
    the term lists, so the sklearn object is not retained."""

    topic_terms: tuple[tuple[str, ...], ...]
    seed: int

    @property
    def feature_names(self) -> list[str]:
        return [
            f"topic{t}:{term}"
            for t, terms in enumerate(self.topic_terms)
            for term in terms
        ]

    def presence(self, text: str) -> tuple[bool, ...]:
        tokens = set(tokenize(text))
        return tuple(
            term in tokens
            for terms in self.topic_terms
            for term in terms
        )


def fit_topics(
    corpus: Sequence[str],
    topics: int = N_TOPICS,
    terms_per_topic: int = TERMS_PER_TOPIC,
    seed: int = 0,
    min_corpus: int = MIN_CORPUS_SIZE,
) -> TopicModel:
    """Fit LDA and keep each topic's top terms (ties broken by term index,
    which CountVectorizer assigns alphabetically)."""
    if len(corpus) < min_corpus:
        raise CorpusTooSmall(f"{len(corpus)} documents < required {min_corpus}")
    vectorizer = CountVectorizer(tokenizer=tokenize, preprocessor=lambda x: x,
                                 lowercase=False, token_pattern=None)
    counts = vectorizer.fit_transform(corpus)
    lda = LatentDirichletAllocation(
        n_components=topics,
        random_state=seed,
        learning_method="batch",
        max_iter=20,
    )
    lda.fit(counts)
    vocab = vectorizer.get_feature_names_out()
    topic_terms = []
    for row in lda.components_:
        k = min(terms_per_topic, len(vocab))
        top = np.argsort(-row, kind="stable")[:k]
        topic_terms.append(tuple(vocab[i] for i in top))
    return TopicModel(tuple(topic_terms), seed)


@dataclass(slots=True)
class CorpusStats:
    """Document frequencies for IDF weighting."""

    n_documents: int
    document_frequency: dict[str, int] = field(default_factory=dict)

    @classmethod
    def from_corpus(cls, corpus: Iterable[str]) -> "CorpusStats":
        df: Counter[str] = Counter()
        n = 0
        for doc in corpus:
            n += 1
            df.update(set(tokenize(doc)))
        return cls(n, dict(df))

    def idf(self, term: str) -> float:
        # unseen terms get the maximum weight (df treated as 1)
        df = max(1, self.document_frequency.get(term, 0))
        return math.log(self.n_documents / df) if self.n_documents else 0.0


def tfidf_top10(text: str, stats: CorpusStats, top_n: int = 10) -> tuple[str, ...]:
    """Top terms by tf*idf, ties broken lexicographically; fewer than
    ``top_n`` distinct terms returns them all."""
    counts = Counter(tokenize(text))
    scored = sorted(
        ((-(count * stats.idf(term)), term) for term, count in counts.items()),
    )
    return tuple(term for _, term in scored[:top_n])


def apply_corpus_features(bundles, topic_model: TopicModel, stats: CorpusStats) -> None:
    """Attach topic presence and TF-IDF terms to bundles in place."""
    for bundle in bundles:
        bundle.lda_topic_presence = topic_model.presence(bundle.cleaned_text)
        bundle.tfidf_top10 = tfidf_top10(bundle.cleaned_text, stats)

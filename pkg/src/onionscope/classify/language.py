"""Language identification over Boolean character trigrams."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from ..extract.markup import char_trigrams
from .models import ModelKind, TrainedModel, train


@dataclass
class LanguageModel:
    """Trigram vocabulary fixed at train time plus the NB model over it."""

    vocabulary: tuple[str, ...]
    model: TrainedModel

    def vectorize(self, trigrams: Iterable[str]) -> np.ndarray:
        present = set(trigrams)
        return np.asarray([1.0 if t in present else 0.0 for t in self.vocabulary])

    def predict(self, trigrams: Iterable[str]) -> str:
        return str(self.model.predict(self.vectorize(trigrams))[0])


def train_language_model(
    texts: Sequence[str],
    languages: Sequence[str],
    seed: int = 0,
    max_vocabulary: int = 20000,
) -> LanguageModel:
    """Bernoulli NB over trigram presence. The vocabulary is every trigram
    seen in training, most-frequent first when capped."""
    counts: dict[str, int] = {}
    gram_sets = []
    for text in texts:
        grams = char_trigrams(text.lower())
        gram_sets.append(grams)
        for g in grams:
            counts[g] = counts.get(g, 0) + 1
    vocab = tuple(sorted(counts, key=lambda g: (-counts[g], g))[:max_vocabulary])
    index = {g: i for i, g in enumerate(vocab)}
    X = np.zeros((len(texts), len(vocab)))
    for row, grams in enumerate(gram_sets):
        for g in grams:
            col = index.get(g)
            if col is not None:
                X[row, col] = 1.0
    model = train(ModelKind.NAIVE_BAYES, X, list(languages),
                  feature_names=vocab, seed=seed)
    return LanguageModel(vocab, model)

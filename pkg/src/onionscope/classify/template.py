"""Template similarity: pairwise NB decision plus transitive clustering.

A pair of homepages is "same template" when a naive Bayes model over
symmetric pair features says so; clusters are the connected components of
the similar-pair graph, which makes them mutually exclusive by
construction.
"""

from __future__ import annotations

from dataclasses import dataclass
from difflib import SequenceMatcher
from itertools import combinations
from typing import Iterable, Optional, Sequence

import numpy as np
from sklearn.naive_bayes import GaussianNB

from .features import DomainFeatureBundle

PAIR_FEATURE_NAMES = (
    "dom_seq_similarity",
    "css_seq_similarity",
    "tfidf_overlap",
    "external_url_delta",
)


def _seq_ratio(a: Sequence[str], b: Sequence[str]) -> float:
    if not a and not b:
        return 1.0
    return SequenceMatcher(None, list(a), list(b), autojunk=False).ratio()


def _css_similarity(a: DomainFeatureBundle, b: DomainFeatureBundle) -> float:
    """Best-match average of stylesheet rule-sequence ratios, symmetric by
    averaging both directions."""
    if not a.css_seqs and not b.css_seqs:
        return 1.0
    if not a.css_seqs or not b.css_seqs:
        return 0.0

    def directional(src, dst):
        return float(np.mean([
            max(_seq_ratio(s, d) for d in dst) for s in src
        ]))

    return (directional(a.css_seqs, b.css_seqs)
            + directional(b.css_seqs, a.css_seqs)) / 2


def pair_features(a: DomainFeatureBundle, b: DomainFeatureBundle) -> list[float]:
    """Symmetric by construction: every component is invariant to swapping
    the two bundles."""
    tf_a, tf_b = set(a.tfidf_top10), set(b.tfidf_top10)
    union = tf_a | tf_b
    overlap = len(tf_a & tf_b) / len(union) if union else 1.0
    return [
        _seq_ratio(a.dom_seq, b.dom_seq),
        _css_similarity(a, b),
        overlap,
        float(abs(a.n_external_urls - b.n_external_urls)),
    ]


@dataclass
class TemplateMatcher:
    estimator: GaussianNB
    seed: int

    def similar(self, a: DomainFeatureBundle, b: DomainFeatureBundle) -> bool:
        vec = np.asarray([pair_features(a, b)])
        return bool(self.estimator.predict(vec)[0] == 1)


def train_template_matcher(
    bundles: Sequence[DomainFeatureBundle],
    template_ids: Sequence,
    seed: int = 0,
    max_negative_pairs: int = 20000,
) -> TemplateMatcher:
    """Supervision comes from known template groups: pairs within a group
    are positives, across groups negatives. Negative pairs are subsampled
    before featurization; featurizing every cross-group pair is quadratic
    and dominates run time on corpora past a few hundred domains."""
    rng = np.random.default_rng(seed)
    pos_pairs, neg_pairs = [], []
    for i, j in combinations(range(len(bundles)), 2):
        if template_ids[i] == template_ids[j]:
            pos_pairs.append((i, j))
        else:
            neg_pairs.append((i, j))
    if not pos_pairs or not neg_pairs:
        raise ValueError("need both same-template and different-template pairs")
    if len(neg_pairs) > max_negative_pairs:
        keep = rng.choice(len(neg_pairs), size=max_negative_pairs, replace=False)
        neg_pairs = [neg_pairs[int(k)] for k in sorted(keep)]
    pos = [pair_features(bundles[i], bundles[j]) for i, j in pos_pairs]
    neg = [pair_features(bundles[i], bundles[j]) for i, j in neg_pairs]
    X = np.asarray(pos + neg)
    y = np.asarray([1] * len(pos) + [0] * len(neg))
    est = GaussianNB()
    est.fit(X, y)
    return TemplateMatcher(est, seed)


def cluster_templates(
    ids: Sequence,
    bundles: Sequence[DomainFeatureBundle],
    matcher: TemplateMatcher,
    candidate_pairs: Optional[Iterable[tuple[int, int]]] = None,
) -> list[list]:
    """Connected components of the pairwise-similar graph; every id lands
    in exactly one cluster. Output sorted for stable reporting.

    candidate_pairs restricts which index pairs are even scored (blocking);
    a pair outside it is treated as dissimilar. Default is every pair."""
    n = len(ids)
    parent = list(range(n))

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    if candidate_pairs is None:
        pairs = list(combinations(range(n), 2))
    else:
        pairs = sorted({(min(i, j), max(i, j))
                        for i, j in candidate_pairs if i != j})
    if pairs:
        vecs = np.asarray([
            pair_features(bundles[i], bundles[j]) for i, j in pairs
        ])
        decisions = matcher.estimator.predict(vecs)
        for (i, j), similar in zip(pairs, decisions):
            if similar == 1:
                ri, rj = find(i), find(j)
                if ri != rj:
                    parent[max(ri, rj)] = min(ri, rj)

    groups: dict[int, list] = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(ids[i])
    return sorted((sorted(g, key=repr) for g in groups.values()), key=repr)

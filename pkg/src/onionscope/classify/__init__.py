"""Domain classification: features, models, evaluation, prediction."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..model import CATEGORIES
from .features import (
    ADDRESS_FEATURE_NAMES,
    AddressFeatureVector,
    DomainFeatureBundle,
    MissingHomepage,
    blacklist_hits,
    candidate_to_features,
    category_vector,
    extract_domain_features,
    illicitness_vector,
    tracking_vector,
)
from .harness import ClassTooSmall, CvReport, cross_validate, macro_ovr_auc, rank_auc, stratified_folds
from .language import LanguageModel, train_language_model
from .models import (
    ModelKind,
    SingleClassData,
    TrainedModel,
    deserialize_model,
    load_model,
    save_model,
    serialize_model,
    train,
)
from .template import TemplateMatcher, cluster_templates, pair_features, train_template_matcher
from .tracking import load_blacklist, parse_blacklist, scripts_hit_blacklist
from .topics import (
    CorpusStats,
    CorpusTooSmall,
    TopicModel,
    apply_corpus_features,
    fit_topics,
    tfidf_top10,
)
from .attribution import attribute_addresses, train_attribution_model


@dataclass(slots=True)
class DomainPrediction:
    language: str
    illicit: bool
    illicit_score: float
    category: str
    tracking: bool


@dataclass
class DomainModels:
    """The trained per-domain classifiers used at prediction time."""

    language: LanguageModel
    illicitness: TrainedModel
    category: TrainedModel
    tracking: TrainedModel


def predict_domain(models: DomainModels, bundle: DomainFeatureBundle) -> DomainPrediction:
    """Apply the independent per-domain classifiers to one bundle."""
    language = models.language.predict(bundle.trigrams)

    ill_vec = np.asarray([illicitness_vector(bundle)])
    ill_scores = models.illicitness.scores(ill_vec)[0]
    pos_col = list(models.illicitness.estimator.classes_).index(1)
    illicit_score = float(ill_scores[pos_col])
    illicit = bool(models.illicitness.predict(ill_vec)[0] == 1)

    cat = str(models.category.predict(np.asarray([category_vector(bundle)]))[0])
    if cat not in CATEGORIES:
        cat = "other"

    tracking = bool(
        models.tracking.predict(np.asarray([tracking_vector(bundle)]))[0] == 1
    )
    return DomainPrediction(language, illicit, illicit_score, cat, tracking)

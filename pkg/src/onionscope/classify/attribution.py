"""Self-attribution: which candidate addresses does a domain present as
its own payment or donation address."""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .features import ADDRESS_FEATURE_NAMES, AddressFeatureVector
from .models import ModelKind, TrainedModel, train


def train_attribution_model(
    vectors: Sequence[AddressFeatureVector],
    labels: Sequence[bool],
    seed: int = 0,
) -> TrainedModel:
    X = [v.as_floats() for v in vectors]
    y = [1 if lab else 0 for lab in labels]
    return train(ModelKind.DECISION_FOREST, X, y,
                 feature_names=ADDRESS_FEATURE_NAMES, seed=seed)


def attribute_addresses(
    vectors: Sequence[AddressFeatureVector],
    model: TrainedModel,
) -> set[str]:
    """Subset of the candidates the model marks self-attributed."""
    if not vectors:
        return set()
    X = np.asarray([v.as_floats() for v in vectors])
    predictions = model.predict(X)
    return {v.address for v, p in zip(vectors, predictions) if p == 1}

"""Trainable model wrappers with a self-describing serialized container.

Four model kinds cover the six classifier roles. Wrappers pin seeds and
record the feature schema so a loaded model refuses mismatched inputs.
"""

from __future__ import annotations

import io
import pickle
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Optional, Sequence

import numpy as np
from sklearn.ensemble import IsolationForest, RandomForestClassifier
from sklearn.multiclass import OneVsRestClassifier
from sklearn.naive_bayes import BernoulliNB
from sklearn.svm import LinearSVC

SCHEMA_VERSION = 1
CONTAINER_FORMAT = "onionscope-model"


class ModelKind(str, Enum):
    NAIVE_BAYES = "naive-bayes"
    DECISION_FOREST = "decision-forest"
    MAX_MARGIN_LINEAR = "max-margin-linear"
    ISOLATION_SCORER = "isolation-scorer"


class SingleClassData(ValueError):
    pass


class ModelContainerError(ValueError):
    pass


def _build_estimator(kind: ModelKind, seed: int, n_classes: int):
    if kind is ModelKind.NAIVE_BAYES:
        base = BernoulliNB()
        return OneVsRestClassifier(base) if n_classes > 2 else base
    if kind is ModelKind.DECISION_FOREST:
        base = RandomForestClassifier(
            n_estimators=100, max_features="sqrt", random_state=seed
        )
        return OneVsRestClassifier(base) if n_classes > 2 else base
    if kind is ModelKind.MAX_MARGIN_LINEAR:
        base = LinearSVC(random_state=seed)
        return OneVsRestClassifier(base) if n_classes > 2 else base
    if kind is ModelKind.ISOLATION_SCORER:
        return IsolationForest(random_state=seed, contamination="auto")
    raise ValueError(f"unknown model kind: {kind}")


@dataclass
class TrainedModel:
    kind: ModelKind
    seed: int
    feature_names: tuple[str, ...]
    classes: tuple
    estimator: object
    schema_version: int = SCHEMA_VERSION

    @property
    def sub_model_count(self) -> int:
        """Number of one-vs-rest members (1 for direct binary models)."""
        est = self.estimator
        if isinstance(est, OneVsRestClassifier):
            return len(est.estimators_)
        return 1

    def _check(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        if X.ndim == 1:
            X = X.reshape(1, -1)
        if X.shape[1] != len(self.feature_names):
            raise ValueError(
                f"expected {len(self.feature_names)} features, got {X.shape[1]}"
            )
        return X

    def predict(self, X) -> np.ndarray:
        return self.estimator.predict(self._check(X))

    def scores(self, X) -> np.ndarray:
        """Per-class score matrix (n, n_classes); binary models return the
        positive-class column broadcast to two columns' complement."""
        X = self._check(X)
        est = self.estimator
        if hasattr(est, "predict_proba"):
            return np.asarray(est.predict_proba(X))
        if hasattr(est, "decision_function"):
            raw = np.asarray(est.decision_function(X))
            if raw.ndim == 1:
                return np.column_stack([-raw, raw])
            return raw
        raise TypeError("estimator exposes no scoring interface")

    def outlier_scores(self, X) -> np.ndarray:
        """Higher = more anomalous (isolation scorer only)."""
        if self.kind is not ModelKind.ISOLATION_SCORER:
            raise TypeError("outlier scores only defined for isolation-scorer")
        return -self.estimator.score_samples(self._check(X))


def train(
    kind: ModelKind | str,
    X: Sequence[Sequence[float]],
    y: Optional[Sequence] = None,
    feature_names: Optional[Sequence[str]] = None,
    seed: int = 0,
) -> TrainedModel:
    """Fit one model. Supervised kinds require >= 2 classes; the isolation
    scorer is unsupervised and ignores labels."""
    kind = ModelKind(kind)
    X = np.asarray(X, dtype=np.float64)
    if feature_names is None:
        feature_names = tuple(f"f{i}" for i in range(X.shape[1]))
    feature_names = tuple(feature_names)
    if len(feature_names) != X.shape[1]:
        raise ValueError("feature_names length mismatch")

    if kind is ModelKind.ISOLATION_SCORER:
        est = _build_estimator(kind, seed, 0)
        est.fit(X)
        return TrainedModel(kind, seed, feature_names, (), est)

    if y is None:
        raise ValueError(f"{kind.value} is supervised and needs labels")
    y = np.asarray(y)
    classes = tuple(sorted(set(y.tolist())))
    if len(classes) < 2:
        raise SingleClassData(f"need >= 2 classes, got {classes}")
    est = _build_estimator(kind, seed, len(classes))
    est.fit(X, y)
    return TrainedModel(kind, seed, feature_names, classes, est)


def serialize_model(model: TrainedModel) -> bytes:
    """Self-describing container: header fields first so tools can inspect
    kind/seed/schema without loading the estimator payload."""
    envelope = {
        "format": CONTAINER_FORMAT,
        "schema_version": model.schema_version,
        "model_kind": model.kind.value,
        "seed": model.seed,
        "feature_names": list(model.feature_names),
        "classes": list(model.classes),
        "payload": pickle.dumps(model.estimator, protocol=4),
    }
    buf = io.BytesIO()
    pickle.dump(envelope, buf, protocol=4)
    return buf.getvalue()


def deserialize_model(blob: bytes) -> TrainedModel:
    try:
        envelope = pickle.loads(blob)
    except Exception as exc:
        raise ModelContainerError(f"unreadable model container: {exc}") from exc
    if not isinstance(envelope, dict) or envelope.get("format") != CONTAINER_FORMAT:
        raise ModelContainerError("not a model container")
    if envelope.get("schema_version") != SCHEMA_VERSION:
        raise ModelContainerError(
            f"schema version {envelope.get('schema_version')} unsupported"
        )
    return TrainedModel(
        kind=ModelKind(envelope["model_kind"]),
        seed=envelope["seed"],
        feature_names=tuple(envelope["feature_names"]),
        classes=tuple(envelope["classes"]),
        estimator=pickle.loads(envelope["payload"]),
        schema_version=envelope["schema_version"],
    )


def save_model(model: TrainedModel, path: str | Path) -> None:
    Path(path).write_bytes(serialize_model(model))


def load_model(path: str | Path) -> TrainedModel:
    return deserialize_model(Path(path).read_bytes())

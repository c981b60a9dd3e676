"""Evaluation harness: rank AUC, stratified folds, cross-validation.

AUC is computed directly as the rank statistic P(score(pos) > score(neg))
with ties counted one half, so it is invariant under strictly monotone
score transforms by construction.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .models import ModelKind, TrainedModel, train


class ClassTooSmall(ValueError):
    pass


def _average_ranks(values: Sequence[float]) -> list[float]:
    """1-based ranks, ties averaged."""
    order = sorted(range(len(values)), key=lambda i: values[i])
    ranks = [0.0] * len(values)
    i = 0
    while i < len(order):
        j = i
        while j + 1 < len(order) and values[order[j + 1]] == values[order[i]]:
            j += 1
        avg = (i + j) / 2 + 1
        for k in range(i, j + 1):
            ranks[order[k]] = avg
        i = j + 1
    return ranks


def rank_auc(scores: Sequence[float], positives: Sequence[bool]) -> float:
    """Mann-Whitney form of the AUC: mean positive rank against negatives
    with half credit for ties."""
    scores = list(map(float, scores))
    flags = list(map(bool, positives))
    n_pos = sum(flags)
    n_neg = len(flags) - n_pos
    if n_pos == 0 or n_neg == 0:
        raise ValueError("AUC needs at least one positive and one negative")
    ranks = _average_ranks(scores)
    pos_rank_sum = sum(r for r, f in zip(ranks, flags) if f)
    u = pos_rank_sum - n_pos * (n_pos + 1) / 2
    return u / (n_pos * n_neg)


def macro_ovr_auc(score_matrix: np.ndarray, labels: Sequence, classes: Sequence) -> float:
    """Macro average of one-vs-rest AUCs using each class's score column.
    Classes absent from the labels are skipped."""
    labels = list(labels)
    aucs = []
    for idx, cls in enumerate(classes):
        flags = [lab == cls for lab in labels]
        if not any(flags) or all(flags):
            continue
        aucs.append(rank_auc(score_matrix[:, idx], flags))
    if not aucs:
        raise ValueError("no class had both positives and negatives")
    return float(np.mean(aucs))


def stratified_folds(labels: Sequence, k: int, seed: int = 0) -> list[int]:
    """Fold index per example: within each class, a seeded shuffle followed
    by round-robin assignment, so per-fold class counts differ by at most
    one from an even split."""
    rng = random.Random(seed)
    by_class: dict = {}
    for i, lab in enumerate(labels):
        by_class.setdefault(lab, []).append(i)
    fold_of = [0] * len(labels)
    # iterate classes in sorted order for determinism
    offset = 0
    for cls in sorted(by_class, key=repr):
        members = by_class[cls]
        if len(members) < k:
            raise ClassTooSmall(
                f"class {cls!r} has {len(members)} members < {k} folds"
            )
        rng.shuffle(members)
        for pos, idx in enumerate(members):
            fold_of[idx] = (pos + offset) % k
        offset += 1  # stagger so small classes spread across folds
    return fold_of


@dataclass(slots=True)
class CvReport:
    model_kind: str
    auc_mean: float
    auc_std: float
    fold_aucs: list[float]
    confusion: dict[tuple, int] = field(default_factory=dict)
    classes: tuple = ()

    def to_json(self) -> dict:
        return {
            "model_kind": self.model_kind,
            "auc_mean": self.auc_mean,
            "auc_std": self.auc_std,
            "fold_aucs": self.fold_aucs,
            "classes": list(self.classes),
            "confusion": [
                {"true": t, "predicted": p, "count": c}
                for (t, p), c in sorted(self.confusion.items(), key=repr)
            ],
        }


def cross_validate(
    X: Sequence[Sequence[float]],
    y: Sequence,
    model_kind: ModelKind | str,
    k: int = 10,
    seed: int = 0,
    feature_names: Optional[Sequence[str]] = None,
) -> CvReport:
    """k-fold stratified CV; each fold trains on the rest and scores the
    held-out part. Binary AUC uses the positive class's scores, multiclass
    is macro-averaged one-vs-rest."""
    X = np.asarray(X, dtype=np.float64)
    y = list(y)
    folds = stratified_folds(y, k, seed)
    classes = tuple(sorted(set(y)))

    fold_aucs: list[float] = []
    confusion: dict[tuple, int] = {}
    for fold in range(k):
        train_idx = [i for i, f in enumerate(folds) if f != fold]
        test_idx = [i for i, f in enumerate(folds) if f == fold]
        model = train(
            model_kind,
            X[train_idx],
            [y[i] for i in train_idx],
            feature_names=feature_names,
            seed=seed,
        )
        scores = model.scores(X[test_idx])
        truth = [y[i] for i in test_idx]
        # align score columns to the fold model's own class order
        model_classes = list(model.estimator.classes_)
        if len(classes) == 2:
            pos = classes[1]
            col = model_classes.index(pos)
            fold_aucs.append(rank_auc(scores[:, col], [t == pos for t in truth]))
        else:
            fold_aucs.append(macro_ovr_auc(scores, truth, model_classes))
        for t, p in zip(truth, model.predict(X[test_idx])):
            key = (t, p.item() if hasattr(p, "item") else p)
            confusion[key] = confusion.get(key, 0) + 1

    return CvReport(
        model_kind=ModelKind(model_kind).value,
        auc_mean=float(np.mean(fold_aucs)),
        auc_std=float(np.std(fold_aucs)),
        fold_aucs=fold_aucs,
        confusion=confusion,
        classes=classes,
    )

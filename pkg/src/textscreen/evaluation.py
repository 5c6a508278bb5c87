"""Validation engine: confusion tallies, threshold metrics, ROC/AUC, k-fold CV.

The positive class is diagnosed; a score at or above the threshold predicts
it. Metrics with a zero denominator are reported as an explicit undefined
marker (None), never NaN or a silent zero. ROC curves sweep the distinct
scores in descending order with ties grouped, which makes the trapezoidal
area equal the pairwise-ranking probability.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .corpus import DIAGNOSED
from .models import TrainConfig, labels_to_targets


class EvaluationError(Exception):
    """Raised for degenerate inputs the metrics cannot be defined on."""


@dataclass(frozen=True)
class ConfusionMatrix:
    tp: int
    fp: int
    tn: int
    fn: int

    def __post_init__(self) -> None:
        if min(self.tp, self.fp, self.tn, self.fn) < 0:
            raise EvaluationError("confusion counts must be nonnegative")

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn

    def to_dict(self) -> dict:
        return {"tp": self.tp, "fp": self.fp, "tn": self.tn, "fn": self.fn}


@dataclass(frozen=True)
class Metrics:
    accuracy: float
    precision: float | None
    recall: float | None
    f1: float | None

    def to_dict(self) -> dict:
        return {
            "accuracy": self.accuracy,
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
        }


@dataclass(frozen=True)
class RocCurve:
    points: tuple[tuple[float, float], ...]
    thresholds: tuple[float, ...]
    auc: float

    def __post_init__(self) -> None:
        if len(self.points) != len(self.thresholds):
            raise EvaluationError("each ROC point needs a threshold")
        if self.points[0] != (0.0, 0.0) or self.points[-1] != (1.0, 1.0):
            raise EvaluationError("ROC curve must run from (0,0) to (1,1)")
        fprs = [p[0] for p in self.points]
        tprs = [p[1] for p in self.points]
        if any(b < a for a, b in zip(fprs, fprs[1:])) or any(
            b < a for a, b in zip(tprs, tprs[1:])
        ):
            raise EvaluationError("ROC coordinates must be nondecreasing")


def confusion(scores, labels, threshold: float) -> ConfusionMatrix:
    """Tally predictions at a threshold; score >= threshold means diagnosed."""
    if len(scores) != len(labels):
        raise EvaluationError(
            f"{len(scores)} scores vs {len(labels)} labels: lengths must match"
        )
    if len(scores) == 0:
        raise EvaluationError("cannot tally an empty evaluation set")
    if not 0.0 < threshold < 1.0:
        raise EvaluationError(f"threshold must be in (0,1), got {threshold}")
    tp = fp = tn = fn = 0
    for score, label in zip(scores, labels):
        predicted_positive = score >= threshold
        actual_positive = label == DIAGNOSED
        if predicted_positive and actual_positive:
            tp += 1
        elif predicted_positive:
            fp += 1
        elif actual_positive:
            fn += 1
        else:
            tn += 1
    return ConfusionMatrix(tp=tp, fp=fp, tn=tn, fn=fn)


def metrics_from_confusion(m: ConfusionMatrix) -> Metrics:
    """Accuracy, precision, recall, F1 from one tally.

    accuracy = (tp+tn)/total, precision = tp/(tp+fp), recall = tp/(tp+fn),
    f1 = harmonic mean of precision and recall. A zero denominator makes the
    affected metric None.
    """
    if m.total < 1:
        raise EvaluationError("confusion matrix is empty")
    accuracy = (m.tp + m.tn) / m.total
    precision = m.tp / (m.tp + m.fp) if m.tp + m.fp > 0 else None
    recall = m.tp / (m.tp + m.fn) if m.tp + m.fn > 0 else None
    if precision is None or recall is None or precision + recall == 0:
        f1 = None
    else:
        f1 = 2 * precision * recall / (precision + recall)
    return Metrics(accuracy=accuracy, precision=precision, recall=recall, f1=f1)


def roc_curve(scores, labels) -> RocCurve:
    """Staircase ROC over descending distinct scores, ties grouped.

    The curve is prepended with (0,0) at an infinite threshold and ends at
    (1,1), reached once every instance is predicted positive. AUC is the
    trapezoidal area.
    """
    scores = np.asarray(scores, dtype=float)
    if len(scores) != len(labels):
        raise EvaluationError(
            f"{len(scores)} scores vs {len(labels)} labels: lengths must match"
        )
    y = labels_to_targets(labels)
    positives = int(np.sum(y))
    negatives = len(y) - positives
    if positives == 0 or negatives == 0:
        raise EvaluationError("ROC needs both classes present")
    order = np.argsort(-scores, kind="stable")
    points = [(0.0, 0.0)]
    thresholds = [math.inf]
    tp = fp = 0
    i = 0
    while i < len(order):
        value = scores[order[i]]
        while i < len(order) and scores[order[i]] == value:
            if y[order[i]] == 1.0:
                tp += 1
            else:
                fp += 1
            i += 1
        points.append((fp / negatives, tp / positives))
        thresholds.append(float(value))
    fprs = [p[0] for p in points]
    tprs = [p[1] for p in points]
    auc = float(np.trapezoid(tprs, fprs))
    return RocCurve(points=tuple(points), thresholds=tuple(thresholds), auc=auc)


def kfold_split(n: int, k: int, seed: int, stratify_labels=None) -> list[list[int]]:
    """Shuffle indices 0..n-1 into k folds whose sizes differ by at most 1.

    With stratify_labels, each class is shuffled and dealt separately; the
    per-class remainder rotates across folds so total sizes stay within 1
    while per-fold class counts stay within +/-1 of the class ratio.
    """
    if k < 2:
        raise EvaluationError(f"k must be >= 2, got {k}")
    if n < k:
        raise EvaluationError(f"cannot make {k} folds from {n} items")
    rng = np.random.default_rng(seed)
    folds: list[list[int]] = [[] for _ in range(k)]
    if stratify_labels is None:
        order = rng.permutation(n)
        base, extra = divmod(n, k)
        start = 0
        for j in range(k):
            size = base + (1 if j < extra else 0)
            folds[j] = sorted(int(i) for i in order[start : start + size])
            start += size
        return folds
    if len(stratify_labels) != n:
        raise EvaluationError("stratify_labels length must equal n")
    offset = 0
    for label in sorted(set(stratify_labels)):
        members = [i for i in range(n) if stratify_labels[i] == label]
        if len(members) < k:
            raise EvaluationError(
                f"class {label!r} has {len(members)} members, fewer than k={k}"
            )
        order = rng.permutation(len(members))
        base, extra = divmod(len(members), k)
        receives_extra = {(offset + t) % k for t in range(extra)}
        start = 0
        for j in range(k):
            size = base + (1 if j in receives_extra else 0)
            folds[j].extend(members[int(i)] for i in order[start : start + size])
            start += size
        offset = (offset + extra) % k
    return [sorted(fold) for fold in folds]


@dataclass(frozen=True)
class FoldResult:
    fold: int
    valid: bool
    metrics: Metrics | None = None
    auc: float | None = None
    confusion_matrix: ConfusionMatrix | None = None
    error: str | None = None

    def to_dict(self) -> dict:
        return {
            "fold": self.fold,
            "valid": self.valid,
            "metrics": None if self.metrics is None else self.metrics.to_dict(),
            "auc": self.auc,
            "confusion": None
            if self.confusion_matrix is None
            else self.confusion_matrix.to_dict(),
            "error": self.error,
        }


METRIC_KEYS = ("accuracy", "precision", "recall", "f1", "auc")


@dataclass(frozen=True)
class CvReport:
    k: int
    seed: int
    threshold: float
    per_fold: tuple[FoldResult, ...]
    mean: dict[str, float | None]
    std: dict[str, float | None]
    pooled_confusion: ConfusionMatrix | None
    pooled_roc: RocCurve | None
    pooled_metrics: Metrics | None = None

    def __post_init__(self) -> None:
        if len(self.per_fold) != self.k:
            raise EvaluationError("per_fold must have exactly k entries")

    def to_dict(self) -> dict:
        pooled = None
        if self.pooled_confusion is not None:
            pooled = {
                "confusion": self.pooled_confusion.to_dict(),
                "metrics": None
                if self.pooled_metrics is None
                else self.pooled_metrics.to_dict(),
                "auc": None if self.pooled_roc is None else self.pooled_roc.auc,
                "roc_points": None
                if self.pooled_roc is None
                else [
                    [fpr, tpr, None if math.isinf(t) else t]
                    for (fpr, tpr), t in zip(self.pooled_roc.points, self.pooled_roc.thresholds)
                ],
            }
        return {
            "k": self.k,
            "seed": self.seed,
            "threshold": self.threshold,
            "per_fold": [fold.to_dict() for fold in self.per_fold],
            "mean": self.mean,
            "std": self.std,
            "pooled": pooled,
        }


def _aggregate(per_fold) -> tuple[dict, dict]:
    mean: dict[str, float | None] = {}
    std: dict[str, float | None] = {}
    for key in METRIC_KEYS:
        values = []
        for fold in per_fold:
            if not fold.valid:
                continue
            value = fold.auc if key == "auc" else getattr(fold.metrics, key)
            if value is not None:
                values.append(value)
        if values:
            mean[key] = float(np.mean(values))
            std[key] = float(np.std(values))
        else:
            mean[key] = None
            std[key] = None
    return mean, std


def cross_validate(
    items,
    labels,
    trainer,
    k: int = 10,
    cfg: TrainConfig | None = None,
    threshold: float = 0.5,
    stratified: bool = True,
) -> CvReport:
    """Rotate k held-out folds through a trainer and aggregate the metrics.

    trainer(train_items, train_labels, cfg) must return a scorer mapping a
    list of items to diagnosed-class probabilities; featurization therefore
    happens inside the trainer, so vocabularies are rebuilt from each fold's
    training portion only. Folds whose training portion is single-class are
    recorded as invalid rather than aborting the report.
    """
    items = list(items)
    labels = list(labels)
    if len(items) != len(labels):
        raise EvaluationError("items and labels must have equal length")
    if cfg is None:
        cfg = TrainConfig()
    folds = kfold_split(
        len(items), k, cfg.seed, stratify_labels=labels if stratified else None
    )
    per_fold: list[FoldResult] = []
    pooled_scores: list[float] = []
    pooled_labels: list[str] = []
    for j, test_idx in enumerate(folds):
        test_set = set(test_idx)
        train_items = [items[i] for i in range(len(items)) if i not in test_set]
        train_labels = [labels[i] for i in range(len(items)) if i not in test_set]
        if len(set(train_labels)) < 2:
            per_fold.append(
                FoldResult(
                    fold=j,
                    valid=False,
                    error="training portion contains a single class",
                )
            )
            continue
        scorer = trainer(train_items, train_labels, cfg)
        test_items = [items[i] for i in test_idx]
        test_labels = [labels[i] for i in test_idx]
        scores = np.asarray(scorer(test_items), dtype=float)
        matrix = confusion(scores, test_labels, threshold)
        fold_auc = (
            roc_curve(scores, test_labels).auc if len(set(test_labels)) == 2 else None
        )
        per_fold.append(
            FoldResult(
                fold=j,
                valid=True,
                metrics=metrics_from_confusion(matrix),
                auc=fold_auc,
                confusion_matrix=matrix,
            )
        )
        pooled_scores.extend(float(s) for s in scores)
        pooled_labels.extend(test_labels)
    mean, std = _aggregate(per_fold)
    pooled_confusion = pooled_metrics = pooled_roc = None
    if pooled_scores:
        pooled_confusion = confusion(pooled_scores, pooled_labels, threshold)
        pooled_metrics = metrics_from_confusion(pooled_confusion)
        if len(set(pooled_labels)) == 2:
            pooled_roc = roc_curve(pooled_scores, pooled_labels)
    return CvReport(
        k=k,
        seed=cfg.seed,
        threshold=threshold,
        per_fold=tuple(per_fold),
        mean=mean,
        std=std,
        pooled_confusion=pooled_confusion,
        pooled_roc=pooled_roc,
        pooled_metrics=pooled_metrics,
    )

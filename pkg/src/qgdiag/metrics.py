"""Quantitative instruments: Pearson correlation, binary classification
report, the multi-label F1 family with exact-match and over-prediction
rates, and the overestimation rate for 3-point scores.

All functions are pure; degenerate inputs raise MetricError instead of
silently returning a default.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Dict, List, Sequence, Tuple

from .corpus import ErrorLabelSet
from .taxonomy import ErrorType

__all__ = [
    "MetricError",
    "MultilabelReport",
    "ScorePairSeries",
    "pearson",
    "classification_report",
    "multilabel_report",
    "overestimation_rate",
]


class MetricError(ValueError):
    pass


def pearson(xs: Sequence[float], ys: Sequence[float]) -> float:
    """Product-moment correlation; undefined (raises) on zero variance."""
    if len(xs) != len(ys):
        raise MetricError(f"length mismatch: {len(xs)} vs {len(ys)}")
    n = len(xs)
    if n < 2:
        raise MetricError("need at least 2 paired observations")
    mean_x = sum(xs) / n
    mean_y = sum(ys) / n
    dx = [x - mean_x for x in xs]
    dy = [y - mean_y for y in ys]
    var_x = sum(d * d for d in dx)
    var_y = sum(d * d for d in dy)
    if var_x == 0.0 or var_y == 0.0:
        raise MetricError("correlation undefined: a series has zero variance")
    cov = sum(a * b for a, b in zip(dx, dy))
    return cov / math.sqrt(var_x * var_y)


def _prf(tp: float, fp: float, fn: float) -> Tuple[float, float, float]:
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return precision, recall, f1


def classification_report(
    preds: Sequence[int], golds: Sequence[int]
) -> Dict[str, float]:
    """Binary accuracy plus macro precision/recall/F1 over both classes.

    Zero-denominator class metrics are 0 by convention, so a degenerate
    all-one prediction against all-one gold scores macro F1 = 0.5.
    """
    if len(preds) != len(golds):
        raise MetricError(f"length mismatch: {len(preds)} vs {len(golds)}")
    if not preds:
        raise MetricError("need at least one prediction")
    per_class = []
    for cls in (0, 1):
        tp = sum(1 for p, g in zip(preds, golds) if p == cls and g == cls)
        fp = sum(1 for p, g in zip(preds, golds) if p == cls and g != cls)
        fn = sum(1 for p, g in zip(preds, golds) if p != cls and g == cls)
        per_class.append(_prf(tp, fp, fn))
    accuracy = sum(1 for p, g in zip(preds, golds) if p == g) / len(preds)
    return {
        "accuracy": accuracy,
        "macro_precision": (per_class[0][0] + per_class[1][0]) / 2,
        "macro_recall": (per_class[0][1] + per_class[1][1]) / 2,
        "macro_f1": (per_class[0][2] + per_class[1][2]) / 2,
    }


@dataclass(frozen=True)
class MultilabelReport:
    micro_f1: float
    macro_f1: float
    weighted_f1: float
    emr: float
    opr: float
    # Labels with neither gold nor predicted support, left out of the macro mean.
    excluded_labels: Tuple[str, ...] = ()

    def as_dict(self) -> Dict[str, object]:
        return {
            "micro_f1": self.micro_f1,
            "macro_f1": self.macro_f1,
            "weighted_f1": self.weighted_f1,
            "emr": self.emr,
            "opr": self.opr,
            "excluded_labels": list(self.excluded_labels),
        }


def multilabel_report(
    preds: Sequence[ErrorLabelSet], golds: Sequence[ErrorLabelSet]
) -> MultilabelReport:
    """Micro/macro/weighted F1 over the 11 labels, exact-match rate, and the
    over-prediction rate (spurious predicted instances / predicted instances,
    pooled over the whole collection)."""
    if len(preds) != len(golds):
        raise MetricError(f"length mismatch: {len(preds)} vs {len(golds)}")
    if not preds:
        raise MetricError("need at least one prediction")

    tp = {e: 0 for e in ErrorType}
    fp = {e: 0 for e in ErrorType}
    fn = {e: 0 for e in ErrorType}
    exact = 0
    spurious = 0
    predicted_instances = 0
    for pred, gold in zip(preds, golds):
        if pred == gold:
            exact += 1
        predicted_instances += len(pred)
        spurious += len(pred.errors - gold.errors)
        for e in ErrorType:
            in_pred, in_gold = e in pred, e in gold
            if in_pred and in_gold:
                tp[e] += 1
            elif in_pred:
                fp[e] += 1
            elif in_gold:
                fn[e] += 1

    micro = _prf(sum(tp.values()), sum(fp.values()), sum(fn.values()))[2]

    per_label_f1: Dict[ErrorType, float] = {}
    support: Dict[ErrorType, int] = {}
    excluded: List[str] = []
    for e in ErrorType:
        support[e] = tp[e] + fn[e]
        if support[e] == 0 and tp[e] + fp[e] == 0:
            excluded.append(e.value)
            continue
        per_label_f1[e] = _prf(tp[e], fp[e], fn[e])[2]
    macro = sum(per_label_f1.values()) / len(per_label_f1)
    total_support = sum(support.values())
    weighted = (
        sum(per_label_f1.get(e, 0.0) * support[e] for e in ErrorType) / total_support
    )
    return MultilabelReport(
        micro_f1=micro,
        macro_f1=macro,
        weighted_f1=weighted,
        emr=exact / len(preds),
        opr=spurious / predicted_instances,
        excluded_labels=tuple(excluded),
    )


@dataclass(frozen=True)
class ScorePairSeries:
    """Paired human/model scores for one dimension, in sample order."""

    human: Tuple[int, ...]
    model: Tuple[int, ...]

    def __post_init__(self) -> None:
        if len(self.human) != len(self.model):
            raise MetricError("paired series must have equal length")


def overestimation_rate(human: Sequence[int], model: Sequence[int]) -> float:
    """Fraction of low-quality items (human score <= 2) the model rates 3."""
    if len(human) != len(model):
        raise MetricError(f"length mismatch: {len(human)} vs {len(model)}")
    low = [(h, m) for h, m in zip(human, model) if h <= 2]
    if not low:
        raise MetricError("overestimation rate undefined: no low-quality samples")
    return sum(1 for _, m in low if m == 3) / len(low)

"""Scoring metrics for binary fraud classification.

All operations take a score vector and a 0/1 label vector and are pure;
the bundle gathers everything one model comparison needs, including the
detection-expansion ratio (how much wider the flagged set is than the
rule-labeled fraud set).
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np
from scipy.stats import rankdata

from .errors import UsageError


def _validate(scores, labels):
    scores = np.asarray(scores, dtype=np.float64).ravel()
    labels = np.asarray(labels).ravel().astype(np.int64)
    if scores.shape != labels.shape:
        raise UsageError("scores and labels must have equal length")
    if not ((labels == 0) | (labels == 1)).all():
        raise UsageError("labels must be 0 or 1")
    if labels.min() == labels.max():
        raise UsageError("both classes must be present")
    return scores, labels


def auc(scores, labels) -> float:
    """Rank-based (Mann-Whitney) AUC; tied scores count half."""
    scores, labels = _validate(scores, labels)
    n_pos = int(labels.sum())
    n_neg = labels.size - n_pos
    ranks = rankdata(scores, method="average")
    pos_rank_sum = float(ranks[labels == 1].sum())
    return (pos_rank_sum - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg)


def pr_curve(scores, labels):
    """(threshold, precision, recall) per distinct threshold, descending.

    A point's confusion counts classify score >= threshold as positive, so
    recall is non-decreasing along the returned list.
    """
    scores, labels = _validate(scores, labels)
    order = np.argsort(-scores, kind="stable")
    sorted_scores = scores[order]
    sorted_labels = labels[order]
    cum_tp = np.cumsum(sorted_labels)
    n_pos = int(labels.sum())
    # last index of each distinct score when sorted descending
    last = np.flatnonzero(np.diff(sorted_scores) != 0)
    last = np.append(last, scores.size - 1)
    points = []
    for idx in last:
        tp = int(cum_tp[idx])
        predicted = int(idx) + 1
        points.append((float(sorted_scores[idx]), tp / predicted, tp / n_pos))
    return points


def recall_at_precision(scores, labels, target_precision: float) -> float:
    """Best recall among thresholds whose precision meets the target."""
    if not 0.0 < target_precision <= 1.0:
        raise UsageError(f"target_precision must be in (0, 1], got {target_precision}")
    qualifying = [r for _, p, r in pr_curve(scores, labels) if p >= target_precision]
    return max(qualifying) if qualifying else 0.0


def threshold_at_precision(scores, labels, target_precision: float):
    """Threshold reaching the target precision with the best recall, or None."""
    best = None
    for t, p, r in pr_curve(scores, labels):
        if p >= target_precision and (best is None or r > best[1]):
            best = (t, r)
    return best[0] if best else None


def confusion_at(scores, labels, threshold: float):
    """(tp, fp, tn, fn) classifying score >= threshold as positive."""
    scores = np.asarray(scores, dtype=np.float64).ravel()
    labels = np.asarray(labels).ravel().astype(np.int64)
    pred = scores >= threshold
    tp = int(np.sum(pred & (labels == 1)))
    fp = int(np.sum(pred & (labels == 0)))
    tn = int(np.sum(~pred & (labels == 0)))
    fn = int(np.sum(~pred & (labels == 1)))
    return tp, fp, tn, fn


def f1_from_confusion(tp, fp, fn) -> float:
    denom = 2 * tp + fp + fn
    return 2.0 * tp / denom if denom else 0.0


def detection_expansion(tp: int, fp: int, fn: int) -> float:
    """(FP + TP + FN) / (TP + FN); the flagged-set widening factor."""
    if tp + fn <= 0:
        raise UsageError("detection expansion undefined without actual positives")
    if min(tp, fp, fn) < 0:
        raise UsageError("confusion counts must be nonnegative")
    return (fp + tp + fn) / (tp + fn)


@dataclass
class MetricsBundle:
    auc: float
    pr_points: list
    threshold: float
    f1_at_threshold: float
    best_f1: float
    best_f1_threshold: float
    recall_at_precision: dict
    confusion: tuple  # (tp, fp, tn, fn) at `threshold`
    detection_expansion: float
    de_threshold: float

    def to_dict(self):
        tp, fp, tn, fn = self.confusion
        return {
            "auc": self.auc,
            "threshold": self.threshold,
            "f1_at_threshold": self.f1_at_threshold,
            "best_f1": self.best_f1,
            "best_f1_threshold": self.best_f1_threshold,
            "recall_at_precision": {str(k): v for k, v in
                                    self.recall_at_precision.items()},
            "confusion": {"tp": tp, "fp": fp, "tn": tn, "fn": fn},
            "detection_expansion": self.detection_expansion,
            "de_threshold": self.de_threshold,
        }

    def save_json(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")

    def save_pr_csv(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("threshold,precision,recall\n")
            for t, p, r in self.pr_points:
                fh.write(f"{t!r},{p!r},{r!r}\n")


def compute_metrics(scores, labels, threshold: float = 0.5,
                    precision_targets=(0.9, 0.95),
                    de_precision_target: float = 0.9) -> MetricsBundle:
    """Full bundle at a fixed operating threshold plus curve-derived stats.

    Detection expansion is reported at the threshold reaching
    ``de_precision_target`` precision (falling back to ``threshold`` when
    no cutoff qualifies).
    """
    scores, labels = _validate(scores, labels)
    points = pr_curve(scores, labels)
    auc_value = auc(scores, labels)
    tp, fp, tn, fn = confusion_at(scores, labels, threshold)
    f1_fixed = f1_from_confusion(tp, fp, fn)
    best = max(points, key=lambda x: f1_from_confusion(
        *_tp_fp_fn_from_point(x, int(labels.sum()))))
    best_tp, best_fp, best_fn = _tp_fp_fn_from_point(best, int(labels.sum()))
    rap = {t: recall_at_precision(scores, labels, t) for t in precision_targets}
    de_thr = threshold_at_precision(scores, labels, de_precision_target)
    if de_thr is None:
        de_thr = threshold
    de = detection_expansion(*_confusion_to_de_args(
        confusion_at(scores, labels, de_thr)))
    return MetricsBundle(
        auc=auc_value, pr_points=points, threshold=threshold,
        f1_at_threshold=f1_fixed,
        best_f1=f1_from_confusion(best_tp, best_fp, best_fn),
        best_f1_threshold=float(best[0]),
        recall_at_precision=rap, confusion=(tp, fp, tn, fn),
        detection_expansion=de, de_threshold=float(de_thr))


def _tp_fp_fn_from_point(point, n_pos):
    t, precision, recall = point
    tp = int(round(recall * n_pos))
    predicted = int(round(tp / precision)) if precision > 0 else 0
    return tp, predicted - tp, n_pos - tp


def _confusion_to_de_args(confusion):
    tp, fp, _, fn = confusion
    return tp, fp, fn

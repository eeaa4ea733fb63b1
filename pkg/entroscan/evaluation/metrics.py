"""Confusion-count metrics, ROC curve and rank-based AUC."""

from dataclasses import asdict, dataclass, field, fields
from fractions import Fraction
from typing import List, Optional, Tuple

import numpy as np

from entroscan.errors import DegenerateLabels
from entroscan.utils.corpus import MALICIOUS


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int = 0
    fp: int = 0
    tn: int = 0
    fn: int = 0

    def __post_init__(self):
        if min(self.tp, self.fp, self.tn, self.fn) < 0:
            raise ValueError(f"confusion counts must be non-negative, got {self}")

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn

    def __add__(self, other: "ConfusionCounts") -> "ConfusionCounts":
        return ConfusionCounts(self.tp + other.tp, self.fp + other.fp, self.tn + other.tn, self.fn + other.fn)

    @classmethod
    def from_predictions(cls, labels, predicted) -> "ConfusionCounts":
        labels = as_binary(labels)
        predicted = as_binary(predicted)
        return cls(
            tp=int(np.sum(labels & predicted)),
            fp=int(np.sum(~labels & predicted)),
            tn=int(np.sum(~labels & ~predicted)),
            fn=int(np.sum(labels & ~predicted)),
        )


@dataclass
class EvalReport:
    counts: ConfusionCounts
    tpr: float
    fpr: float
    fnr: float
    precision: float
    f1: float
    accuracy: float
    auc: Optional[float] = None
    # names of the ratios whose denominator was zero (reported as 0)
    degenerate: Tuple[str, ...] = ()
    tpr_at_max_fpr: Optional[float] = None
    fit_seconds: Optional[float] = None
    per_repeat: List["EvalReport"] = field(default_factory=list)
    # scores and labels of the evaluated rows, kept in memory only
    test_scores: Optional[np.ndarray] = field(default=None, repr=False)
    test_labels: Optional[np.ndarray] = field(default=None, repr=False)

    def to_dict(self) -> dict:
        result = {f.name: getattr(self, f.name) for f in fields(self) if not f.name.startswith("test_")}
        result["counts"] = asdict(self.counts)
        result["degenerate"] = list(self.degenerate)
        result["per_repeat"] = [report.to_dict() for report in self.per_repeat]
        return result

    def pooled_scores(self):
        """Test scores and labels of every repeat, concatenated."""
        reports = self.per_repeat or [self]
        return (
            np.concatenate([report.test_scores for report in reports]),
            np.concatenate([report.test_labels for report in reports]),
        )


def as_binary(labels) -> np.ndarray:
    """Labels as a bool array, True for malicious; accepts label strings, bools or 0/1."""
    labels = np.asarray(labels)
    if labels.dtype.kind in "US":
        return labels.astype(str) == MALICIOUS
    return labels.astype(bool)


def _ratio(numerator: int, denominator: int, name: str, degenerate: list) -> Fraction:
    if denominator == 0:
        degenerate.append(name)
        return Fraction(0)
    return Fraction(numerator, denominator)


def metrics(counts: ConfusionCounts) -> EvalReport:
    """TPR, FPR, FNR, precision, F1 and accuracy from exact rational arithmetic on the counts."""
    degenerate = []
    tpr = _ratio(counts.tp, counts.tp + counts.fn, "tpr", degenerate)
    fnr = _ratio(counts.fn, counts.tp + counts.fn, "fnr", degenerate)
    fpr = _ratio(counts.fp, counts.fp + counts.tn, "fpr", degenerate)
    precision = _ratio(counts.tp, counts.tp + counts.fp, "precision", degenerate)
    if precision + tpr == 0:
        degenerate.append("f1")
        f1 = Fraction(0)
    else:
        f1 = 2 * precision * tpr / (precision + tpr)
    accuracy = _ratio(counts.tp + counts.tn, counts.total, "accuracy", degenerate)
    return EvalReport(
        counts=counts,
        tpr=float(tpr),
        fpr=float(fpr),
        fnr=float(fnr),
        precision=float(precision),
        f1=float(f1),
        accuracy=float(accuracy),
        degenerate=tuple(degenerate),
    )


def _check_classes(scores, labels):
    scores = np.asarray(scores, dtype=np.float64).ravel()
    labels = as_binary(labels).ravel()
    if scores.shape != labels.shape:
        raise ValueError(f"{scores.shape[0]} scores for {labels.shape[0]} labels")
    n_pos = int(labels.sum())
    if n_pos == 0 or n_pos == labels.shape[0]:
        raise DegenerateLabels("ROC analysis needs both classes")
    return scores, labels


def roc_auc(scores, labels) -> float:
    """
    Mann-Whitney AUC: fraction of (malicious, benign) pairs ranked correctly, ties count half.

    Raises:
        DegenerateLabels: one class is absent.
    """
    scores, labels = _check_classes(scores, labels)
    _, inverse, tie_counts = np.unique(scores, return_inverse=True, return_counts=True)
    # average 1-based rank of every tie group
    upper = np.cumsum(tie_counts)
    average_rank = upper - (tie_counts - 1) / 2.0
    ranks = average_rank[inverse]
    n_pos = int(labels.sum())
    n_neg = labels.shape[0] - n_pos
    u_statistic = ranks[labels].sum() - n_pos * (n_pos + 1) / 2.0
    return float(u_statistic / (n_pos * n_neg))


def roc_curve(scores, labels):
    """
    Operating points for every distinct score used as a ``score >= threshold`` cut.

    Returns:
        (thresholds, fpr, tpr), thresholds descending and starting at +inf (the
        all-benign point).
    """
    scores, labels = _check_classes(scores, labels)
    order = np.argsort(-scores, kind="stable")
    scores, labels = scores[order], labels[order]
    distinct = np.flatnonzero(np.diff(scores)) if scores.shape[0] > 1 else np.zeros(0, dtype=np.int64)
    ends = np.concatenate([distinct, [scores.shape[0] - 1]])
    tps = np.cumsum(labels)[ends]
    fps = (ends + 1) - tps
    thresholds = np.concatenate([[np.inf], scores[ends]])
    tpr = np.concatenate([[0.0], tps / labels.sum()])
    fpr = np.concatenate([[0.0], fps / (~labels).sum()])
    return thresholds, fpr, tpr


def tpr_at_fpr(scores, labels, max_fpr: float = 0.05) -> Tuple[float, float]:
    """Best TPR over thresholds whose FPR stays within ``max_fpr``; returns (tpr, threshold)."""
    thresholds, fpr, tpr = roc_curve(scores, labels)
    allowed = np.flatnonzero(fpr <= max_fpr)
    best = allowed[np.argmax(tpr[allowed])]
    return float(tpr[best]), float(thresholds[best])


def score_report(scores, labels, threshold: float = 0.5, max_fpr: float = 0.05) -> EvalReport:
    """Metrics at ``threshold`` plus AUC and TPR at ``max_fpr`` for one evaluated split."""
    scores = np.asarray(scores, dtype=np.float64).ravel()
    labels = as_binary(labels)
    report = metrics(ConfusionCounts.from_predictions(labels, scores >= threshold))
    report.auc = roc_auc(scores, labels)
    report.tpr_at_max_fpr = tpr_at_fpr(scores, labels, max_fpr)[0]
    report.test_scores, report.test_labels = scores, labels
    return report


MEAN_FIELDS = ("tpr", "fpr", "fnr", "precision", "f1", "accuracy", "auc", "tpr_at_max_fpr", "fit_seconds")


def mean_report(reports: List[EvalReport]) -> EvalReport:
    """Arithmetic mean of every metric over repeats; counts are summed, repeats kept in per_repeat."""
    if not reports:
        raise ValueError("no reports to average")
    counts = reports[0].counts
    for report in reports[1:]:
        counts = counts + report.counts
    mean = {}
    for key in MEAN_FIELDS:
        values = [getattr(report, key) for report in reports]
        mean[key] = None if any(value is None for value in values) else float(np.mean(values))
    degenerate = tuple(sorted({name for report in reports for name in report.degenerate}))
    return EvalReport(counts=counts, degenerate=degenerate, per_repeat=list(reports), **mean)

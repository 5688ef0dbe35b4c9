"""Classification metrics, the majority-class baseline and report formatting."""

from __future__ import annotations

import enum
from collections import Counter
from dataclasses import dataclass, field
from typing import Hashable, Sequence

import numpy as np

from .errors import EmptyInput, LengthMismatch
from .taxonomy import ClassLabel


def _order_key(label):
    if isinstance(label, ClassLabel):
        return (0, label.index, "")
    if isinstance(label, enum.Enum):
        return (1, 0, str(label.value))
    return (1, 0, str(label))


def _name(label) -> str:
    return label.value if isinstance(label, enum.Enum) else str(label)


def default_label_order(*label_lists) -> list:
    seen = set()
    for labels in label_lists:
        seen.update(labels)
    return sorted(seen, key=_order_key)


@dataclass
class ConfusionMatrix:
    counts: np.ndarray  # rows gold, columns predicted
    class_order: list


def confusion_matrix(gold: Sequence, predicted: Sequence, labels: Sequence | None = None) -> ConfusionMatrix:
    if len(gold) != len(predicted):
        raise LengthMismatch(f"{len(gold)} gold labels vs {len(predicted)} predictions")
    labels = list(labels) if labels is not None else default_label_order(gold, predicted)
    index = {lab: i for i, lab in enumerate(labels)}
    counts = np.zeros((len(labels), len(labels)), dtype=np.int64)
    for g, p in zip(gold, predicted):
        counts[index[g], index[p]] += 1
    return ConfusionMatrix(counts, labels)


def _div(num, den):
    return num / den if den else 0.0


def f1_score(precision: float, recall: float) -> float:
    return _div(2 * precision * recall, precision + recall)


@dataclass
class ClassScores:
    precision: float
    recall: float
    f1: float
    support: float


@dataclass
class ClassificationReport:
    per_class: dict  # label -> ClassScores
    macro: dict
    weighted: dict
    accuracy: float
    support: float
    class_order: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "per_class": {_name(k): vars(v).copy() for k, v in self.per_class.items()},
            "macro": dict(self.macro),
            "weighted": dict(self.weighted),
            "accuracy": self.accuracy,
            "support": self.support,
        }

    def to_text(self, digits: int = 2) -> str:
        """Aligned table: per-class rows, macro / weighted averages, accuracy."""
        names = [_name(k) for k in self.per_class]
        width = max([len(n) for n in names] + [len("Avg (Weighted)")])
        fmt = f"{{:.{digits}f}}"
        head = f"{'Class':<{width}}  {'Precision':>9}  {'Recall':>9}  {'F1-Score':>9}  {'Support':>7}"
        lines = [head, "-" * len(head)]
        for name, s in zip(names, self.per_class.values()):
            lines.append(f"{name:<{width}}  {fmt.format(s.precision):>9}  {fmt.format(s.recall):>9}"
                         f"  {fmt.format(s.f1):>9}  {_fmt_support(s.support):>7}")
        lines.append("-" * len(head))
        for title, avg in (("Avg (Macro)", self.macro), ("Avg (Weighted)", self.weighted)):
            lines.append(f"{title:<{width}}  {fmt.format(avg['precision']):>9}"
                         f"  {fmt.format(avg['recall']):>9}  {fmt.format(avg['f1']):>9}")
        lines.append(f"{'Accuracy':<{width}}  {fmt.format(self.accuracy):>31}  {_fmt_support(self.support):>7}")
        return "\n".join(lines) + "\n"


def _fmt_support(x) -> str:
    return str(int(x)) if float(x).is_integer() else f"{x:.1f}"


def classification_report(gold: Sequence, predicted: Sequence,
                          labels: Sequence | None = None) -> ClassificationReport:
    """Per-class precision/recall/F1; undefined ratios are reported as 0."""
    if len(gold) != len(predicted):
        raise LengthMismatch(f"{len(gold)} gold labels vs {len(predicted)} predictions")
    if not gold:
        raise EmptyInput("cannot score an empty prediction set")
    cm = confusion_matrix(gold, predicted, labels)
    counts = cm.counts
    tp = np.diag(counts).astype(float)
    pred_tot = counts.sum(axis=0)
    gold_tot = counts.sum(axis=1)
    per_class = {}
    for i, lab in enumerate(cm.class_order):
        p = _div(tp[i], pred_tot[i])
        r = _div(tp[i], gold_tot[i])
        per_class[lab] = ClassScores(float(p), float(r), float(f1_score(p, r)), int(gold_tot[i]))
    total = int(counts.sum())
    stats = np.array([[s.precision, s.recall, s.f1] for s in per_class.values()])
    support = gold_tot.astype(float)
    macro = dict(zip(("precision", "recall", "f1"), map(float, stats.mean(axis=0))))
    weighted = dict(zip(("precision", "recall", "f1"), map(float, support @ stats / total)))
    return ClassificationReport(per_class, macro, weighted, float(tp.sum() / total), total,
                                list(cm.class_order))


def average_reports(reports: Sequence[ClassificationReport],
                    labels: Sequence | None = None) -> ClassificationReport:
    """Unweighted mean of every metric across reports (e.g. CV folds).

    A class missing from a report contributes zeros to its mean.
    """
    if not reports:
        raise EmptyInput("no reports to average")
    if labels is None:
        labels = default_label_order(*[r.per_class.keys() for r in reports])
    zero = ClassScores(0.0, 0.0, 0.0, 0)
    per_class = {}
    for lab in labels:
        rows = [r.per_class.get(lab, zero) for r in reports]
        per_class[lab] = ClassScores(*(float(np.mean([getattr(s, f) for s in rows]))
                                       for f in ("precision", "recall", "f1", "support")))
    mean = lambda key: {m: float(np.mean([getattr(r, key)[m] for r in reports]))
                        for m in ("precision", "recall", "f1")}
    return ClassificationReport(per_class, mean("macro"), mean("weighted"),
                                float(np.mean([r.accuracy for r in reports])),
                                float(np.mean([r.support for r in reports])), labels)


class MajorityBaseline:
    """Constant predictor returning the modal training label."""

    def __init__(self, label: Hashable):
        self.label = label

    def predict(self, items) -> list:
        return [self.label for _ in items]

    def __call__(self, item=None):
        return self.label


def majority_baseline(train_labels: Sequence) -> MajorityBaseline:
    if not train_labels:
        raise EmptyInput("majority baseline needs at least one label")
    counts = Counter(train_labels)
    best = max(counts.values())
    modal = min((lab for lab, n in counts.items() if n == best), key=_order_key)
    return MajorityBaseline(modal)


def baseline_expected_scores(majority_proportion: float, num_classes: int) -> dict:
    """Closed-form scores of the constant majority predictor.

    For the modal class P = p, R = 1, so F1 = 2p / (1 + p); every other class
    scores 0. Weighting by support gives p * 2p / (1 + p).
    """
    p = float(majority_proportion)
    if not 0 < p <= 1 or num_classes < 1:
        raise ValueError("need 0 < p <= 1 and num_classes >= 1")
    f1 = 2 * p / (1 + p)
    return {"accuracy": p, "weighted_f1": p * f1, "macro_f1": f1 / num_classes}

"""Evaluation: balanced accuracy, accuracy-rejection curves, cross-validation
and weight attribution for the merged binary importance task."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .features import SchemaMismatch
from .learn import smote as smote_oversample

__all__ = [
    "EmptyClass",
    "InsufficientPoints",
    "EvalReport",
    "AttributionReport",
    "balanced_accuracy",
    "arc_points",
    "arc",
    "au_arc",
    "stratified_kfold",
    "cross_validate",
    "attribute_weights",
    "arc_csv",
]

ELEMENT_GROUPS = ("five_tuple", "metadata", "classtype", "msg", "reference")


class EmptyClass(ValueError):
    """balanced_accuracy was given an empty label vector."""


class InsufficientPoints(ValueError):
    """Too few ARC points to integrate."""


def balanced_accuracy(y_true, y_pred) -> float:
    """Unweighted mean of per-class recall."""
    y_true = np.asarray(y_true)
    y_pred = np.asarray(y_pred)
    if y_true.shape != y_pred.shape:
        raise ValueError("y_true and y_pred must have equal length")
    classes = np.unique(y_true)
    if classes.size == 0:
        raise EmptyClass("no true labels given")
    recalls = [
        np.mean(y_pred[y_true == c] == c) for c in classes
    ]
    return float(np.mean(recalls))


def arc_points(top_scores, correct) -> list[tuple[float, float]]:
    """Accuracy-rejection curve from top scores and per-sample correctness.

    Rejected samples count as correct.  The threshold sweeps -inf and
    every distinct top score; duplicate rejection rates keep the
    highest-threshold point; a final (1.0, 1.0) point is appended.
    """
    top_scores = np.asarray(top_scores, dtype=float)
    correct = np.asarray(correct, dtype=bool)
    n = len(top_scores)
    if n == 0:
        raise InsufficientPoints("need at least one sample")
    by_rate: dict[float, float] = {}
    for tau in [-math.inf] + sorted(set(top_scores.tolist())):
        rejected = top_scores < tau
        accuracy = ((correct & ~rejected).sum() + rejected.sum()) / n
        rate = rejected.sum() / n
        by_rate[float(rate)] = float(accuracy)  # ascending tau: last wins
    by_rate[1.0] = 1.0
    return sorted(by_rate.items())


def arc(model, X, y) -> list[tuple[float, float]]:
    scores = model.score_matrix(np.asarray(X, dtype=float))
    predicted = model.classes_[np.argmax(scores, axis=1)]
    return arc_points(scores.max(axis=1), predicted == np.asarray(y))


def au_arc(points) -> float:
    """Trapezoidal area under the ARC over rejection rate in [0, 1]."""
    points = sorted(points)
    if len(points) < 2:
        raise InsufficientPoints("need at least two ARC points")
    rates = np.array([p[0] for p in points], dtype=float)
    accs = np.array([p[1] for p in points], dtype=float)
    if rates[0] != 0.0 or rates[-1] != 1.0:
        raise InsufficientPoints("ARC points must span rejection rate 0 to 1")
    return float(np.trapezoid(accs, rates))


def stratified_kfold(y, k: int = 10, seed: int = 0) -> list[tuple[np.ndarray, np.ndarray]]:
    """Disjoint folds with per-class counts within one sample of balance.

    Classes smaller than k simply appear in fewer test folds.
    """
    y = np.asarray(y)
    rng = np.random.default_rng(seed)
    fold_of = np.empty(len(y), dtype=int)
    for c in np.unique(y):
        idx = np.flatnonzero(y == c)
        rng.shuffle(idx)
        fold_of[idx] = np.arange(len(idx)) % k
    folds = []
    all_ids = np.arange(len(y))
    for f in range(k):
        test = all_ids[fold_of == f]
        train = all_ids[fold_of != f]
        folds.append((train, test))
    return folds


@dataclass
class EvalReport:
    balanced_accuracy: float
    balanced_accuracy_std: float
    au_arc: float
    au_arc_std: float
    arc: list[tuple[float, float]]
    per_fold: list[dict] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "balanced_accuracy": self.balanced_accuracy,
            "balanced_accuracy_std": self.balanced_accuracy_std,
            "au_arc": self.au_arc,
            "au_arc_std": self.au_arc_std,
            "arc": [list(p) for p in self.arc],
            "per_fold": self.per_fold,
        }

    def to_text(self) -> str:
        lines = [
            f"balanced_accuracy {self.balanced_accuracy:.6f}",
            f"balanced_accuracy_std {self.balanced_accuracy_std:.6f}",
            f"au_arc {self.au_arc:.6f}",
            f"au_arc_std {self.au_arc_std:.6f}",
            f"folds {len(self.per_fold)}",
        ]
        for i, fold in enumerate(self.per_fold):
            lines.append(
                f"fold{i}.balanced_accuracy {fold['balanced_accuracy']:.6f}"
            )
            lines.append(f"fold{i}.au_arc {fold['au_arc']:.6f}")
        return "\n".join(lines) + "\n"


def arc_csv(points) -> str:
    lines = ["rejection_rate,accuracy"]
    lines.extend(f"{r:.10g},{a:.10g}" for r, a in points)
    return "\n".join(lines) + "\n"


def cross_validate(
    model_factory,
    X,
    y,
    k: int = 10,
    seed: int = 0,
    oversample: bool = True,
    smote_k: int = 5,
) -> EvalReport:
    """Stratified k-fold evaluation; SMOTE is applied to training folds only."""
    X = np.asarray(X, dtype=float)
    y = np.asarray(y)
    per_fold = []
    pooled_scores = []
    pooled_correct = []
    for fold_no, (train, test) in enumerate(stratified_kfold(y, k=k, seed=seed)):
        X_train, y_train = X[train], y[train]
        if oversample:
            X_train, y_train = smote_oversample(
                X_train, y_train, k=smote_k, seed=seed + fold_no
            )
        model = model_factory()
        model.fit(X_train, y_train)
        scores = model.score_matrix(X[test])
        predicted = model.classes_[np.argmax(scores, axis=1)]
        correct = predicted == y[test]
        tops = scores.max(axis=1)
        points = arc_points(tops, correct)
        per_fold.append(
            {
                "balanced_accuracy": balanced_accuracy(y[test], predicted),
                "au_arc": au_arc(points),
                "arc": points,
            }
        )
        pooled_scores.append(tops)
        pooled_correct.append(correct)
    bas = np.array([f["balanced_accuracy"] for f in per_fold])
    aucs = np.array([f["au_arc"] for f in per_fold])
    pooled = arc_points(np.concatenate(pooled_scores), np.concatenate(pooled_correct))
    return EvalReport(
        balanced_accuracy=float(bas.mean()),
        balanced_accuracy_std=float(bas.std(ddof=1)) if len(bas) > 1 else 0.0,
        au_arc=float(aucs.mean()),
        au_arc_std=float(aucs.std(ddof=1)) if len(aucs) > 1 else 0.0,
        arc=pooled,
        per_fold=per_fold,
    )


@dataclass
class AttributionReport:
    """Dimensions ranked by |weight| with cumulative per-group counts."""

    rows: list[dict]  # {"rank", "name", "group", "abs_weight"}
    cumulative: list[dict]  # per rank: {group: count seen so far}

    def top_groups(self, n: int) -> list[str]:
        return [row["group"] for row in self.rows[:n]]


def attribute_weights(weights, dimensions) -> AttributionReport:
    """Rank dimensions of a binary linear model by absolute weight.

    ``dimensions`` is the schema's (name, group) list for the layout the
    model was trained on.  Ties keep dimension order (deterministic).
    """
    weights = np.asarray(weights, dtype=float)
    if len(weights) != len(dimensions):
        raise SchemaMismatch(
            f"weight vector has {len(weights)} entries, layout has {len(dimensions)}"
        )
    order = np.argsort(-np.abs(weights), kind="stable")
    rows = []
    counts = {g: 0 for g in ELEMENT_GROUPS}
    cumulative = []
    for rank, idx in enumerate(order, start=1):
        name, group = dimensions[idx]
        counts[group] += 1
        rows.append(
            {
                "rank": rank,
                "name": name,
                "group": group,
                "abs_weight": float(abs(weights[idx])),
            }
        )
        cumulative.append(dict(counts))
    return AttributionReport(rows=rows, cumulative=cumulative)

"""Threshold-based reject option wrapped around any scoring classifier."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .features import SchemaMismatch

__all__ = ["REJECTED", "Decision", "RejectingClassifier"]

REJECTED = "rejected"


@dataclass(frozen=True)
class Decision:
    label: object | None
    rejected: bool
    top_score: float
    scores: dict

    @property
    def outcome(self):
        return REJECTED if self.rejected else self.label


class RejectingClassifier:
    """Accept the argmax label when the top score reaches tau, else reject.

    An exact tie (top score == tau) is accepted.
    """

    def __init__(self, model, tau: float):
        if not math.isfinite(tau) and not tau == -math.inf:
            raise ValueError("tau must be finite or -inf")
        self.model = model
        self.tau = tau

    def decide(self, X) -> list[Decision]:
        X = np.asarray(X, dtype=float)
        expected = getattr(self.model, "n_features_in_", None)
        if expected is not None and X.shape[1] != expected:
            raise SchemaMismatch(
                f"expected {expected} features, got {X.shape[1]}"
            )
        scores = self.model.score_matrix(X)
        tops = scores.max(axis=1)
        labels = self.model.classes_[np.argmax(scores, axis=1)]
        decisions = []
        for row, top, label in zip(scores, tops, labels):
            rejected = bool(top < self.tau)
            decisions.append(
                Decision(
                    label=None if rejected else label,
                    rejected=rejected,
                    top_score=float(top),
                    scores={str(c): float(s) for c, s in zip(self.model.classes_, row)},
                )
            )
        return decisions

    def classify(self, x):
        """Single-vector convenience; returns a label or REJECTED."""
        return self.decide(np.atleast_2d(np.asarray(x, dtype=float)))[0].outcome

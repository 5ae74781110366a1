"""Classifiers trained from scratch, SMOTE oversampling and persistence.

All estimators follow the sklearn fit/predict convention and expose a
``score_matrix(X)`` returning one prediction score per class per sample.
``predict`` is always the argmax of ``score_matrix``.  Scores are
probability vectors for every model except the one-vs-rest linear SVM,
whose scores are signed distances to the per-class decision boundaries.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin

__all__ = [
    "DegenerateLabels",
    "TooFewSamples",
    "TrainConfig",
    "smote",
    "LinearSvmOvr",
    "MlpClassifier",
    "CartClassifier",
    "RandomForest",
    "KnnClassifier",
    "DeepEnsemble",
    "make_classifier",
    "save_model",
    "load_model",
    "MODEL_KINDS",
]

MODEL_FILE_VERSION = "sigtriage-model v1"

MODEL_KINDS = ("linear_svm_ovr", "mlp", "cart", "random_forest", "knn", "deep_ensemble")


class DegenerateLabels(ValueError):
    """Training data contains fewer than two classes."""


class TooFewSamples(ValueError):
    """Not enough samples for the requested operation."""


# ---------------------------------------------------------------------------
# SMOTE


def smote(X, y, k: int = 5, seed: int = 0):
    """Oversample every minority class up to the majority count.

    Synthetic samples are convex combinations x_i + lam * (x_nn - x_i)
    with x_nn among the k nearest same-class neighbors (Euclidean) and
    lam uniform in [0, 1).  The original rows are returned unchanged as a
    prefix of the output.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y)
    classes, counts = np.unique(y, return_counts=True)
    majority = counts.max()
    rng = np.random.default_rng(seed)
    new_rows = [X]
    new_labels = [y]
    for cls, count in zip(classes, counts):
        need = int(majority - count)
        if need == 0:
            continue
        if count < 2:
            raise TooFewSamples(
                f"class {cls!r} has {count} sample(s); SMOTE needs at least 2"
            )
        Xc = X[y == cls]
        kk = min(k, count - 1)
        d2 = ((Xc[:, None, :] - Xc[None, :, :]) ** 2).sum(axis=2)
        np.fill_diagonal(d2, np.inf)
        neighbors = np.argsort(d2, axis=1, kind="stable")[:, :kk]
        base = rng.integers(count, size=need)
        pick = rng.integers(kk, size=need)
        lam = rng.random(need)
        anchors = Xc[base]
        targets = Xc[neighbors[base, pick]]
        new_rows.append(anchors + lam[:, None] * (targets - anchors))
        new_labels.append(np.full(need, cls, dtype=y.dtype))
    return np.vstack(new_rows), np.concatenate(new_labels)


# ---------------------------------------------------------------------------
# Shared estimator plumbing


class _ScoringClassifier(BaseEstimator, ClassifierMixin):
    """Base: predict is the argmax of the per-class score matrix."""

    def score_matrix(self, X) -> np.ndarray:
        raise NotImplementedError

    def predict(self, X):
        scores = self.score_matrix(X)
        return self.classes_[np.argmax(scores, axis=1)]

    def top_scores(self, X) -> np.ndarray:
        return self.score_matrix(X).max(axis=1)

    def _setup_classes(self, y):
        self.classes_ = np.unique(y)
        if len(self.classes_) < 2:
            raise DegenerateLabels("training labels contain fewer than two classes")
        index = {c: i for i, c in enumerate(self.classes_)}
        return np.array([index[v] for v in y], dtype=int)


# ---------------------------------------------------------------------------
# One-vs-rest linear SVM (hinge loss + L2, subgradient descent)


class LinearSvmOvr(_ScoringClassifier):
    """One binary hinge-loss classifier per class, C-regularized.

    Trained by deterministic full-batch subgradient descent on
    0.5*||w||^2 + C * sum_i hinge(y_i * (w.x_i + b)); the iterate with
    the best objective is kept.  The per-class score is the signed
    distance (w.x + b) / ||w|| to that class's boundary.
    """

    kind = "linear_svm_ovr"

    def __init__(self, c: float = 1.0, epochs: int = 500, seed: int = 0):
        self.c = c
        self.epochs = epochs
        self.seed = seed

    def _fit_binary(self, X, target):
        n, d = X.shape
        lam = 1.0 / (self.c * n)
        radius = 1.0 / np.sqrt(lam)  # the optimum lies inside this ball
        w = np.zeros(d)
        b = 0.0
        best = (np.inf, w, b)
        for t in range(1, self.epochs + 1):
            margins = target * (X @ w + b)
            viol = margins < 1.0
            obj = 0.5 * lam * (w @ w) + np.maximum(0.0, 1.0 - margins).mean()
            if obj < best[0]:
                best = (obj, w.copy(), b)
            eta = 1.0 / (lam * t)
            grad_w = lam * w - (target[viol] @ X[viol]) / n
            grad_b = -target[viol].sum() / n
            w = w - eta * grad_w
            b = b - eta * grad_b
            norm = np.linalg.norm(w)
            if norm > radius:
                w *= radius / norm
            b = float(np.clip(b, -radius, radius))
        margins = target * (X @ w + b)
        obj = 0.5 * lam * (w @ w) + np.maximum(0.0, 1.0 - margins).mean()
        if obj < best[0]:
            best = (obj, w, b)
        return best[1], best[2]

    def fit(self, X, y):
        X = np.asarray(X, dtype=float)
        self.n_features_in_ = X.shape[1]
        yi = self._setup_classes(y)
        weights = []
        biases = []
        for k in range(len(self.classes_)):
            target = np.where(yi == k, 1.0, -1.0)
            w, b = self._fit_binary(X, target)
            weights.append(w)
            biases.append(b)
        self.coef_ = np.vstack(weights)
        self.intercept_ = np.asarray(biases, dtype=float)
        return self

    def score_matrix(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        raw = X @ self.coef_.T + self.intercept_
        norms = np.linalg.norm(self.coef_, axis=1)
        norms = np.where(norms > 0, norms, 1.0)
        return raw / norms

    def to_state(self) -> dict:
        return {
            "c": self.c,
            "epochs": self.epochs,
            "seed": self.seed,
            "classes": self.classes_.tolist(),
            "coef": self.coef_.tolist(),
            "intercept": self.intercept_.tolist(),
        }

    @classmethod
    def from_state(cls, state: dict) -> "LinearSvmOvr":
        model = cls(c=state["c"], epochs=state["epochs"], seed=state["seed"])
        model.classes_ = np.asarray(state["classes"])
        model.coef_ = np.asarray(state["coef"], dtype=float)
        model.intercept_ = np.asarray(state["intercept"], dtype=float)
        return model


# ---------------------------------------------------------------------------
# Multilayer perceptron (one ReLU hidden layer, softmax output, Adam)


def _softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=1, keepdims=True)
    exp = np.exp(shifted)
    return exp / exp.sum(axis=1, keepdims=True)


def mlp_loss_and_grads(params, X, Y, l2: float):
    """Cross-entropy + L2 penalty loss and its analytic gradients.

    params is (W1, b1, W2, b2); Y is one-hot.  Biases are unregularized.
    """
    W1, b1, W2, b2 = params
    n = X.shape[0]
    z1 = X @ W1 + b1
    a1 = np.maximum(z1, 0.0)
    logits = a1 @ W2 + b2
    # Stable softmax cross-entropy via log-sum-exp; keeps the analytic
    # gradients exactly consistent with the loss.
    shifted = logits - logits.max(axis=1, keepdims=True)
    log_proba = shifted - np.log(np.exp(shifted).sum(axis=1, keepdims=True))
    proba = np.exp(log_proba)
    ce = -np.sum(Y * log_proba) / n
    loss = ce + 0.5 * l2 * ((W1**2).sum() + (W2**2).sum())
    delta2 = (proba - Y) / n
    gW2 = a1.T @ delta2 + l2 * W2
    gb2 = delta2.sum(axis=0)
    delta1 = (delta2 @ W2.T) * (z1 > 0)
    gW1 = X.T @ delta1 + l2 * W1
    gb1 = delta1.sum(axis=0)
    return loss, (gW1, gb1, gW2, gb2)


class MlpClassifier(_ScoringClassifier):
    """Three-layer network: input -> ReLU hidden layer -> softmax output.

    Minibatch Adam on cross-entropy with L2 weight penalty.  Training
    stops when the full-set loss fails to improve by more than ``tol``
    for ``patience`` consecutive epochs, or at ``max_epochs``.
    """

    kind = "mlp"

    def __init__(
        self,
        hidden: int = 100,
        l2: float = 1e-4,
        lr: float = 1e-4,
        beta1: float = 0.9,
        beta2: float = 0.99,
        eps: float = 1e-8,
        max_epochs: int = 200,
        tol: float = 1e-4,
        patience: int = 10,
        batch_size: int = 200,
        seed: int = 0,
    ):
        self.hidden = hidden
        self.l2 = l2
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.max_epochs = max_epochs
        self.tol = tol
        self.patience = patience
        self.batch_size = batch_size
        self.seed = seed

    def fit(self, X, y):
        X = np.asarray(X, dtype=float)
        self.n_features_in_ = X.shape[1]
        yi = self._setup_classes(y)
        n, d = X.shape
        k = len(self.classes_)
        Y = np.zeros((n, k))
        Y[np.arange(n), yi] = 1.0
        rng = np.random.default_rng(self.seed)
        params = [
            rng.normal(0.0, np.sqrt(2.0 / max(d, 1)), size=(d, self.hidden)),
            np.zeros(self.hidden),
            rng.normal(0.0, np.sqrt(2.0 / self.hidden), size=(self.hidden, k)),
            np.zeros(k),
        ]
        m = [np.zeros_like(p) for p in params]
        v = [np.zeros_like(p) for p in params]
        step = 0
        best_loss = np.inf
        stall = 0
        self.loss_curve_ = []
        for _ in range(self.max_epochs):
            order = rng.permutation(n)
            for start in range(0, n, self.batch_size):
                idx = order[start : start + self.batch_size]
                _, grads = mlp_loss_and_grads(params, X[idx], Y[idx], self.l2)
                step += 1
                for i, g in enumerate(grads):
                    m[i] = self.beta1 * m[i] + (1 - self.beta1) * g
                    v[i] = self.beta2 * v[i] + (1 - self.beta2) * g**2
                    mhat = m[i] / (1 - self.beta1**step)
                    vhat = v[i] / (1 - self.beta2**step)
                    params[i] = params[i] - self.lr * mhat / (np.sqrt(vhat) + self.eps)
            loss, _ = mlp_loss_and_grads(params, X, Y, self.l2)
            self.loss_curve_.append(loss)
            if best_loss - loss > self.tol:
                stall = 0
            else:
                stall += 1
            best_loss = min(best_loss, loss)
            if stall >= self.patience:
                break
        self.params_ = tuple(params)
        return self

    def predict_proba(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        W1, b1, W2, b2 = self.params_
        a1 = np.maximum(X @ W1 + b1, 0.0)
        return _softmax(a1 @ W2 + b2)

    def score_matrix(self, X) -> np.ndarray:
        return self.predict_proba(X)

    def to_state(self) -> dict:
        state = {k: getattr(self, k) for k in (
            "hidden", "l2", "lr", "beta1", "beta2", "eps", "max_epochs",
            "tol", "patience", "batch_size", "seed")}
        state["classes"] = self.classes_.tolist()
        state["params"] = [p.tolist() for p in self.params_]
        return state

    @classmethod
    def from_state(cls, state: dict) -> "MlpClassifier":
        kwargs = {k: state[k] for k in (
            "hidden", "l2", "lr", "beta1", "beta2", "eps", "max_epochs",
            "tol", "patience", "batch_size", "seed")}
        model = cls(**kwargs)
        model.classes_ = np.asarray(state["classes"])
        model.params_ = tuple(np.asarray(p, dtype=float) for p in state["params"])
        return model


# ---------------------------------------------------------------------------
# CART and random forest


def _gini_from_counts(counts: np.ndarray, totals: np.ndarray) -> np.ndarray:
    frac = counts / totals[:, None]
    return 1.0 - (frac**2).sum(axis=1)


def _best_split(X, Y, feat_indices):
    """Best (feature, threshold) by weighted Gini over midpoint candidates.

    Ties break toward the lower feature index, then the lower threshold.
    Returns None when no feature admits a split.
    """
    n = X.shape[0]
    total = Y.sum(axis=0)
    best = None  # (gini, feature, threshold)
    for j in feat_indices:
        values = X[:, j]
        order = np.argsort(values, kind="stable")
        sv = values[order]
        change = np.nonzero(sv[1:] != sv[:-1])[0]
        if change.size == 0:
            continue
        cum = np.cumsum(Y[order], axis=0)
        left_n = change + 1.0
        right_n = n - left_n
        left_counts = cum[change]
        right_counts = total - left_counts
        weighted = (
            left_n * _gini_from_counts(left_counts, left_n)
            + right_n * _gini_from_counts(right_counts, right_n)
        ) / n
        pos = int(np.argmin(weighted))
        if best is None or weighted[pos] < best[0] - 1e-15:
            threshold = (sv[change[pos]] + sv[change[pos] + 1]) / 2.0
            best = (float(weighted[pos]), int(j), float(threshold))
    return best


def _grow_tree(X, Y, depth, max_depth, max_features, rng):
    counts = Y.sum(axis=0)
    n = X.shape[0]
    if n <= 1 or depth >= max_depth or np.count_nonzero(counts) <= 1:
        return {"leaf": (counts / n).tolist()}
    d = X.shape[1]
    if max_features is None or max_features >= d:
        feat_indices = np.arange(d)
    else:
        feat_indices = np.sort(rng.choice(d, size=max_features, replace=False))
    split = _best_split(X, Y, feat_indices)
    if split is None and max_features is not None and max_features < d:
        # Fall back to all features before giving up on the node.
        split = _best_split(X, Y, np.arange(d))
    if split is None:
        return {"leaf": (counts / n).tolist()}
    _, feature, threshold = split
    mask = X[:, feature] <= threshold
    return {
        "feature": feature,
        "threshold": threshold,
        "left": _grow_tree(X[mask], Y[mask], depth + 1, max_depth, max_features, rng),
        "right": _grow_tree(X[~mask], Y[~mask], depth + 1, max_depth, max_features, rng),
    }


def _tree_scores(node, X, out, rows):
    if "leaf" in node:
        out[rows] = node["leaf"]
        return
    mask = X[rows, node["feature"]] <= node["threshold"]
    _tree_scores(node["left"], X, out, rows[mask])
    _tree_scores(node["right"], X, out, rows[~mask])


class CartClassifier(_ScoringClassifier):
    """CART with the Gini index; growth stops at purity, one sample or
    the depth cap.  Leaf scores are class proportions in the leaf."""

    kind = "cart"

    def __init__(self, max_depth: int = 12, max_features: int | None = None, seed: int = 0):
        self.max_depth = max_depth
        self.max_features = max_features
        self.seed = seed

    def fit(self, X, y):
        X = np.asarray(X, dtype=float)
        y = np.asarray(y)
        self.classes_ = np.unique(y)
        index = {c: i for i, c in enumerate(self.classes_)}
        yi = np.array([index[v] for v in y], dtype=int)
        Y = np.zeros((len(yi), len(self.classes_)))
        Y[np.arange(len(yi)), yi] = 1.0
        self.n_features_in_ = X.shape[1]
        rng = np.random.default_rng(self.seed)
        self.tree_ = _grow_tree(X, Y, 0, self.max_depth, self.max_features, rng)
        return self

    def score_matrix(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        out = np.zeros((X.shape[0], len(self.classes_)))
        _tree_scores(self.tree_, X, out, np.arange(X.shape[0]))
        return out

    def to_state(self) -> dict:
        return {
            "max_depth": self.max_depth,
            "max_features": self.max_features,
            "seed": self.seed,
            "classes": self.classes_.tolist(),
            "tree": self.tree_,
        }

    @classmethod
    def from_state(cls, state: dict) -> "CartClassifier":
        model = cls(
            max_depth=state["max_depth"],
            max_features=state["max_features"],
            seed=state["seed"],
        )
        model.classes_ = np.asarray(state["classes"])
        model.tree_ = state["tree"]
        return model


class RandomForest(_ScoringClassifier):
    """Bagged CART trees with sqrt(d) feature subsampling per split.

    Per-class scores are the mean of the member leaf proportions.
    """

    kind = "random_forest"

    def __init__(
        self,
        n_trees: int = 100,
        max_depth: int = 12,
        max_features: str | int | None = "sqrt",
        bootstrap: bool = True,
        seed: int = 0,
    ):
        self.n_trees = n_trees
        self.max_depth = max_depth
        self.max_features = max_features
        self.bootstrap = bootstrap
        self.seed = seed

    def _resolve_max_features(self, d: int) -> int | None:
        if self.max_features == "sqrt":
            return max(1, int(np.sqrt(d)))
        return self.max_features

    def fit(self, X, y):
        X = np.asarray(X, dtype=float)
        y = np.asarray(y)
        self.classes_ = np.unique(y)
        index = {c: i for i, c in enumerate(self.classes_)}
        yi = np.array([index[v] for v in y], dtype=int)
        Y = np.zeros((len(yi), len(self.classes_)))
        Y[np.arange(len(yi)), yi] = 1.0
        n, d = X.shape
        self.n_features_in_ = X.shape[1]
        max_features = self._resolve_max_features(d)
        rng = np.random.default_rng(self.seed)
        self.trees_ = []
        for _ in range(self.n_trees):
            tree_rng = np.random.default_rng(rng.integers(2**63))
            if self.bootstrap:
                idx = tree_rng.integers(n, size=n)
            else:
                idx = np.arange(n)
            self.trees_.append(
                _grow_tree(X[idx], Y[idx], 0, self.max_depth, max_features, tree_rng)
            )
        return self

    def score_matrix(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        acc = np.zeros((X.shape[0], len(self.classes_)))
        buf = np.zeros_like(acc)
        rows = np.arange(X.shape[0])
        for tree in self.trees_:
            buf[:] = 0.0
            _tree_scores(tree, X, buf, rows)
            acc += buf
        return acc / len(self.trees_)

    def to_state(self) -> dict:
        return {
            "n_trees": self.n_trees,
            "max_depth": self.max_depth,
            "max_features": self.max_features,
            "bootstrap": self.bootstrap,
            "seed": self.seed,
            "classes": self.classes_.tolist(),
            "trees": self.trees_,
        }

    @classmethod
    def from_state(cls, state: dict) -> "RandomForest":
        model = cls(
            n_trees=state["n_trees"],
            max_depth=state["max_depth"],
            max_features=state["max_features"],
            bootstrap=state["bootstrap"],
            seed=state["seed"],
        )
        model.classes_ = np.asarray(state["classes"])
        model.trees_ = state["trees"]
        return model


# ---------------------------------------------------------------------------
# k-nearest neighbors


class KnnClassifier(_ScoringClassifier):
    """Majority vote of the k nearest Euclidean neighbors.

    The score is the neighborhood proportion of the winning class.
    Distance ties keep training-set order; label ties go to the lowest
    class index.
    """

    kind = "knn"

    def __init__(self, k: int = 5):
        self.k = k

    def fit(self, X, y):
        X = np.asarray(X, dtype=float)
        if X.shape[0] < self.k:
            raise TooFewSamples(f"kNN with k={self.k} needs at least {self.k} samples")
        yi = self._setup_classes(y)
        self.n_features_in_ = X.shape[1]
        self.X_ = X
        self.yi_ = yi
        return self

    def score_matrix(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        n_query = X.shape[0]
        k_classes = len(self.classes_)
        out = np.zeros((n_query, k_classes))
        chunk = max(1, int(2e7 / max(1, self.X_.size)))
        for start in range(0, n_query, chunk):
            q = X[start : start + chunk]
            d2 = ((q[:, None, :] - self.X_[None, :, :]) ** 2).sum(axis=2)
            nn = np.argsort(d2, axis=1, kind="stable")[:, : self.k]
            labels = self.yi_[nn]
            for c in range(k_classes):
                out[start : start + chunk, c] = (labels == c).sum(axis=1) / self.k
        return out

    def to_state(self) -> dict:
        return {
            "k": self.k,
            "classes": self.classes_.tolist(),
            "X": self.X_.tolist(),
            "yi": self.yi_.tolist(),
        }

    @classmethod
    def from_state(cls, state: dict) -> "KnnClassifier":
        model = cls(k=state["k"])
        model.classes_ = np.asarray(state["classes"])
        model.X_ = np.asarray(state["X"], dtype=float)
        model.yi_ = np.asarray(state["yi"], dtype=int)
        return model


# ---------------------------------------------------------------------------
# Deep ensemble of MLPs


class DeepEnsemble(_ScoringClassifier):
    """m MLPs trained on identical data with distinct seeds.

    Per-class scores are the mean of the member softmax vectors; the
    member spread is exposed via :meth:`score_std` for triage display.
    """

    kind = "deep_ensemble"

    def __init__(self, m: int = 100, seed: int = 0, **mlp_params):
        self.m = m
        self.seed = seed
        self.mlp_params = mlp_params

    def fit(self, X, y):
        X = np.asarray(X, dtype=float)
        self.n_features_in_ = X.shape[1]
        self.members_ = []
        for i in range(self.m):
            member = MlpClassifier(seed=self.seed + i, **self.mlp_params)
            member.fit(X, y)
            self.members_.append(member)
        self.classes_ = self.members_[0].classes_
        return self

    def member_scores(self, X) -> np.ndarray:
        return np.stack([m.predict_proba(X) for m in self.members_])

    def score_matrix(self, X) -> np.ndarray:
        return self.member_scores(X).mean(axis=0)

    def score_std(self, X) -> np.ndarray:
        """Member std of the probability of the ensemble's top class."""
        member = self.member_scores(X)
        mean = member.mean(axis=0)
        top = np.argmax(mean, axis=1)
        cols = member[:, np.arange(X.shape[0]), top]
        return cols.std(axis=0)

    def to_state(self) -> dict:
        return {
            "m": self.m,
            "seed": self.seed,
            "mlp_params": self.mlp_params,
            "members": [m.to_state() for m in self.members_],
        }

    @classmethod
    def from_state(cls, state: dict) -> "DeepEnsemble":
        model = cls(m=state["m"], seed=state["seed"], **state["mlp_params"])
        model.members_ = [MlpClassifier.from_state(s) for s in state["members"]]
        model.classes_ = model.members_[0].classes_
        return model


# ---------------------------------------------------------------------------
# Config, factory, persistence


@dataclass
class TrainConfig:
    """Hyperparameters with defaults matching the reference setup."""

    svm_c: float = 1.0
    svm_epochs: int = 500
    mlp_hidden: int = 100
    mlp_l2: float = 1e-4
    mlp_lr: float = 1e-4
    mlp_beta1: float = 0.9
    mlp_beta2: float = 0.99
    mlp_eps: float = 1e-8
    mlp_max_epochs: int = 200
    mlp_tol: float = 1e-4
    mlp_patience: int = 10
    mlp_batch_size: int = 200
    tree_max_depth: int = 12
    rf_trees: int = 100
    knn_k: int = 5
    smote_k: int = 5
    ensemble_size: int = 100
    rng_seed: int = 0

    def mlp_kwargs(self) -> dict:
        return {
            "hidden": self.mlp_hidden,
            "l2": self.mlp_l2,
            "lr": self.mlp_lr,
            "beta1": self.mlp_beta1,
            "beta2": self.mlp_beta2,
            "eps": self.mlp_eps,
            "max_epochs": self.mlp_max_epochs,
            "tol": self.mlp_tol,
            "patience": self.mlp_patience,
            "batch_size": self.mlp_batch_size,
        }


_CLASSES = {
    "linear_svm_ovr": LinearSvmOvr,
    "mlp": MlpClassifier,
    "cart": CartClassifier,
    "random_forest": RandomForest,
    "knn": KnnClassifier,
    "deep_ensemble": DeepEnsemble,
}


def make_classifier(kind: str, cfg: TrainConfig | None = None):
    cfg = cfg or TrainConfig()
    if kind == "linear_svm_ovr":
        return LinearSvmOvr(c=cfg.svm_c, epochs=cfg.svm_epochs, seed=cfg.rng_seed)
    if kind == "mlp":
        return MlpClassifier(seed=cfg.rng_seed, **cfg.mlp_kwargs())
    if kind == "cart":
        return CartClassifier(max_depth=cfg.tree_max_depth, seed=cfg.rng_seed)
    if kind == "random_forest":
        return RandomForest(
            n_trees=cfg.rf_trees, max_depth=cfg.tree_max_depth, seed=cfg.rng_seed
        )
    if kind == "knn":
        return KnnClassifier(k=cfg.knn_k)
    if kind == "deep_ensemble":
        return DeepEnsemble(m=cfg.ensemble_size, seed=cfg.rng_seed, **cfg.mlp_kwargs())
    raise ValueError(f"unknown model kind {kind!r}")


def save_model(model, path, schema_id: str = "") -> None:
    doc = {
        "version": MODEL_FILE_VERSION,
        "kind": model.kind,
        "schema_id": schema_id,
        "state": model.to_state(),
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh)


def load_model(path):
    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    if doc.get("version") != MODEL_FILE_VERSION:
        raise ValueError(f"unsupported model file version {doc.get('version')!r}")
    model = _CLASSES[doc["kind"]].from_state(doc["state"])
    model.schema_id = doc.get("schema_id", "")
    return model

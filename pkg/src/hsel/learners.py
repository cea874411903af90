"""Base learning algorithms over dense feature matrices.

All four are deterministic: none consumes randomness, softmax regression
starts from zero weights, and every tie is broken toward the smallest class
index.
"""

from __future__ import annotations

import numpy as np

ALGORITHM_TOKENS = ("NB", "LR", "KNN", "NC")


def _log_softmax(scores: np.ndarray) -> np.ndarray:
    shifted = scores - scores.max(axis=1, keepdims=True)
    return shifted - np.log(np.exp(shifted).sum(axis=1, keepdims=True))


class MultinomialNB:
    """Multinomial naive Bayes with Laplace smoothing.

    Negative feature values (possible under the signed dense projection) are
    clamped to zero, since multinomial likelihoods are defined over
    non-negative counts.
    """

    def __init__(self, alpha: float = 1.0):
        self.alpha = alpha
        self.class_log_prior_: np.ndarray | None = None
        self.feature_log_prob_: np.ndarray | None = None

    def fit(self, X: np.ndarray, y: np.ndarray, num_classes: int) -> "MultinomialNB":
        X = np.clip(np.asarray(X, dtype=np.float64), 0.0, None)
        y = np.asarray(y, dtype=np.int64)
        counts = np.zeros(num_classes, dtype=np.float64)
        totals = np.zeros((num_classes, X.shape[1]), dtype=np.float64)
        for c in range(num_classes):
            mask = y == c
            counts[c] = mask.sum()
            if counts[c]:
                totals[c] = X[mask].sum(axis=0)
        # Unseen classes keep a tiny prior so log() stays finite.
        priors = np.where(counts > 0, counts, 1e-12) / max(len(y), 1)
        self.class_log_prior_ = np.log(priors)
        smoothed = totals + self.alpha
        self.feature_log_prob_ = np.log(smoothed / smoothed.sum(axis=1, keepdims=True))
        return self

    def _joint(self, X: np.ndarray) -> np.ndarray:
        X = np.clip(np.asarray(X, dtype=np.float64), 0.0, None)
        return X @ self.feature_log_prob_.T + self.class_log_prior_

    def predict(self, X: np.ndarray) -> np.ndarray:
        return np.argmax(self._joint(X), axis=1)

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        return np.exp(_log_softmax(self._joint(X)))


class SoftmaxRegression:
    """Multiclass logistic regression trained by full-batch gradient descent.

    The regularized cross-entropy objective is tracked per epoch; if a step
    ever increases it, the step is reverted and training halts with the
    ``diverged`` flag set, so callers can diagnose a bad step size instead of
    silently training on garbage.
    """

    def __init__(self, step: float = 0.1, epochs: int = 300, l2: float = 1e-4):
        self.step = step
        self.epochs = epochs
        self.l2 = l2
        self.weights_: np.ndarray | None = None
        self.bias_: np.ndarray | None = None
        self.loss_history_: list[float] = []
        self.diverged = False
        self.diverged_epoch: int | None = None

    def _loss_and_grads(self, X, Y, y):
        scores = X @ self.weights_ + self.bias_
        log_probs = _log_softmax(scores)
        n = X.shape[0]
        loss = -log_probs[np.arange(n), y].mean() + 0.5 * self.l2 * float(
            (self.weights_ ** 2).sum()
        )
        delta = (np.exp(log_probs) - Y) / n
        grad_w = X.T @ delta + self.l2 * self.weights_
        grad_b = delta.sum(axis=0)
        return loss, grad_w, grad_b

    def fit(self, X: np.ndarray, y: np.ndarray, num_classes: int) -> "SoftmaxRegression":
        X = np.asarray(X, dtype=np.float64)
        y = np.asarray(y, dtype=np.int64)
        n, d = X.shape
        Y = np.zeros((n, num_classes), dtype=np.float64)
        Y[np.arange(n), y] = 1.0
        self.weights_ = np.zeros((d, num_classes), dtype=np.float64)
        self.bias_ = np.zeros(num_classes, dtype=np.float64)
        self.loss_history_ = []
        self.diverged = False
        self.diverged_epoch = None

        prev_w = prev_b = None
        for epoch in range(self.epochs):
            loss, grad_w, grad_b = self._loss_and_grads(X, Y, y)
            if self.loss_history_ and loss > self.loss_history_[-1] + 1e-12:
                self.weights_, self.bias_ = prev_w, prev_b
                self.diverged = True
                self.diverged_epoch = epoch
                break
            self.loss_history_.append(float(loss))
            prev_w, prev_b = self.weights_.copy(), self.bias_.copy()
            self.weights_ = self.weights_ - self.step * grad_w
            self.bias_ = self.bias_ - self.step * grad_b
        return self

    def decision_scores(self, X: np.ndarray) -> np.ndarray:
        return np.asarray(X, dtype=np.float64) @ self.weights_ + self.bias_

    def predict(self, X: np.ndarray) -> np.ndarray:
        return np.argmax(self.decision_scores(X), axis=1)

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        return np.exp(_log_softmax(self.decision_scores(X)))


class CosineKNN:
    """k-nearest-neighbors under cosine distance with plurality voting.

    Zero vectors get similarity 0 to everything. Neighbor ties at equal
    distance resolve toward the smaller training index; vote ties toward the
    smallest class index.
    """

    def __init__(self, k: int = 5):
        self.k = k
        self._unit_train: np.ndarray | None = None
        self._labels: np.ndarray | None = None
        self._num_classes: int | None = None

    @staticmethod
    def _unit_rows(X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        norms = np.linalg.norm(X, axis=1, keepdims=True)
        norms[norms == 0.0] = 1.0
        return X / norms

    def fit(self, X: np.ndarray, y: np.ndarray, num_classes: int) -> "CosineKNN":
        self._unit_train = self._unit_rows(X)
        self._labels = np.asarray(y, dtype=np.int64)
        self._num_classes = num_classes
        return self

    def predict(self, X: np.ndarray) -> np.ndarray:
        distances = 1.0 - self._unit_rows(X) @ self._unit_train.T
        k = min(self.k, self._unit_train.shape[0])
        out = np.empty(distances.shape[0], dtype=np.int64)
        for i, row in enumerate(distances):
            order = np.argsort(row, kind="stable")[:k]
            votes = np.bincount(self._labels[order], minlength=self._num_classes)
            out[i] = int(np.argmax(votes))
        return out


class NearestCentroid:
    """Per-class mean vectors; prediction is the Euclidean-nearest centroid."""

    def __init__(self):
        self._centroids: np.ndarray | None = None
        self._classes: np.ndarray | None = None

    def fit(self, X: np.ndarray, y: np.ndarray, num_classes: int) -> "NearestCentroid":
        X = np.asarray(X, dtype=np.float64)
        y = np.asarray(y, dtype=np.int64)
        present = sorted(int(c) for c in np.unique(y))
        self._classes = np.array(present, dtype=np.int64)
        self._centroids = np.vstack([X[y == c].mean(axis=0) for c in present])
        return self

    def predict(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        d2 = ((X[:, None, :] - self._centroids[None, :, :]) ** 2).sum(axis=2)
        return self._classes[np.argmin(d2, axis=1)]


def make_learner(token: str, *, knn_k: int = 5):
    token = token.strip().upper()
    if token == "NB":
        return MultinomialNB()
    if token == "LR":
        return SoftmaxRegression()
    if token == "KNN":
        return CosineKNN(k=knn_k)
    if token == "NC":
        return NearestCentroid()
    raise ValueError(f"unknown algorithm token {token!r}; expected one of {ALGORITHM_TOKENS}")

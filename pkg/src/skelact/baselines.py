"""Comparison systems: a per-frame linear max-margin classifier and a
one-level MEMM that smooths its calibrated scores over time."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateLabelsError, DimensionMismatchError
from .memm import manual_activity_table

EPOCHS = 200
LAMBDA = 1e-4
MIN_SAMPLES_PER_CLASS = 10


@dataclass(frozen=True)
class LinearActivityClassifier:
    """One-vs-rest linear scorers with per-class sigmoid calibration."""

    classes: tuple[str, ...]
    weights: np.ndarray  # (n_classes, dim)
    biases: np.ndarray  # (n_classes,)
    platt_a: np.ndarray  # (n_classes,)
    platt_b: np.ndarray  # (n_classes,)

    def decision_function(self, x: np.ndarray) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=float))
        if x.shape[1] != self.weights.shape[1]:
            raise DimensionMismatchError(
                f"feature dim {x.shape[1]} != classifier dim {self.weights.shape[1]}"
            )
        return x @ self.weights.T + self.biases

    def predict(self, x: np.ndarray) -> list[str]:
        scores = self.decision_function(x)
        return [self.classes[i] for i in np.argmax(scores, axis=1)]

    def predict_proba(self, x: np.ndarray) -> np.ndarray:
        """Calibrated per-class probabilities renormalized across classes."""
        scores = self.decision_function(x)
        probs = _sigmoid(self.platt_a[None, :] * scores + self.platt_b[None, :])
        return probs / probs.sum(axis=1, keepdims=True)


def _sigmoid(x: np.ndarray) -> np.ndarray:
    out = np.empty_like(x, dtype=float)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def _hinge_descent(x: np.ndarray, y: np.ndarray) -> tuple[np.ndarray, float]:
    """Regularized hinge loss minimized by full-batch subgradient descent.

    Batch updates make the result independent of sample order (up to float
    summation), which per-sample schedules would not be.
    """
    n, d = x.shape
    w = np.zeros(d)
    b = 0.0
    for epoch in range(EPOCHS):
        lr = 0.5 / (1.0 + 0.05 * epoch)
        margins = y * (x @ w + b)
        violators = margins < 1.0
        if violators.any():
            grad_w = LAMBDA * w - (y[violators, None] * x[violators]).sum(axis=0) / n
            grad_b = -y[violators].sum() / n
        else:
            grad_w = LAMBDA * w
            grad_b = 0.0
        w -= lr * grad_w
        b -= lr * grad_b
    return w, b


def platt_calibrate(scores: np.ndarray, labels: np.ndarray) -> tuple[float, float]:
    """Fit sigma(A*s + B) to binary labels by damped Newton iterations.

    Targets use the standard prior-corrected values so the optimum stays
    finite even on perfectly separated scores. Stops after 100 iterations
    or when the step and objective improvement fall below 1e-8.
    """
    scores = np.asarray(scores, dtype=float)
    labels = np.asarray(labels)
    pos = labels > 0
    n_pos, n_neg = int(pos.sum()), int((~pos).sum())
    target = np.where(pos, (n_pos + 1.0) / (n_pos + 2.0), 1.0 / (n_neg + 2.0))

    def nll(a: float, b: float) -> float:
        logits = a * scores + b
        # -[t*log(p) + (1-t)*log(1-p)] with p = sigmoid(logits)
        return float(np.sum((1.0 - target) * logits + np.logaddexp(0.0, -logits)))

    a, b = 0.0, float(np.log((n_pos + 1.0) / (n_neg + 1.0)))
    current = nll(a, b)
    for _ in range(100):
        p = _sigmoid(a * scores + b)
        diff = p - target
        grad = np.array([float(diff @ scores), float(diff.sum())])
        curv = p * (1.0 - p)
        hess = np.array(
            [
                [float(curv @ (scores * scores)), float(curv @ scores)],
                [float(curv @ scores), float(curv.sum())],
            ]
        ) + 1e-12 * np.eye(2)
        step = np.linalg.solve(hess, grad)
        # damping: halve the step until the objective does not increase
        scale = 1.0
        for _ in range(30):
            trial = nll(a - scale * step[0], b - scale * step[1])
            if trial <= current + 1e-15:
                break
            scale *= 0.5
        a -= scale * step[0]
        b -= scale * step[1]
        improved = current - trial
        current = trial
        if np.abs(step).max() * scale < 1e-8 or improved < 1e-8:
            break
    return float(a), float(b)


def train_naive(features: np.ndarray, labels: list[str]) -> LinearActivityClassifier:
    """One-vs-rest hinge classifiers plus per-class Platt calibration."""
    features = np.asarray(features, dtype=float)
    labels = list(labels)
    classes = sorted(set(labels))
    if len(classes) < 2:
        raise DegenerateLabelsError("need at least two classes")
    counts = {c: labels.count(c) for c in classes}
    thin = [c for c, n in counts.items() if n < MIN_SAMPLES_PER_CLASS]
    if thin:
        raise DegenerateLabelsError(
            f"classes with fewer than {MIN_SAMPLES_PER_CLASS} samples: {thin}"
        )

    label_arr = np.asarray(labels)
    weights, biases, platt_a, platt_b = [], [], [], []
    for c in classes:
        y = np.where(label_arr == c, 1.0, -1.0)
        w, b = _hinge_descent(features, y)
        weights.append(w)
        biases.append(b)
        a_c, b_c = platt_calibrate(features @ w + b, y > 0)
        platt_a.append(a_c)
        platt_b.append(b_c)
    return LinearActivityClassifier(
        classes=tuple(classes),
        weights=np.stack(weights),
        biases=np.array(biases),
        platt_a=np.array(platt_a),
        platt_b=np.array(platt_b),
    )


def one_level_step(
    alpha: np.ndarray,
    x_t: np.ndarray,
    classifier: LinearActivityClassifier,
    act_trans: np.ndarray,
) -> np.ndarray:
    """One forward-filter step: alpha'(j) proportional to
    sum_k alpha(k) P(j|k) P(j|x) / P(j) with a uniform P(j)."""
    emission = classifier.predict_proba(x_t)[0]
    prior = 1.0 / len(alpha)
    updated = (alpha @ act_trans) * emission / prior
    return updated / updated.sum()


class NaiveFrameClassifier:
    """sklearn-style wrapper over train_naive; each frame is independent."""

    def fit(self, X, y):
        self.model_ = train_naive(np.asarray(X, dtype=float), list(y))
        self.classes_ = self.model_.classes
        return self

    def predict(self, X):
        self._check_fitted()
        return np.asarray(self.model_.predict(X))

    def predict_proba(self, X):
        self._check_fitted()
        return self.model_.predict_proba(X)

    def decision_function(self, X):
        self._check_fitted()
        return self.model_.decision_function(X)

    def _check_fitted(self):
        if not hasattr(self, "model_"):
            raise DegenerateLabelsError("classifier is not fitted")

    def get_params(self, deep=True):
        return {}

    def set_params(self, **params):
        if params:
            raise ValueError(f"unknown parameters: {sorted(params)}")
        return self


class OneLevelMemmClassifier:
    """Frame classifier smoothed by the manual activity-transition table.

    The full model's table covers activities plus neutral; this model can
    only emit trained classes, so the table is restricted to them and each
    row renormalized.
    """

    def __init__(self, self_prob: float = 0.6, to_neutral: float = 0.3):
        self.self_prob = self_prob
        self.to_neutral = to_neutral

    def fit(self, X_sequences, y):
        frames = np.vstack([np.asarray(s, dtype=float) for s in X_sequences])
        labels = [
            label for seq, label in zip(X_sequences, y) for _ in range(len(seq))
        ]
        self.model_ = train_naive(frames, labels)
        self.classes_ = self.model_.classes
        n = len(self.classes_)
        full = manual_activity_table(n, self.self_prob, self.to_neutral)
        restricted = full[:n, :n]
        self.act_trans_ = restricted / restricted.sum(axis=1, keepdims=True)
        return self

    def predict_proba(self, X_seq):
        if not hasattr(self, "model_"):
            raise DegenerateLabelsError("classifier is not fitted")
        X_seq = np.atleast_2d(np.asarray(X_seq, dtype=float))
        n = len(self.classes_)
        alpha = np.full(n, 1.0 / n)
        out = np.empty((X_seq.shape[0], n))
        for t in range(X_seq.shape[0]):
            alpha = one_level_step(alpha, X_seq[t], self.model_, self.act_trans_)
            out[t] = alpha
        return out

    def predict(self, X_seq):
        probs = self.predict_proba(X_seq)
        return np.asarray([self.classes_[i] for i in np.argmax(probs, axis=1)])

    def get_params(self, deep=True):
        return {"self_prob": self.self_prob, "to_neutral": self.to_neutral}

    def set_params(self, **params):
        for key, value in params.items():
            if key not in ("self_prob", "to_neutral"):
                raise ValueError(f"unknown parameter {key!r}")
            setattr(self, key, value)
        return self

"""Multinomial logistic regression trained by full-batch gradient descent.

The objective is mean cross-entropy plus an L2 penalty on the weights
(never the biases)::

    J(W, b) = -1/n sum_i log softmax(W x_i + b)[y_i] + 1/(2 C n) ||W||^2

C is the inverse regularization strength, matching the usual SVM
convention: larger C means a weaker penalty.  The objective is smooth and
convex, so plain gradient descent with a backtracking line search finds
the global optimum; no stochasticity is involved and training is exactly
reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import TrainingError

GRAD_TOL = 1e-6
MAX_ITER = 2000
ARMIJO_C = 1e-4
BACKTRACK = 0.5
MIN_STEP = 1e-20


@dataclass
class LogRegModel:
    weights: np.ndarray  # (classes, dim)
    biases: np.ndarray  # (classes,)
    reg_strength: float  # the C the model was trained with
    loss_history: list = field(default_factory=list, repr=False)

    @property
    def n_classes(self) -> int:
        return self.weights.shape[0]


def _softmax(scores: np.ndarray) -> np.ndarray:
    shifted = scores - scores.max(axis=1, keepdims=True)
    expd = np.exp(shifted)
    return expd / expd.sum(axis=1, keepdims=True)


def _loss(scores: np.ndarray, one_hot: np.ndarray, weights: np.ndarray,
          reg: float) -> float:
    shifted = scores - scores.max(axis=1, keepdims=True)
    log_norm = np.log(np.exp(shifted).sum(axis=1))
    log_probs = shifted - log_norm[:, None]
    ce = -np.mean(np.sum(one_hot * log_probs, axis=1))
    return float(ce + 0.5 * reg * np.sum(weights * weights))


def loss_and_grad(weights: np.ndarray, biases: np.ndarray,
                  features: np.ndarray, labels: np.ndarray,
                  C: float) -> tuple[float, np.ndarray, np.ndarray]:
    """Objective value and its gradients at arbitrary parameters.

    Exposed so callers can check convergence or probe the optimization
    surface; the trainer uses the same arithmetic.
    """
    n = features.shape[0]
    n_classes = weights.shape[0]
    one_hot = np.zeros((n, n_classes))
    one_hot[np.arange(n), labels] = 1.0
    reg = 1.0 / (C * n)
    scores = features @ weights.T + biases
    probs = _softmax(scores)
    resid = (probs - one_hot) / n
    grad_w = resid.T @ features + reg * weights
    grad_b = resid.sum(axis=0)
    return _loss(scores, one_hot, weights, reg), grad_w, grad_b


def train_logreg(features: np.ndarray, labels: np.ndarray, C: float = 1.0,
                 seed: int = 0, max_iter: int = MAX_ITER,
                 grad_tol: float = GRAD_TOL) -> LogRegModel:
    """Fit the softmax model from a zero start.

    Stops when the gradient max-norm falls to ``grad_tol`` or after
    ``max_iter`` descent steps.  ``seed`` is accepted for interface
    uniformity with the SVM trainer; the zero start makes it moot.
    Raises TrainingError for a single-class label vector, C <= 0, or
    non-finite inputs.
    """
    del seed
    features = np.asarray(features, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.int64)
    if features.ndim != 2 or len(labels) != features.shape[0]:
        raise TrainingError("features must be 2-D with one label per row")
    if not np.all(np.isfinite(features)):
        raise TrainingError("features contain non-finite values")
    if C <= 0:
        raise TrainingError(f"C must be positive, got {C}")
    n, dim = features.shape
    n_classes = int(labels.max()) + 1 if len(labels) else 0
    if len(np.unique(labels)) < 2:
        raise TrainingError("need at least 2 classes in the labels")
    if labels.min() < 0:
        raise TrainingError("labels must be non-negative class indices")

    one_hot = np.zeros((n, n_classes))
    one_hot[np.arange(n), labels] = 1.0
    reg = 1.0 / (C * n)

    weights = np.zeros((n_classes, dim))
    biases = np.zeros(n_classes)
    history = []
    step = 1.0

    scores = features @ weights.T + biases
    loss = _loss(scores, one_hot, weights, reg)
    history.append(loss)

    for _ in range(max_iter):
        probs = _softmax(scores)
        resid = (probs - one_hot) / n
        grad_w = resid.T @ features + reg * weights
        grad_b = resid.sum(axis=0)
        grad_norm = max(np.abs(grad_w).max(), np.abs(grad_b).max())
        if grad_norm <= grad_tol:
            break

        sq_norm = float(np.sum(grad_w * grad_w) + np.sum(grad_b * grad_b))
        step = min(step * 2.0, 1e6)
        while True:
            new_w = weights - step * grad_w
            new_b = biases - step * grad_b
            new_scores = features @ new_w.T + new_b
            new_loss = _loss(new_scores, one_hot, new_w, reg)
            if new_loss <= loss - ARMIJO_C * step * sq_norm:
                break
            step *= BACKTRACK
            if step < MIN_STEP:
                # No productive step exists at float precision; we are at
                # the optimum as far as the arithmetic can tell.
                new_w, new_b, new_scores, new_loss = weights, biases, scores, loss
                break
        if step < MIN_STEP:
            break
        weights, biases, scores, loss = new_w, new_b, new_scores, new_loss
        history.append(loss)

    if not np.all(np.isfinite(weights)) or not np.all(np.isfinite(biases)):
        raise TrainingError("training diverged to non-finite parameters")
    return LogRegModel(weights=weights, biases=biases, reg_strength=C,
                       loss_history=history)


def predict_proba(model: LogRegModel, features: np.ndarray) -> np.ndarray:
    """Per-row class probabilities; rows sum to 1."""
    features = np.asarray(features, dtype=np.float64)
    if features.ndim != 2 or features.shape[1] != model.weights.shape[1]:
        raise TrainingError(
            f"features have dim {features.shape[-1]}, model expects "
            f"{model.weights.shape[1]}")
    return _softmax(features @ model.weights.T + model.biases)


def predict(model: LogRegModel, features: np.ndarray) -> np.ndarray:
    return np.argmax(predict_proba(model, features), axis=1)

"""RBF-kernel SVM trained by sequential minimal optimization.

Solves the standard soft-margin dual

    max  sum_i a_i - 1/2 sum_ij a_i a_j y_i y_j K(x_i, x_j)
    s.t. 0 <= a_i <= C,  sum_i a_i y_i = 0

by repeatedly picking the maximal violating pair (the index with the
largest KKT violation from above and the one from below) and solving the
two-variable subproblem analytically.  The equality constraint is
preserved exactly by every pairwise update.  Multiclass problems are
handled one-vs-rest with one binary machine per class.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import SmoConvergenceError, TrainingError

SMO_TOL = 1e-3
SV_EPS = 1e-12


def rbf_kernel(x: np.ndarray, z: np.ndarray, gamma: float) -> float:
    """exp(-gamma * ||x - z||^2) for two vectors."""
    x = np.asarray(x, dtype=np.float64)
    z = np.asarray(z, dtype=np.float64)
    if x.shape != z.shape or x.ndim != 1:
        raise ValueError("rbf_kernel expects two vectors of equal length")
    if gamma <= 0:
        raise ValueError(f"gamma must be positive, got {gamma}")
    diff = x - z
    return float(np.exp(-gamma * np.dot(diff, diff)))


def _rbf_matrix(a: np.ndarray, b: np.ndarray, gamma: float) -> np.ndarray:
    sq = (
        np.sum(a * a, axis=1)[:, None]
        + np.sum(b * b, axis=1)[None, :]
        - 2.0 * (a @ b.T)
    )
    np.maximum(sq, 0.0, out=sq)
    return np.exp(-gamma * sq)


@dataclass
class BinaryMachine:
    support_vectors: np.ndarray  # (n_sv, dim)
    dual_coefs: np.ndarray  # (n_sv,), alpha_i * y_i
    bias: float

    def decision(self, features: np.ndarray, gamma: float) -> np.ndarray:
        return _rbf_matrix(features, self.support_vectors, gamma) @ self.dual_coefs + self.bias


@dataclass
class SvmModel:
    machines: list[BinaryMachine]  # one for 2 classes, one per class for 3
    n_classes: int
    gamma: float
    C: float

    def decision_values(self, features: np.ndarray) -> np.ndarray:
        """(n, n_machines) matrix of signed distances to each boundary."""
        features = np.asarray(features, dtype=np.float64)
        cols = [m.decision(features, self.gamma) for m in self.machines]
        return np.stack(cols, axis=1)


def _smo(kernel: np.ndarray, y: np.ndarray, C: float, tol: float = SMO_TOL,
         max_iter: int | None = None) -> tuple[np.ndarray, float, int]:
    """Core solver on a precomputed kernel matrix; y in {-1, +1}.

    Returns (alpha, bias, iterations).  One iteration is one
    maximal-violating-pair update; the default budget is 10n of them.
    """
    n = len(y)
    if max_iter is None:
        max_iter = 10 * n
    alpha = np.zeros(n)
    # f_i = sum_j alpha_j y_j K_ij, maintained incrementally: each update
    # touches two alphas, so refreshing f costs O(n).
    f = np.zeros(n)

    # i is eligible to move up (alpha_i y_i can increase) when
    # y=+1, a<C or y=-1, a>0; down is the mirror image.
    pos = y > 0

    for iteration in range(max_iter + 1):
        up = (pos & (alpha < C)) | (~pos & (alpha > 0))
        down = (pos & (alpha > 0)) | (~pos & (alpha < C))
        # v_t = y_t - f_t: the optimal bias must sit above every v in the
        # down set and below every v in the up set, so m_up - m_down > 0
        # measures the worst KKT violation.
        vals = y - f
        up_vals = np.where(up, vals, -np.inf)
        down_vals = np.where(down, vals, np.inf)
        i = int(np.argmax(up_vals))
        j = int(np.argmin(down_vals))
        m_up = up_vals[i]
        m_down = down_vals[j]
        if m_up - m_down <= tol:
            bias = _bias_from(alpha, y, f, C, m_up, m_down)
            return alpha, bias, iteration
        if iteration == max_iter:
            break

        # Analytic two-variable step: move alpha_i y_i up and alpha_j y_j
        # down by the same amount t, which keeps sum alpha y = 0 exactly.
        eta = kernel[i, i] + kernel[j, j] - 2.0 * kernel[i, j]
        eta = max(eta, 1e-12)
        t_max_i = (C - alpha[i]) if pos[i] else alpha[i]
        t_max_j = (C - alpha[j]) if not pos[j] else alpha[j]
        t = min((m_up - m_down) / eta, t_max_i, t_max_j)
        alpha[i] += t if pos[i] else -t
        alpha[j] -= t if pos[j] else -t
        f += t * (kernel[i] - kernel[j])

    raise SmoConvergenceError(
        f"SMO did not reach tolerance {tol} within {max_iter} updates")


def _bias_from(alpha: np.ndarray, y: np.ndarray, f: np.ndarray, C: float,
               m_up: float, m_down: float) -> float:
    free = (alpha > SV_EPS) & (alpha < C - SV_EPS)
    if np.any(free):
        return float(np.mean(y[free] - f[free]))
    return float((m_up + m_down) / 2.0)


def train_svm_rbf(features: np.ndarray, labels: np.ndarray, C: float,
                  gamma: float, seed: int = 0, tol: float = SMO_TOL,
                  max_iter: int | None = None) -> SvmModel:
    """Train one machine for 2 classes, or one-vs-rest machines for 3.

    ``seed`` is accepted for interface uniformity; maximal-violating-pair
    selection is deterministic so it is unused.  Raises TrainingError for
    degenerate inputs and SmoConvergenceError when the update budget runs
    out before the duality gap closes.
    """
    del seed
    features = np.asarray(features, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.int64)
    if features.ndim != 2 or len(labels) != features.shape[0]:
        raise TrainingError("features must be 2-D with one label per row")
    if not np.all(np.isfinite(features)):
        raise TrainingError("features contain non-finite values")
    if C <= 0 or gamma <= 0:
        raise TrainingError(f"C and gamma must be positive, got C={C} gamma={gamma}")
    present = np.unique(labels)
    if len(present) < 2:
        raise TrainingError("need at least 2 classes in the labels")
    n_classes = int(labels.max()) + 1

    kernel = _rbf_matrix(features, features, gamma)
    machines = []
    if n_classes == 2:
        targets = [np.where(labels == 1, 1.0, -1.0)]
    else:
        targets = [np.where(labels == c, 1.0, -1.0) for c in range(n_classes)]
    for y in targets:
        alpha, bias, _ = _smo(kernel, y, C, tol=tol, max_iter=max_iter)
        sv = alpha > SV_EPS
        machines.append(BinaryMachine(
            support_vectors=features[sv].copy(),
            dual_coefs=(alpha * y)[sv],
            bias=bias,
        ))
    return SvmModel(machines=machines, n_classes=n_classes, gamma=gamma, C=C)


def predict(model: SvmModel, features: np.ndarray) -> np.ndarray:
    """Binary: label 1 iff the decision value is positive.  One-vs-rest:
    the machine with the largest decision value wins."""
    values = model.decision_values(features)
    if model.n_classes == 2:
        return (values[:, 0] > 0).astype(np.int64)
    return np.argmax(values, axis=1).astype(np.int64)


def dual_objective(alpha: np.ndarray, y: np.ndarray, kernel: np.ndarray) -> float:
    """Value of the dual objective; used for convergence diagnostics."""
    ay = alpha * y
    return float(alpha.sum() - 0.5 * ay @ kernel @ ay)

"""Independent reference implementations used to check the trainers.

Deliberately simple and slow: projected gradient ascent for the SVM dual,
a cyclic Jacobi eigensolver for PCA, and central finite differences for
gradients.  None of them share code with the package.
"""

from __future__ import annotations

import numpy as np


def project_box_hyperplane(v: np.ndarray, y: np.ndarray, C: float) -> np.ndarray:
    """Euclidean projection onto {0 <= a <= C, a . y = 0}.

    The Lagrangian form is clip(v - lam*y, 0, C) with a . y monotone
    decreasing in lam, so bisection on lam finds the feasible point.
    """
    bound = float(np.abs(v).max()) + C + 1.0
    lo, hi = -bound, bound
    for _ in range(50):
        lam = 0.5 * (lo + hi)
        if np.clip(v - lam * y, 0.0, C) @ y > 0:
            lo = lam
        else:
            hi = lam
    return np.clip(v - 0.5 * (lo + hi) * y, 0.0, C)


def qp_dual_oracle(kernel: np.ndarray, y: np.ndarray, C: float,
                   iters: int = 2000) -> np.ndarray:
    """Maximize the SVM dual by projected gradient ascent."""
    a = project_box_hyperplane(np.full(len(y), C / 2.0), y, C)
    Q = kernel * np.outer(y, y)
    step = 1.0 / (np.linalg.norm(Q, 2) + 1.0)
    for _ in range(iters):
        a = project_box_hyperplane(a + step * (1.0 - Q @ a), y, C)
    return a


def dual_objective_loops(a: np.ndarray, y: np.ndarray, kernel: np.ndarray) -> float:
    total = 0.0
    n = len(y)
    for i in range(n):
        total += a[i]
        for j in range(n):
            total -= 0.5 * a[i] * a[j] * y[i] * y[j] * kernel[i, j]
    return total


def jacobi_eigh(matrix: np.ndarray, sweeps: int = 60,
                tol: float = 1e-14) -> tuple[np.ndarray, np.ndarray]:
    """Cyclic Jacobi diagonalization of a symmetric matrix.

    Returns (eigenvalues, eigenvectors-as-columns) sorted by decreasing
    eigenvalue.
    """
    a = np.array(matrix, dtype=np.float64)
    n = a.shape[0]
    vecs = np.eye(n)
    for _ in range(sweeps):
        off = np.sqrt(np.sum(np.tril(a, -1) ** 2))
        if off <= tol:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                if abs(a[p, q]) <= tol / (n * n):
                    continue
                theta = 0.5 * np.arctan2(2.0 * a[p, q], a[q, q] - a[p, p])
                c, s = np.cos(theta), np.sin(theta)
                rot = np.eye(n)
                rot[p, p] = c
                rot[q, q] = c
                rot[p, q] = s
                rot[q, p] = -s
                a = rot.T @ a @ rot
                vecs = vecs @ rot
    order = np.argsort(np.diag(a))[::-1]
    return np.diag(a)[order], vecs[:, order]


def central_diff_grad(func, point: np.ndarray, eps: float = 1e-6) -> np.ndarray:
    """Central finite differences of a scalar function, coordinatewise."""
    flat = point.ravel()
    grad = np.zeros_like(flat)
    for i in range(flat.size):
        bump = np.zeros_like(flat)
        bump[i] = eps
        grad[i] = (func((flat + bump).reshape(point.shape))
                   - func((flat - bump).reshape(point.shape))) / (2.0 * eps)
    return grad.reshape(point.shape)

import numpy as np
import pytest

from embedprobe.errors import TrainingError
from embedprobe.logreg import (
    LogRegModel,
    loss_and_grad,
    predict,
    predict_proba,
    train_logreg,
)

from oracles import central_diff_grad


def _random_instance(rng, n_classes):
    n = int(rng.integers(6, 20))
    d = int(rng.integers(1, 5))
    x = rng.normal(0, 1, (n, d))
    y = np.array([i % n_classes for i in range(n)])
    return x, y


class TestGradientOracle:
    def test_matches_central_differences(self):
        # Relative agreement at 1e-6 with h=1e-5 on random parameter points.
        rng = np.random.default_rng(40)
        for trial in range(20):
            n_classes = 2 if trial % 2 == 0 else 3
            x, y = _random_instance(rng, n_classes)
            d = x.shape[1]
            w = rng.normal(0, 0.5, (n_classes, d))
            b = rng.normal(0, 0.5, n_classes)
            C = float(rng.choice([0.1, 1.0, 10.0]))
            _, grad_w, grad_b = loss_and_grad(w, b, x, y, C)
            flat = np.concatenate([w.ravel(), b])

            def f(p):
                pw = p[: w.size].reshape(w.shape)
                pb = p[w.size:]
                return loss_and_grad(pw, pb, x, y, C)[0]

            numeric = central_diff_grad(f, flat, eps=1e-5)
            analytic = np.concatenate([grad_w.ravel(), grad_b])
            scale = max(1.0, float(np.abs(numeric).max()))
            np.testing.assert_allclose(analytic, numeric, atol=1e-6 * scale)

    def test_zero_gradient_at_balanced_optimum(self):
        # With symmetric classes the zero parameter point is a stationary
        # point of the data term only when classes mirror each other.
        x = np.array([[1.0], [-1.0]])
        y = np.array([1, 0])
        _, grad_w, grad_b = loss_and_grad(
            np.zeros((2, 1)), np.zeros(2), x, y, 1.0)
        np.testing.assert_allclose(grad_b, 0.0, atol=1e-15)
        assert grad_w[0, 0] > 0 and grad_w[1, 0] < 0


class TestTrainLogreg:
    def test_separable_one_dimensional(self):
        x = np.array([[-1.0], [-1.0], [1.0], [1.0]])
        y = np.array([0, 0, 1, 1])
        model = train_logreg(x, y, C=1.0)
        assert np.array_equal(predict(model, x), y)
        probs = predict_proba(model, np.array([[1.0]]))
        assert probs[0, 1] > 0.5

    def test_loss_history_strictly_decreases(self):
        rng = np.random.default_rng(41)
        x = rng.normal(0, 1, (40, 3))
        y = (x[:, 0] > 0).astype(int)
        model = train_logreg(x, y, C=10.0)
        hist = np.asarray(model.loss_history)
        assert len(hist) >= 2
        assert np.all(np.diff(hist) < 0)

    def test_converges_to_small_gradient(self):
        rng = np.random.default_rng(42)
        x = rng.normal(0, 1, (60, 4))
        y = np.array([i % 3 for i in range(60)])
        model = train_logreg(x, y, C=1.0)
        _, grad_w, grad_b = loss_and_grad(
            model.weights, model.biases, x, y, 1.0)
        assert max(np.abs(grad_w).max(), np.abs(grad_b).max()) <= 1e-6

    def test_regularization_shrinks_weights(self):
        rng = np.random.default_rng(43)
        x = rng.normal(0, 1, (50, 2))
        y = (x[:, 0] + 0.2 * rng.normal(size=50) > 0).astype(int)
        small_c = train_logreg(x, y, C=0.01)
        large_c = train_logreg(x, y, C=100.0)
        assert np.linalg.norm(small_c.weights) < np.linalg.norm(large_c.weights)

    def test_multiclass_recovers_clusters(self):
        rng = np.random.default_rng(44)
        centers = np.array([[0.0, 3.0], [3.0, -3.0], [-3.0, -3.0]])
        x = np.vstack([c + rng.normal(0, 0.3, (20, 2)) for c in centers])
        y = np.repeat([0, 1, 2], 20)
        model = train_logreg(x, y, C=10.0)
        assert (predict(model, x) == y).mean() == 1.0

    def test_input_validation(self):
        with pytest.raises(TrainingError):
            train_logreg(np.zeros((4,)), np.zeros(4, dtype=int))
        with pytest.raises(TrainingError):
            train_logreg(np.full((4, 2), np.nan), np.zeros(4, dtype=int))
        with pytest.raises(TrainingError):
            train_logreg(np.zeros((4, 2)), np.zeros(4, dtype=int), C=0.0)
        with pytest.raises(TrainingError):
            train_logreg(np.zeros((4, 2)), np.zeros(4, dtype=int))  # 1 class


class TestPredictProba:
    def test_zero_model_is_uniform(self):
        model = LogRegModel(np.zeros((2, 3)), np.zeros(2), 1.0)
        probs = predict_proba(model, np.ones((5, 3)))
        np.testing.assert_allclose(probs, 0.5)

    def test_rows_sum_to_one(self):
        rng = np.random.default_rng(45)
        model = LogRegModel(rng.normal(0, 1, (3, 4)), rng.normal(0, 1, 3), 1.0)
        probs = predict_proba(model, rng.normal(0, 1, (10, 4)))
        np.testing.assert_allclose(probs.sum(axis=1), 1.0, atol=1e-12)
        assert np.all(probs >= 0)

    def test_extreme_scores_stay_finite(self):
        model = LogRegModel(np.array([[1000.0], [-1000.0]]), np.zeros(2), 1.0)
        probs = predict_proba(model, np.array([[1.0], [-1.0]]))
        assert np.all(np.isfinite(probs))
        np.testing.assert_allclose(probs.sum(axis=1), 1.0)

    def test_dimension_mismatch_rejected(self):
        model = LogRegModel(np.zeros((2, 3)), np.zeros(2), 1.0)
        with pytest.raises(TrainingError, match="dim"):
            predict_proba(model, np.ones((5, 4)))

import numpy as np
import pytest

from embedprobe.embeddings import EmbeddingSet
from embedprobe.errors import TrainingError
from embedprobe.evaluate import (
    cross_validate,
    geometric_mean,
    grid_search,
    metrics,
)
from embedprobe.tasks import LabeledTask, build_features, make_folds


class TestMetrics:
    def test_hand_computed_two_class(self):
        # rows = truth: class 0 all correct, class 1 split 1/1.
        result = metrics([[2, 0], [1, 1]])
        np.testing.assert_allclose(result.accuracy, 0.75)
        np.testing.assert_allclose(result.f1[0], 0.8)
        np.testing.assert_allclose(result.f1[1], 2.0 / 3.0)
        np.testing.assert_allclose(result.macro_f1, (0.8 + 2.0 / 3.0) / 2)
        np.testing.assert_allclose(result.precision, (2 / 3, 1.0))
        np.testing.assert_allclose(result.recall, (1.0, 0.5))

    def test_perfect_diagonal(self):
        result = metrics([[5, 0, 0], [0, 7, 0], [0, 0, 3]])
        assert result.accuracy == 1.0
        assert result.macro_f1 == 1.0

    def test_total_confusion_scores_zero(self):
        result = metrics([[0, 4], [4, 0]])
        assert result.accuracy == 0.0
        assert result.macro_f1 == 0.0

    def test_never_predicted_class_scores_zero(self):
        # Column for class 1 is empty: precision denominator is 0.
        result = metrics([[3, 0], [2, 0]])
        assert result.precision[1] == 0.0
        assert result.recall[1] == 0.0
        assert result.f1[1] == 0.0

    def test_invalid_confusions_rejected(self):
        with pytest.raises(ValueError):
            metrics([[1, 2, 3], [4, 5, 6]])  # not square
        with pytest.raises(ValueError):
            metrics([[0, 0], [0, 0]])  # no observations


class TestGeometricMean:
    def test_equal_values(self):
        np.testing.assert_allclose(geometric_mean([0.8, 0.8]), 0.8)

    def test_hand_value(self):
        np.testing.assert_allclose(geometric_mean([0.64, 1.0]), 0.8)

    def test_singleton(self):
        np.testing.assert_allclose(geometric_mean([0.37]), 0.37)

    def test_at_most_arithmetic_mean(self):
        rng = np.random.default_rng(60)
        for _ in range(20):
            vals = rng.uniform(0.05, 1.0, size=rng.integers(1, 6))
            assert geometric_mean(vals) <= np.mean(vals) + 1e-12

    def test_rejects_empty_and_nonpositive(self):
        with pytest.raises(ValueError):
            geometric_mean([])
        with pytest.raises(ValueError):
            geometric_mean([0.5, 0.0])


def _split(seed=0, n=40, margin=2.0, noise=0.5):
    # Separation of 8 sigma: every sensible grid point reaches dev
    # accuracy 1.0, which is what the tie-break tests need.
    rng = np.random.default_rng(seed)
    x = rng.normal(0, noise, (n, 3))
    y = np.array([i % 2 for i in range(n)])
    x[:, 0] += np.where(y == 0, -margin, margin)
    half = n // 2
    return x[:half], y[:half], x[half:], y[half:]


class TestGridSearch:
    def test_single_point_grid(self):
        train_x, train_y, dev_x, dev_y = _split()
        best = grid_search("logreg", train_x, train_y, dev_x, dev_y,
                           grid={"C": [10.0]})
        assert best == {"C": 10.0}

    def test_higher_dev_accuracy_wins(self):
        # C=0.0001 shrinks the weights to near zero on a weak-signal set,
        # losing to C=10 on dev accuracy.
        rng = np.random.default_rng(61)
        x = rng.normal(0, 1, (80, 2))
        y = (x[:, 0] + 0.5 * rng.normal(size=80) > 0).astype(int)
        best = grid_search("logreg", x[:40], y[:40], x[40:], y[40:],
                           grid={"C": [1e-9, 10.0]})
        assert best == {"C": 10.0}

    def test_tie_breaks_to_smaller_c_both_orders(self):
        train_x, train_y, dev_x, dev_y = _split()  # separable: all points tie
        for grid in ({"C": [1.0, 10.0]}, {"C": [10.0, 1.0]}):
            best = grid_search("logreg", train_x, train_y, dev_x, dev_y,
                               grid=grid)
            assert best == {"C": 1.0}

    def test_tie_breaks_to_smaller_gamma(self):
        train_x, train_y, dev_x, dev_y = _split()
        best = grid_search("svm-rbf", train_x, train_y, dev_x, dev_y,
                           grid={"C": [1.0], "gamma": [2.0, 0.5]})
        assert best == {"C": 1.0, "gamma": 0.5}

    def test_failing_points_skipped_with_warning(self):
        train_x, train_y, dev_x, dev_y = _split()
        with pytest.warns(UserWarning, match="grid point"):
            best = grid_search("logreg", train_x, train_y, dev_x, dev_y,
                               grid={"C": [-1.0, 1.0]})
        assert best == {"C": 1.0}

    def test_all_points_failing_raises(self):
        train_x, train_y, dev_x, dev_y = _split()
        with pytest.warns(UserWarning):
            with pytest.raises(TrainingError, match="every grid point failed"):
                grid_search("logreg", train_x, train_y, dev_x, dev_y,
                            grid={"C": [-1.0, -2.0]})

    def test_unknown_classifier(self):
        train_x, train_y, dev_x, dev_y = _split()
        with pytest.raises(TrainingError, match="unknown classifier"):
            grid_search("tree", train_x, train_y, dev_x, dev_y)


def _folded_dataset(n=40, seed=3):
    rng = np.random.default_rng(seed)
    entries, items = {}, []
    for i in range(n):
        cls = i % 2
        vec = rng.normal(0, 0.3, 3)
        vec[0] += -1.5 if cls == 0 else 1.5
        entries[f"w{i}"] = vec
        items.append((f"w{i}", cls))
    emb = EmbeddingSet.from_dict("e", entries)
    task = LabeledTask("t", "term", ("neg", "pos"), tuple(items))
    return make_folds(build_features(task, emb), seed=seed)


class TestCrossValidate:
    def test_each_fold_tested_once(self):
        ds = _folded_dataset()
        report = cross_validate(ds, "logreg", grid={"C": [1.0]})
        assert len(report.fold_accuracies) == 4
        assert len(report.best_params) == 4
        # Pooled confusion counts every item exactly once.
        assert int(np.sum(report.confusion)) == ds.n

    def test_mean_accuracy_is_fold_mean(self):
        report = cross_validate(_folded_dataset(), "logreg", grid={"C": [1.0]})
        np.testing.assert_allclose(
            report.mean_accuracy, np.mean(report.fold_accuracies), atol=1e-15)

    def test_item_probs_cover_all_items_for_logreg(self):
        ds = _folded_dataset()
        report = cross_validate(ds, "logreg", grid={"C": [1.0]})
        assert report.item_probs is not None
        names = sorted(item for item, _ in report.item_probs)
        assert names == sorted(ds.items)
        for _, probs in report.item_probs:
            assert len(probs) == 2
            np.testing.assert_allclose(sum(probs), 1.0, atol=1e-9)

    def test_svm_has_no_item_probs(self):
        report = cross_validate(_folded_dataset(), "svm-rbf",
                                grid={"C": [1.0], "gamma": [0.5]})
        assert report.item_probs is None

    def test_separable_dataset_scores_high(self):
        report = cross_validate(_folded_dataset(), "logreg", grid={"C": [10.0]})
        assert report.mean_accuracy >= 0.9
        assert report.macro_f1 >= 0.9

    def test_provenance_copied_into_report(self):
        report = cross_validate(_folded_dataset(), "logreg", grid={"C": [1.0]})
        assert report.embedding == "e"
        assert report.task == "t"
        assert report.mode == "term"
        assert report.reduction == "none"
        assert report.classes == ("neg", "pos")

    def test_to_dict_round_trips_fields(self):
        report = cross_validate(_folded_dataset(), "logreg", grid={"C": [1.0]})
        data = report.to_dict()
        assert data["mean_accuracy"] == report.mean_accuracy
        assert len(data["item_probs"]) == len(report.item_probs)
        assert data["confusion"] == [list(r) for r in report.confusion]

    def test_requires_assigned_folds(self):
        emb = EmbeddingSet.from_dict(
            "e", {f"w{i}": [float(i), 1.0] for i in range(8)})
        task = LabeledTask("t", "term", ("a", "b"),
                           tuple((f"w{i}", i % 2) for i in range(8)))
        unfolded = build_features(task, emb)
        with pytest.raises(TrainingError, match="unassigned folds"):
            cross_validate(unfolded, "logreg")

    def test_unknown_classifier(self):
        with pytest.raises(TrainingError, match="unknown classifier"):
            cross_validate(_folded_dataset(), "forest")

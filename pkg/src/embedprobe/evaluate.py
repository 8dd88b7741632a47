"""Grid search, 4-fold cross-validation, and scoring.

Folds rotate: fold i is the test set, fold (i+1) mod 4 the dev set, the
other two the training set, so every item is tested exactly once and
hyperparameters are always chosen on data disjoint from both train and
test.  The split is 50% train / 25% dev / 25% test per rotation.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from . import logreg, svm
from .errors import EmbedprobeError, TrainingError
from .tasks import NUM_FOLDS, Dataset

CLASSIFIERS = ("logreg", "svm-rbf")

LOGREG_C_GRID = (0.01, 0.1, 1.0, 10.0, 100.0)
SVM_C_GRID = (0.1, 1.0, 10.0, 100.0)
# Gamma values are relative: they get divided by the feature dimension at
# fit time so one grid serves embeddings of any width.
SVM_GAMMA_GRID = (2.0 ** -7, 2.0 ** -5, 2.0 ** -3, 2.0 ** -1, 2.0)


def default_grid(classifier: str) -> dict:
    if classifier == "logreg":
        return {"C": list(LOGREG_C_GRID)}
    if classifier == "svm-rbf":
        return {"C": list(SVM_C_GRID), "gamma": list(SVM_GAMMA_GRID)}
    raise TrainingError(f"unknown classifier {classifier!r}")


def _grid_points(classifier: str, grid: dict | None) -> list[dict]:
    grid = grid or default_grid(classifier)
    if classifier == "logreg":
        return [{"C": float(c)} for c in sorted(grid["C"])]
    points = []
    for c in sorted(grid["C"]):
        for g in sorted(grid["gamma"]):
            points.append({"C": float(c), "gamma": float(g)})
    return points


def _fit(classifier: str, features: np.ndarray, labels: np.ndarray,
         params: dict, seed: int):
    if classifier == "logreg":
        return logreg.train_logreg(features, labels, C=params["C"], seed=seed)
    if classifier == "svm-rbf":
        gamma = params["gamma"] / features.shape[1]
        return svm.train_svm_rbf(features, labels, C=params["C"],
                                 gamma=gamma, seed=seed)
    raise TrainingError(f"unknown classifier {classifier!r}")


def _predict(classifier: str, model, features: np.ndarray) -> np.ndarray:
    if classifier == "logreg":
        return logreg.predict(model, features)
    return svm.predict(model, features)


def grid_search(classifier: str, train_x: np.ndarray, train_y: np.ndarray,
                dev_x: np.ndarray, dev_y: np.ndarray, grid: dict | None = None,
                seed: int = 0) -> dict:
    """Pick the grid point with the best dev accuracy.

    Ties go to the smaller C, then the smaller gamma, so the winner does
    not depend on grid ordering.  Grid points whose training fails are
    skipped with a warning; if all of them fail, TrainingError propagates.
    """
    best_params: dict | None = None
    best_key: tuple | None = None
    failures = []
    for params in _grid_points(classifier, grid):
        try:
            model = _fit(classifier, train_x, train_y, params, seed)
        except EmbedprobeError as exc:
            failures.append(f"{params}: {exc}")
            warnings.warn(f"grid point {params} failed: {exc}", stacklevel=2)
            continue
        acc = float(np.mean(_predict(classifier, model, dev_x) == dev_y))
        key = (acc, -params["C"], -params.get("gamma", 0.0))
        if best_key is None or key > best_key:
            best_key, best_params = key, params
    if best_params is None:
        raise TrainingError(
            "every grid point failed to train: " + "; ".join(failures))
    return best_params


@dataclass
class EvalReport:
    """Cross-validated result for one (embedding, task, classifier,
    reduction) cell."""

    embedding: str
    task: str
    mode: str
    classifier: str
    reduction: str
    classes: tuple[str, ...]
    fold_accuracies: tuple[float, ...]
    mean_accuracy: float
    macro_f1: float
    best_params: tuple[dict, ...]
    confusion: tuple[tuple[int, ...], ...]
    n_items: int
    n_dropped: int
    # (item-as-string, [p(class_0), ...]) per test item; logreg only.
    item_probs: tuple[tuple[str, tuple[float, ...]], ...] | None = field(
        default=None, repr=False)

    def to_dict(self) -> dict:
        out = {
            "embedding": self.embedding,
            "task": self.task,
            "mode": self.mode,
            "classifier": self.classifier,
            "reduction": self.reduction,
            "classes": list(self.classes),
            "fold_accuracies": list(self.fold_accuracies),
            "mean_accuracy": self.mean_accuracy,
            "macro_f1": self.macro_f1,
            "best_params": [dict(p) for p in self.best_params],
            "confusion": [list(row) for row in self.confusion],
            "n_items": self.n_items,
            "n_dropped": self.n_dropped,
        }
        if self.item_probs is not None:
            out["item_probs"] = [
                {"item": item, "probs": list(probs)}
                for item, probs in self.item_probs
            ]
        return out


def _item_str(item) -> str:
    return item if isinstance(item, str) else f"{item[0]} {item[1]}"


def cross_validate(dataset: Dataset, classifier: str, grid: dict | None = None,
                   seed: int = 0) -> EvalReport:
    """Run the full 4-fold protocol on a fold-assigned dataset."""
    if classifier not in CLASSIFIERS:
        raise TrainingError(f"unknown classifier {classifier!r}")
    if not dataset.folds_assigned():
        raise TrainingError("dataset has unassigned folds; call make_folds first")
    n_classes = len(dataset.classes)
    confusion = np.zeros((n_classes, n_classes), dtype=np.int64)
    fold_accs = []
    best_list = []
    probs_out: list[tuple[str, tuple[float, ...]]] = []

    for test_fold in range(NUM_FOLDS):
        dev_fold = (test_fold + 1) % NUM_FOLDS
        test_m = dataset.fold_of == test_fold
        dev_m = dataset.fold_of == dev_fold
        train_m = ~(test_m | dev_m)
        train_x, train_y = dataset.features[train_m], dataset.labels[train_m]
        best = grid_search(classifier, train_x, train_y,
                           dataset.features[dev_m], dataset.labels[dev_m],
                           grid=grid, seed=seed)
        model = _fit(classifier, train_x, train_y, best, seed)
        test_x, test_y = dataset.features[test_m], dataset.labels[test_m]
        pred = _predict(classifier, model, test_x)
        fold_accs.append(float(np.mean(pred == test_y)))
        best_list.append(best)
        for truth, guess in zip(test_y, pred):
            confusion[truth, guess] += 1
        if classifier == "logreg":
            probs = logreg.predict_proba(model, test_x)
            for row_idx, item_idx in enumerate(np.flatnonzero(test_m)):
                probs_out.append((
                    _item_str(dataset.items[item_idx]),
                    tuple(float(p) for p in probs[row_idx]),
                ))

    scores = metrics(confusion)
    return EvalReport(
        embedding=dataset.provenance.embedding,
        task=dataset.provenance.task,
        mode=dataset.provenance.mode,
        classifier=classifier,
        reduction=dataset.provenance.reduction,
        classes=dataset.classes,
        fold_accuracies=tuple(fold_accs),
        mean_accuracy=float(np.mean(fold_accs)),
        macro_f1=scores.macro_f1,
        best_params=tuple(best_list),
        confusion=tuple(tuple(int(v) for v in row) for row in confusion),
        n_items=dataset.n,
        n_dropped=dataset.n_dropped,
        item_probs=tuple(probs_out) if classifier == "logreg" else None,
    )


@dataclass(frozen=True)
class MetricsResult:
    accuracy: float
    macro_f1: float
    precision: tuple[float, ...]
    recall: tuple[float, ...]
    f1: tuple[float, ...]


def metrics(confusion) -> MetricsResult:
    """Accuracy, per-class precision/recall/F1 and macro-F1 from a
    confusion matrix (rows = truth, columns = prediction).

    Any zero denominator yields 0 for that statistic rather than an error,
    so classes the classifier never predicts simply score 0.
    """
    conf = np.asarray(confusion, dtype=np.int64)
    if conf.ndim != 2 or conf.shape[0] != conf.shape[1]:
        raise ValueError("confusion matrix must be square")
    total = conf.sum()
    if total == 0:
        raise ValueError("confusion matrix is all zeros")
    accuracy = float(np.trace(conf) / total)
    precision, recall, f1 = [], [], []
    for c in range(conf.shape[0]):
        tp = conf[c, c]
        pred_c = conf[:, c].sum()
        true_c = conf[c, :].sum()
        p = float(tp / pred_c) if pred_c else 0.0
        r = float(tp / true_c) if true_c else 0.0
        f = 2 * p * r / (p + r) if (p + r) else 0.0
        precision.append(p)
        recall.append(r)
        f1.append(f)
    return MetricsResult(
        accuracy=accuracy,
        macro_f1=float(np.mean(f1)),
        precision=tuple(precision),
        recall=tuple(recall),
        f1=tuple(f1),
    )


def geometric_mean(values) -> float:
    """exp(mean(log v)); every value must be strictly positive."""
    arr = np.asarray(list(values), dtype=np.float64)
    if arr.size == 0:
        raise ValueError("geometric mean of no values")
    if np.any(arr <= 0):
        raise ValueError("geometric mean requires strictly positive values")
    return float(np.exp(np.mean(np.log(arr))))

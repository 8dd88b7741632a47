"""Balanced term and pair classification tasks, and their feature matrices.

Task files are tab-separated UTF-8, one item per line, ``#`` comments
allowed::

    word<TAB>label            (term tasks)
    word1<TAB>word2<TAB>label (pair tasks)

Every loaded task is balanced: each class is subsampled without
replacement down to the smallest class count, so the chance baseline of a
downstream classifier is 1/num_classes.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .embeddings import EmbeddingSet
from .errors import DatasetError, TaskFormatError

TermItem = str
PairItem = tuple[str, str]
Item = TermItem | PairItem

NUM_FOLDS = 4


@dataclass(frozen=True)
class LabeledTask:
    """A term task (word -> class) or pair task ((word, word) -> class)."""

    name: str
    mode: str  # "term" | "pair"
    classes: tuple[str, ...]
    items: tuple[tuple[Item, int], ...]

    def __post_init__(self) -> None:
        if self.mode not in ("term", "pair"):
            raise TaskFormatError(f"unknown task mode {self.mode!r}")
        if not 2 <= len(self.classes) <= 3:
            raise TaskFormatError("tasks need 2 or 3 classes")
        if len(set(self.classes)) != len(self.classes):
            raise TaskFormatError("class labels must be unique")
        seen: set[tuple[Item, int]] = set()
        for item, cls in self.items:
            if not 0 <= cls < len(self.classes):
                raise TaskFormatError(f"class index {cls} out of range")
            if (item, cls) in seen:
                raise TaskFormatError(f"duplicate item {item!r} in class {cls}")
            seen.add((item, cls))
            if self.mode == "pair" and item[0] == item[1]:
                raise TaskFormatError(f"pair with identical words: {item!r}")

    def class_counts(self) -> list[int]:
        counts = [0] * len(self.classes)
        for _, cls in self.items:
            counts[cls] += 1
        return counts


@dataclass(frozen=True)
class DataProvenance:
    task: str
    embedding: str
    reduction: str
    mode: str


@dataclass(frozen=True)
class Dataset:
    """Numeric feature matrix + labels + fold assignments for one task.

    ``fold_of`` is -1 until :func:`make_folds` assigns folds.  ``items``
    records which task item produced each row, in row order, so reports can
    attach per-item probabilities.
    """

    features: np.ndarray
    labels: np.ndarray
    fold_of: np.ndarray
    provenance: DataProvenance
    classes: tuple[str, ...]
    items: tuple[Item, ...] = field(repr=False)
    n_dropped: int = 0

    def __post_init__(self) -> None:
        for arr in (self.features, self.labels, self.fold_of):
            arr.setflags(write=False)
        n = self.features.shape[0]
        if not (len(self.labels) == len(self.fold_of) == len(self.items) == n):
            raise DatasetError("features, labels, folds and items disagree in length")

    @property
    def n(self) -> int:
        return self.features.shape[0]

    @property
    def dim(self) -> int:
        return self.features.shape[1]

    def folds_assigned(self) -> bool:
        return bool(np.all(self.fold_of >= 0))


def _read_rows(path: str | Path, n_fields: int) -> list[list[str]]:
    path = Path(path)
    if not path.exists():
        raise TaskFormatError(f"task file not found: {path}")
    rows = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\r\n")
            if not line.strip() or line.startswith("#"):
                continue
            fields = line.split("\t")
            if len(fields) != n_fields or any(not f for f in fields):
                raise TaskFormatError(
                    f"{path}:{lineno}: expected {n_fields} tab-separated "
                    f"fields, got {line!r}")
            rows.append(fields)
    return rows


def _index_labels(rows: list[list[str]], classes: tuple[str, ...],
                  path: str | Path) -> list[int]:
    class_index = {c: i for i, c in enumerate(classes)}
    out = []
    for fields in rows:
        label = fields[-1]
        if label not in class_index:
            raise TaskFormatError(
                f"{path}: unknown label {label!r}, expected one of {list(classes)}")
        out.append(class_index[label])
    return out


def _dedupe(items: list[tuple[Item, int]]) -> list[tuple[Item, int]]:
    seen: set[tuple[Item, int]] = set()
    out = []
    for entry in items:
        if entry not in seen:
            seen.add(entry)
            out.append(entry)
    return out


def load_term_task(path: str | Path, classes: list[str] | tuple[str, ...],
                   seed: int = 0, name: str | None = None) -> LabeledTask:
    """Load a ``word<TAB>label`` file into a balanced term task."""
    rows = _read_rows(path, 2)
    labels = _index_labels(rows, tuple(classes), path)
    items = _dedupe([(fields[0], cls) for fields, cls in zip(rows, labels)])
    task = LabeledTask(name or Path(path).stem, "term", tuple(classes), tuple(items))
    return balance_classes(task, seed)


def load_pair_task(path: str | Path, classes: list[str] | tuple[str, ...],
                   symmetric: bool = False, seed: int = 0,
                   name: str | None = None) -> LabeledTask:
    """Load a ``word1<TAB>word2<TAB>label`` file into a balanced pair task.

    With ``symmetric=True`` every pair (a, b) also contributes its
    order-reversed counterpart (b, a) with the same class, before balancing.
    Used for relations that hold in both directions (synonymy, antonymy).
    """
    rows = _read_rows(path, 3)
    labels = _index_labels(rows, tuple(classes), path)
    items: list[tuple[Item, int]] = []
    for fields, cls in zip(rows, labels):
        pair = (fields[0], fields[1])
        items.append((pair, cls))
        if symmetric:
            items.append(((pair[1], pair[0]), cls))
    items = _dedupe(items)
    task = LabeledTask(name or Path(path).stem, "pair", tuple(classes), tuple(items))
    return balance_classes(task, seed)


def balance_classes(task: LabeledTask, seed: int = 0) -> LabeledTask:
    """Subsample every class down to the smallest class count.

    Which surplus items get dropped is decided by a seeded shuffle; the
    retained items keep their original relative order, so the result is
    deterministic for a given seed.
    """
    counts = task.class_counts()
    if min(counts) == 0:
        empty = task.classes[counts.index(0)]
        raise TaskFormatError(f"task {task.name!r}: class {empty!r} has no items")
    target = min(counts)
    rng = np.random.default_rng(seed)
    keep: set[int] = set()
    for cls in range(len(task.classes)):
        idx = [i for i, (_, c) in enumerate(task.items) if c == cls]
        chosen = rng.permutation(len(idx))[:target]
        keep.update(idx[j] for j in chosen)
    items = tuple(entry for i, entry in enumerate(task.items) if i in keep)
    return replace(task, items=items)


def sample_unrelated_pairs(vocab, n: int, exclusions, seed: int = 0,
                           max_attempts_per_pair: int = 1000) -> list[PairItem]:
    """Draw n distinct word pairs that stand in no known relation.

    Sampling is rejection-based over the (sorted) vocabulary: self-pairs
    are rejected, and a pair is rejected when it or its reverse appears in
    ``exclusions`` or among pairs already drawn.  Raises DatasetError when
    the attempt budget (1000 per requested pair) runs out, which signals an
    infeasible request rather than bad luck.
    """
    if n == 0:
        return []
    words = sorted(vocab)
    if len(words) < 2:
        raise DatasetError("vocabulary too small to sample pairs")
    excluded = {frozenset(p) for p in exclusions}
    rng = np.random.default_rng(seed)
    out: list[PairItem] = []
    chosen: set[frozenset] = set()
    attempts = 0
    budget = max_attempts_per_pair * n
    while len(out) < n:
        if attempts >= budget:
            raise DatasetError(
                f"could not sample {n} unrelated pairs in {budget} attempts")
        attempts += 1
        i, j = rng.integers(0, len(words), size=2)
        if i == j:
            continue
        key = frozenset((words[i], words[j]))
        if key in excluded or key in chosen:
            continue
        chosen.add(key)
        out.append((words[i], words[j]))
    return out


def build_features(task: LabeledTask, emb: EmbeddingSet,
                   reduction: str = "none") -> Dataset:
    """Turn a task into a feature matrix over one embedding set.

    Term rows are the word's vector; pair rows are the two word vectors
    concatenated (first word first).  Items with any out-of-vocabulary word
    are dropped, and classes are then re-trimmed to equal counts (earliest
    items kept) so the chance baseline survives vocabulary filtering.
    ``n_dropped`` counts both OOV drops and rebalance drops.
    """
    rows: list[np.ndarray] = []
    labels: list[int] = []
    kept_items: list[Item] = []
    for item, cls in task.items:
        if task.mode == "term":
            vec = emb.lookup(item)
            if vec is None:
                continue
            rows.append(vec)
        else:
            v1, v2 = emb.lookup(item[0]), emb.lookup(item[1])
            if v1 is None or v2 is None:
                continue
            rows.append(np.concatenate([v1, v2]))
        labels.append(cls)
        kept_items.append(item)

    if not rows:
        raise DatasetError(
            f"task {task.name!r}: no items left after vocabulary filtering "
            f"against {emb.name!r}")

    counts = [labels.count(c) for c in range(len(task.classes))]
    target = min(counts)
    if target == 0:
        raise DatasetError(
            f"task {task.name!r}: a class lost all items to vocabulary filtering")
    quota = {c: target for c in range(len(task.classes))}
    selected = []
    for i, cls in enumerate(labels):
        if quota[cls] > 0:
            quota[cls] -= 1
            selected.append(i)

    features = np.array([rows[i] for i in selected], dtype=np.float64)
    label_arr = np.array([labels[i] for i in selected], dtype=np.int64)
    items = tuple(kept_items[i] for i in selected)
    return Dataset(
        features=features,
        labels=label_arr,
        fold_of=np.full(len(selected), -1, dtype=np.int64),
        provenance=DataProvenance(task.name, emb.name, reduction, task.mode),
        classes=task.classes,
        items=items,
        n_dropped=len(task.items) - len(selected),
    )


def make_folds(dataset: Dataset, seed: int = 0) -> Dataset:
    """Assign rows to 4 stratified folds with a seeded shuffle per class.

    Items of each class are dealt cyclically across folds from a running
    global offset, which keeps fold sizes within one item of n/4 and each
    fold's class counts within one item of the class share.
    """
    n = dataset.n
    if n < 2 * NUM_FOLDS:
        raise DatasetError(f"need at least {2 * NUM_FOLDS} items to fold, got {n}")
    rng = np.random.default_rng(seed)
    fold_of = np.full(n, -1, dtype=np.int64)
    position = 0
    for cls in range(len(dataset.classes)):
        idx = np.flatnonzero(dataset.labels == cls)
        idx = idx[rng.permutation(len(idx))]
        for row in idx:
            fold_of[row] = position % NUM_FOLDS
            position += 1
    return replace(dataset, fold_of=fold_of)

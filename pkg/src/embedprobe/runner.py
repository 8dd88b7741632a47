"""Experiment matrix runner: config parsing, execution, report emission.

A run is the cross product (embedding x task x classifier x reduction).
Cells are independent: one cell failing to train is recorded and skipped,
never fatal.  Load errors (embeddings, tasks) abort before any cell runs.

Randomness policy: everything derives from the single config seed.  Each
consumer XORs the seed with a stable hash of its cell key:

    task balancing   seed ^ hash("task|<task>")
    fold assignment  seed ^ hash("data|<embedding>|<task>")
    training cell    seed ^ hash("cell|<embedding>|<task>|<classifier>|<reduction>")

The fold key omits classifier and reduction on purpose: reductions keep
the vocabulary (hence the row set) intact, so every classifier and every
reduction of one (embedding, task) pair is evaluated on identical splits,
making cells directly comparable.  The stable hash is the first 8 bytes
of SHA-256, so a seed never depends on process state.
"""

from __future__ import annotations

import hashlib
import json
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from . import reduce as reduce_mod
from .embeddings import EmbeddingSet, intersect_vocab, load_embeddings
from .errors import ConfigError, EmbedprobeError
from .evaluate import CLASSIFIERS, EvalReport, cross_validate, geometric_mean
from .tasks import build_features, load_pair_task, load_term_task, make_folds

DEFAULT_SEED = 42
DEFAULT_OUTPUT_DIR = "results"


@dataclass(frozen=True)
class EmbeddingSpec:
    name: str
    path: str
    collapse: bool = False


@dataclass(frozen=True)
class TaskSpec:
    name: str
    path: str
    mode: str  # "term" | "pair"
    classes: tuple[str, ...]
    symmetric: bool = False


@dataclass
class ExperimentConfig:
    embeddings: list[EmbeddingSpec]
    tasks: list[TaskSpec]
    classifiers: list[str]
    reductions: list[str] = field(default_factory=lambda: ["none"])
    intersect: bool = False
    seed: int = DEFAULT_SEED
    grids: dict | None = None
    output_dir: str = DEFAULT_OUTPUT_DIR


def stable_hash(key: str) -> int:
    """First 8 bytes of SHA-256, big-endian; stable across processes."""
    return int.from_bytes(hashlib.sha256(key.encode("utf-8")).digest()[:8], "big")


def derive_seed(seed: int, key: str) -> int:
    return (seed ^ stable_hash(key)) & (2 ** 63 - 1)


def _require_keys(data: dict, allowed: set[str], required: set[str],
                  context: str) -> None:
    if not isinstance(data, dict):
        raise ConfigError(f"{context}: expected an object")
    unknown = set(data) - allowed
    if unknown:
        raise ConfigError(f"{context}: unknown keys {sorted(unknown)}")
    missing = required - set(data)
    if missing:
        raise ConfigError(f"{context}: missing required keys {sorted(missing)}")


def _positive_numbers(values, context: str) -> list[float]:
    if not isinstance(values, list) or not values:
        raise ConfigError(f"{context}: expected a non-empty list of numbers")
    out = []
    for v in values:
        if not isinstance(v, (int, float)) or isinstance(v, bool) or v <= 0:
            raise ConfigError(f"{context}: values must be positive numbers, got {v!r}")
        out.append(float(v))
    return out


def _validate_grids(grids, context: str) -> dict | None:
    if grids is None:
        return None
    _require_keys(grids, {"logreg", "svm-rbf"}, set(), context)
    out = {}
    if "logreg" in grids:
        _require_keys(grids["logreg"], {"C"}, {"C"}, f"{context}.logreg")
        out["logreg"] = {"C": _positive_numbers(grids["logreg"]["C"],
                                                f"{context}.logreg.C")}
    if "svm-rbf" in grids:
        _require_keys(grids["svm-rbf"], {"C", "gamma"}, {"C", "gamma"},
                      f"{context}.svm-rbf")
        out["svm-rbf"] = {
            "C": _positive_numbers(grids["svm-rbf"]["C"], f"{context}.svm-rbf.C"),
            "gamma": _positive_numbers(grids["svm-rbf"]["gamma"],
                                       f"{context}.svm-rbf.gamma"),
        }
    return out


def validate_config(data: dict, base_dir: str | Path | None = None) -> ExperimentConfig:
    """Validate a config mapping; unknown keys anywhere are errors.

    When ``base_dir`` is given, relative paths (embeddings, tasks,
    output_dir) are resolved against it; parse_config passes the config
    file's directory so configs are position-independent.
    """
    _require_keys(
        data,
        {"embeddings", "tasks", "classifiers", "reductions", "intersect",
         "seed", "grids", "output_dir"},
        {"embeddings", "tasks", "classifiers"},
        "config")

    def _path(p) -> str:
        if not isinstance(p, str) or not p:
            raise ConfigError(f"config: path must be a non-empty string, got {p!r}")
        if base_dir is not None and not Path(p).is_absolute():
            return str(Path(base_dir) / p)
        return p

    if not isinstance(data["embeddings"], list) or not data["embeddings"]:
        raise ConfigError("config: embeddings must be a non-empty list")
    embeddings = []
    for entry in data["embeddings"]:
        _require_keys(entry, {"name", "path", "collapse"}, {"name", "path"},
                      "config.embeddings[]")
        embeddings.append(EmbeddingSpec(
            name=str(entry["name"]),
            path=_path(entry["path"]),
            collapse=bool(entry.get("collapse", False)),
        ))
    if len({e.name for e in embeddings}) != len(embeddings):
        raise ConfigError("config: embedding names must be unique")

    if not isinstance(data["tasks"], list) or not data["tasks"]:
        raise ConfigError("config: tasks must be a non-empty list")
    tasks = []
    for entry in data["tasks"]:
        _require_keys(entry, {"name", "path", "mode", "classes", "symmetric"},
                      {"name", "path", "mode", "classes"}, "config.tasks[]")
        if entry["mode"] not in ("term", "pair"):
            raise ConfigError(f"config: task mode must be term or pair, "
                              f"got {entry['mode']!r}")
        classes = entry["classes"]
        if not isinstance(classes, list) or not 2 <= len(classes) <= 3:
            raise ConfigError("config: tasks need 2 or 3 classes")
        tasks.append(TaskSpec(
            name=str(entry["name"]),
            path=_path(entry["path"]),
            mode=entry["mode"],
            classes=tuple(str(c) for c in classes),
            symmetric=bool(entry.get("symmetric", False)),
        ))
    if len({t.name for t in tasks}) != len(tasks):
        raise ConfigError("config: task names must be unique")

    classifiers = data["classifiers"]
    if not isinstance(classifiers, list) or not classifiers:
        raise ConfigError("config: classifiers must be a non-empty list")
    for c in classifiers:
        if c not in CLASSIFIERS:
            raise ConfigError(
                f"config: unknown classifier {c!r}, expected one of {list(CLASSIFIERS)}")
    if len(set(classifiers)) != len(classifiers):
        raise ConfigError("config: classifiers must be unique")

    reductions = data.get("reductions", ["none"])
    if not isinstance(reductions, list) or not reductions:
        raise ConfigError("config: reductions must be a non-empty list")
    for r in reductions:
        try:
            reduce_mod.parse_spec(r)
        except EmbedprobeError as exc:
            raise ConfigError(f"config: bad reduction {r!r}: {exc}") from exc
    if len(set(reductions)) != len(reductions):
        raise ConfigError("config: reductions must be unique")

    seed = data.get("seed", DEFAULT_SEED)
    if not isinstance(seed, int) or isinstance(seed, bool):
        raise ConfigError(f"config: seed must be an integer, got {seed!r}")

    intersect = data.get("intersect", len(embeddings) > 1)
    if not isinstance(intersect, bool):
        raise ConfigError("config: intersect must be a boolean")

    return ExperimentConfig(
        embeddings=embeddings,
        tasks=tasks,
        classifiers=list(classifiers),
        reductions=[str(r) for r in reductions],
        intersect=intersect,
        seed=seed,
        grids=_validate_grids(data.get("grids"), "config.grids"),
        output_dir=_path(data.get("output_dir", DEFAULT_OUTPUT_DIR)),
    )


def parse_config(path: str | Path) -> ExperimentConfig:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc
    return validate_config(data, base_dir=path.parent)


@dataclass(frozen=True)
class CellError:
    cell: str
    message: str


@dataclass
class RunMatrixResult:
    reports: list[EvalReport]
    errors: list[CellError]
    aggregates: dict

    @property
    def ok(self) -> bool:
        return not self.errors


def _cell_key(emb: str, task: str, classifier: str, reduction: str) -> str:
    return f"{emb}|{task}|{classifier}|{reduction}"


def _aggregate(reports: list[EvalReport]) -> dict:
    """Geometric means across classifiers, then across tasks.

    Only completed cells contribute; rows name exactly what went in so
    partial coverage is visible.  A zero accuracy makes the geometric mean
    undefined; such rows carry null and a note.
    """
    by_etr: dict[tuple, dict] = {}
    for rep in reports:
        by_etr.setdefault((rep.embedding, rep.task, rep.reduction), {})[
            rep.classifier] = rep.mean_accuracy
    across_classifiers = []
    for (emb, task, red), accs in sorted(by_etr.items()):
        row = {"embedding": emb, "task": task, "reduction": red,
               "classifiers": sorted(accs),
               "arith_mean_accuracy": sum(accs.values()) / len(accs)}
        try:
            row["geo_mean_accuracy"] = geometric_mean(accs.values())
        except ValueError:
            row["geo_mean_accuracy"] = None
            row["note"] = "zero accuracy; geometric mean undefined"
        across_classifiers.append(row)

    by_er: dict[tuple, dict] = {}
    for row in across_classifiers:
        if row["geo_mean_accuracy"] is not None:
            by_er.setdefault((row["embedding"], row["reduction"]), {})[
                row["task"]] = row["geo_mean_accuracy"]
    across_tasks = []
    for (emb, red), per_task in sorted(by_er.items()):
        across_tasks.append({
            "embedding": emb, "reduction": red, "tasks": sorted(per_task),
            "geo_mean_accuracy": geometric_mean(per_task.values()),
            "arith_mean_accuracy": sum(per_task.values()) / len(per_task),
        })
    return {"across_classifiers": across_classifiers,
            "across_tasks": across_tasks}


def run_experiment(config: ExperimentConfig, workers: int = 1) -> RunMatrixResult:
    """Execute the matrix; any load error aborts, cell errors accumulate.

    Workers only control scheduling.  Each cell trains sequentially from
    its own derived seed, and results are sorted before assembly, so the
    output is identical for any worker count.
    """
    if workers < 1:
        raise ConfigError(f"workers must be >= 1, got {workers}")

    loaded: list[EmbeddingSet] = [
        load_embeddings(spec.path, collapse=spec.collapse, name=spec.name)
        for spec in config.embeddings
    ]
    if config.intersect and len(loaded) > 1:
        loaded = intersect_vocab(loaded)
    emb_by_name = {e.name: e for e in loaded}

    tasks = {}
    for spec in config.tasks:
        task_seed = derive_seed(config.seed, f"task|{spec.name}")
        if spec.mode == "term":
            tasks[spec.name] = load_term_task(
                spec.path, spec.classes, seed=task_seed, name=spec.name)
        else:
            tasks[spec.name] = load_pair_task(
                spec.path, spec.classes, symmetric=spec.symmetric,
                seed=task_seed, name=spec.name)

    errors: list[CellError] = []

    reduced: dict[tuple, EmbeddingSet | Exception] = {}
    for spec in config.embeddings:
        for red in config.reductions:
            try:
                reduced[(spec.name, red)] = reduce_mod.apply_pipeline(
                    emb_by_name[spec.name], red)
            except EmbedprobeError as exc:
                reduced[(spec.name, red)] = exc

    datasets: dict[tuple, object] = {}
    for spec in config.embeddings:
        for task_name, task in tasks.items():
            for red in config.reductions:
                emb = reduced[(spec.name, red)]
                if isinstance(emb, Exception):
                    datasets[(spec.name, task_name, red)] = emb
                    continue
                try:
                    ds = build_features(task, emb, reduction=red)
                    fold_seed = derive_seed(
                        config.seed, f"data|{spec.name}|{task_name}")
                    datasets[(spec.name, task_name, red)] = make_folds(ds, fold_seed)
                except EmbedprobeError as exc:
                    datasets[(spec.name, task_name, red)] = exc

    jobs = []
    for spec in config.embeddings:
        for task_name in tasks:
            for classifier in config.classifiers:
                for red in config.reductions:
                    key = _cell_key(spec.name, task_name, classifier, red)
                    ds = datasets[(spec.name, task_name, red)]
                    if isinstance(ds, Exception):
                        errors.append(CellError(key, str(ds)))
                        continue
                    grid = (config.grids or {}).get(classifier)
                    cell_seed = derive_seed(config.seed, f"cell|{key}")
                    jobs.append((key, ds, classifier, grid, cell_seed))

    def _run_cell(job) -> tuple[str, EvalReport | Exception]:
        key, ds, classifier, grid, cell_seed = job
        try:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                return key, cross_validate(ds, classifier, grid=grid, seed=cell_seed)
        except EmbedprobeError as exc:
            return key, exc

    if workers == 1:
        outcomes = [_run_cell(job) for job in jobs]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(_run_cell, jobs))

    reports = []
    for key, outcome in outcomes:
        if isinstance(outcome, Exception):
            errors.append(CellError(key, str(outcome)))
        else:
            reports.append(outcome)

    reports.sort(key=lambda r: (r.embedding, r.task, r.classifier, r.reduction))
    errors.sort(key=lambda e: e.cell)
    return RunMatrixResult(reports=reports, errors=errors,
                           aggregates=_aggregate(reports))


def _safe_name(text: str) -> str:
    out = []
    for ch in text:
        if ch.isalnum() or ch in "._-":
            out.append(ch)
        elif ch == ":":
            out.append("-")
        elif ch == ",":
            out.append("+")
        else:
            out.append("_")
    return "".join(out)


def _fmt(value: float) -> str:
    return repr(float(value))


def _single_stage(reduction: str) -> tuple[str, str] | None:
    """(kind, param) when the reduction is plottable on a curve:
    none, a single truncate:<b>, or a single pca:<k>."""
    stages = reduce_mod.parse_spec(reduction)
    if len(stages) != 1 or stages[0].kind not in ("none", "truncate", "pca"):
        return None
    stage = stages[0]
    return stage.kind, "" if stage.param is None else str(stage.param)


def emit_reports(result: RunMatrixResult, output_dir: str | Path) -> list[str]:
    """Write results.json, summary.csv, curves.csv and per-cell rankings.

    Output is byte-identical across runs of the same config and seed: the
    reports arrive sorted, JSON keys are sorted, floats are written with
    repr (shortest round-trip form), and no timestamps are recorded.
    Returns the written paths.
    """
    import csv

    out = Path(output_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []

    payload = {
        "reports": [rep.to_dict() for rep in result.reports],
        "errors": [{"cell": e.cell, "message": e.message} for e in result.errors],
        "aggregates": result.aggregates,
    }
    results_path = out / "results.json"
    with open(results_path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
    written.append(str(results_path))

    summary_path = out / "summary.csv"
    with open(summary_path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow([
            "embedding", "task", "mode", "classifier", "reduction",
            "n_items", "n_dropped", "fold_0", "fold_1", "fold_2", "fold_3",
            "mean_accuracy", "macro_f1",
        ])
        for rep in result.reports:
            writer.writerow([
                rep.embedding, rep.task, rep.mode, rep.classifier,
                rep.reduction, rep.n_items, rep.n_dropped,
                *(_fmt(a) for a in rep.fold_accuracies),
                _fmt(rep.mean_accuracy), _fmt(rep.macro_f1),
            ])
    written.append(str(summary_path))

    curves_path = out / "curves.csv"
    with open(curves_path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["embedding", "task", "classifier", "reduction_kind",
                         "param", "mean_accuracy"])
        rows = []
        for rep in result.reports:
            plot = _single_stage(rep.reduction)
            if plot is not None:
                rows.append((rep.embedding, rep.task, rep.classifier,
                             plot[0], plot[1], _fmt(rep.mean_accuracy)))
        for agg in result.aggregates["across_classifiers"]:
            plot = _single_stage(agg["reduction"])
            if plot is not None and agg["geo_mean_accuracy"] is not None:
                rows.append((agg["embedding"], agg["task"], "geomean",
                             plot[0], plot[1], _fmt(agg["geo_mean_accuracy"])))
        rows.sort(key=lambda r: (r[0], r[1], r[2], r[3],
                                 int(r[4]) if r[4] else -1))
        writer.writerows(rows)
    written.append(str(curves_path))

    ranked = [rep for rep in result.reports if rep.item_probs]
    if ranked:
        rank_dir = out / "rankings"
        rank_dir.mkdir(exist_ok=True)
        for rep in ranked:
            name = _safe_name(_cell_key(rep.embedding, rep.task,
                                        rep.classifier, rep.reduction))
            path = rank_dir / f"{name}.csv"
            with open(path, "w", encoding="utf-8", newline="") as fh:
                writer = csv.writer(fh, lineterminator="\n")
                writer.writerow(["item", *(f"p_{c}" for c in rep.classes),
                                 "predicted"])
                ordered = sorted(rep.item_probs,
                                 key=lambda ip: (-ip[1][0], ip[0]))
                for item, probs in ordered:
                    best = rep.classes[max(range(len(probs)),
                                           key=probs.__getitem__)]
                    writer.writerow([item, *(_fmt(p) for p in probs), best])
            written.append(str(path))
    return written

"""End-to-end link prediction evaluations.

One *task* fixes a dataset, a method, the setup (``LP1`` tunes the method
hyperparameters over a grid, ``LP2`` keeps defaults; both tune the
node-pair operator), the embedding dimension, the train fraction, the
split strategy, the classifier and the number of repeats. Each repeat
splits the graph with seed ``base + repeat``, fits features on the train
graph only and records the test AUC-ROC together with per-stage
wall-clock times.
"""

from __future__ import annotations

import csv
import io
import itertools
import json
import logging
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace

import numpy as np
from sklearn.preprocessing import StandardScaler

from ._utils import as_rng
from .embeddings import make_embedder
from .graph import Graph, load_edge_list, main_connected_component
from .heuristics import HeuristicKind, heuristic_score, ne_heuristics_features
from .metrics import auc_roc
from .prediction import CLASSIFIERS, OPERATORS, PairOperator, apply_operator, make_classifier
from .split import STRATEGIES, EdgeSplit, LeakageError, check_no_leakage, make_split, validation_split

__all__ = [
    "DatasetSpec", "MethodSpec", "EvalTask", "RepeatResult", "ResultRecord", "TuneResult",
    "StageError", "TuningError", "DEFAULT_GRIDS", "SETUPS", "CSV_COLUMNS",
    "load_dataset", "evaluate_method", "evaluate_split", "tune_grid", "expand_grid",
    "run_experiment", "run_tasks", "ResultsStore", "assert_train_only",
]

log = logging.getLogger(__name__)

SETUPS = ("LP1", "LP2")
HEURISTICS = tuple(k.value for k in HeuristicKind) + ("NE_heuristics",)

#: LP1 grids; tied parameters share one axis (e.g. num_walks = walk_len)
DEFAULT_GRIDS = {
    "node2vec": ((("num_walks", "walk_len"), (5, 10, 20, 40, 80)),
                 (("window",), (5, 10, 20)),
                 (("p", "q"), (0.5, 1.0, 2.0))),
    "deepwalk": ((("num_walks", "walk_len"), (5, 10, 20, 40, 80)),
                 (("window",), (5, 10, 20))),
    "line": ((("rho",), (0.01, 0.025)),
             (("negative_ratio",), (5, 10))),
    "gf": (),
    "le": (),
}

CSV_COLUMNS = ("dataset", "method", "setup", "strategy", "d", "f", "classifier", "repeat",
               "operator", "hyperparams", "val_auc", "test_auc", "split_s", "embed_s",
               "tune_s", "predict_s")


class StageError(RuntimeError):
    """A pipeline stage failed; ``stage`` names it."""

    def __init__(self, stage, cause):
        super().__init__(f"{stage} stage failed: {type(cause).__name__}: {cause}")
        self.stage = stage
        self.cause = cause


class TuningError(RuntimeError):
    def __init__(self, failures):
        lines = "; ".join(f"{p}: {type(e).__name__}: {e}" for p, e in failures)
        super().__init__(f"all {len(failures)} grid candidates failed ({lines})")
        self.failures = failures


# -- task description --------------------------------------------------

@dataclass(frozen=True)
class DatasetSpec:
    name: str
    path: str
    timestamped: bool = False


@dataclass(frozen=True)
class MethodSpec:
    """A heuristic, a native embedding method or an external program.

    ``params`` and ``grid`` are stored as tuples so that specs stay
    hashable; ``grid`` holds ``(names, values)`` axes where several names
    on one axis are tied to the same value.
    """

    name: str
    kind: str = "heuristic"
    algorithm: str | None = None
    params: tuple = ()
    grid: tuple | None = None
    command: str | None = None
    timeout: float | None = None

    def __post_init__(self):
        if self.kind not in ("heuristic", "native", "external"):
            raise ValueError(f"unknown method kind {self.kind!r}")
        algo = self.algorithm or self.name
        if self.kind == "heuristic" and algo not in HEURISTICS:
            raise ValueError(f"unknown heuristic {algo!r}; choose from {', '.join(HEURISTICS)}")
        if self.kind == "external" and not self.command:
            raise ValueError(f"external method {self.name!r} needs a command")
        object.__setattr__(self, "algorithm", algo)
        if isinstance(self.params, dict):
            object.__setattr__(self, "params", tuple(sorted(self.params.items())))

    @property
    def param_dict(self) -> dict:
        return dict(self.params)

    def effective_grid(self, setup: str) -> tuple:
        if setup == "LP2" or self.kind != "native":
            return ()
        if self.grid is not None:
            return self.grid
        return DEFAULT_GRIDS.get(self.algorithm.lower(), ())


@dataclass(frozen=True)
class EvalTask:
    dataset: DatasetSpec
    method: MethodSpec
    setup: str = "LP2"
    d: int = 128
    f: float = 0.8
    strategy: str = "st"
    repeats: int = 3
    seed: int = 0
    classifier: str = "LRCV"
    operators: tuple = tuple(op.value for op in OPERATORS)
    exclude_test_from_train_nonedges: bool = False
    standardize_heuristics: bool = True

    def __post_init__(self):
        if self.setup not in SETUPS:
            raise ValueError(f"setup must be one of {SETUPS}, got {self.setup!r}")
        if self.strategy not in STRATEGIES:
            raise ValueError(f"strategy must be one of {STRATEGIES}, got {self.strategy!r}")
        if self.repeats < 1:
            raise ValueError("repeats must be >= 1")
        if self.d < 1:
            raise ValueError("d must be >= 1")
        if not 0.0 < self.f < 1.0:
            raise ValueError(f"f must lie in (0, 1), got {self.f}")
        if self.classifier.upper() not in CLASSIFIERS:
            raise ValueError(f"classifier must be one of {CLASSIFIERS}")
        ops = tuple(PairOperator(o).value for o in self.operators)
        if not ops:
            raise ValueError("need at least one operator")
        object.__setattr__(self, "operators", ops)

    @property
    def key(self) -> tuple:
        return (self.dataset.name, self.method.name, self.setup, self.strategy, int(self.d),
                float(self.f), self.classifier, int(self.seed))

    def label(self) -> str:
        return (f"{self.dataset.name}/{self.method.name} {self.setup} {self.strategy} "
                f"d={self.d} f={self.f} {self.classifier}")


@dataclass(frozen=True)
class RepeatResult:
    dataset: str
    method: str
    setup: str
    strategy: str
    d: int
    f: float
    classifier: str
    repeat: int
    seed: int
    operator: str = ""
    hyperparams: str = "{}"
    val_auc: float = math.nan
    test_auc: float = math.nan
    split_s: float = 0.0
    embed_s: float = 0.0
    tune_s: float = 0.0
    predict_s: float = 0.0
    status: str = "ok"
    error: str = ""
    node_loss: float = 0.0
    n_train_edges: int = 0
    n_test_edges: int = 0


@dataclass(frozen=True)
class ResultRecord:
    """Aggregate over the repeats of one task."""

    task: EvalTask
    repeats: tuple
    test_aucs: tuple
    mean_auc: float
    std_auc: float
    complete: bool

    @property
    def statuses(self) -> tuple:
        return tuple(r.status for r in self.repeats)


@dataclass(frozen=True)
class TuneResult:
    params: dict
    operator: str
    val_auc: float
    table: tuple = field(default=(), repr=False)


# -- data --------------------------------------------------------------

_DATA_CACHE: dict = {}


def load_dataset(spec: DatasetSpec):
    """Load a dataset and keep its main connected component (memoised)."""
    key = (os.path.abspath(spec.path), spec.timestamped)
    if key not in _DATA_CACHE:
        g = load_edge_list(spec.path, has_timestamps=spec.timestamped)
        if spec.timestamped:
            g = g.main_connected_component()
        else:
            g = main_connected_component(g)
        _DATA_CACHE[key] = g
    return _DATA_CACHE[key]


# -- leakage guard -----------------------------------------------------

def assert_train_only(graph: Graph, e_test) -> None:
    """Raise :class:`LeakageError` if any test edge is present in ``graph``."""
    e_test = np.asarray(e_test)
    if len(e_test) and graph.has_edges(e_test).any():
        raise LeakageError("a test edge is present in the graph handed to feature code")


# -- grids -------------------------------------------------------------

def expand_grid(grid, defaults=None) -> list:
    """Cartesian product of the grid axes in declared order.

    Each point is the defaults overridden by the axis values; an empty
    grid yields just the defaults.
    """
    defaults = dict(defaults or {})
    axes = []
    for names, values in grid:
        names = (names,) if isinstance(names, str) else tuple(names)
        values = tuple(values)
        if not values:
            raise ValueError(f"empty grid axis for {names}")
        axes.append((names, values))
    points = []
    for combo in itertools.product(*[vals for _, vals in axes]):
        p = dict(defaults)
        for (names, _), value in zip(axes, combo):
            for name in names:
                p[name] = value
        points.append(p)
    return points


def _fit_score(classifier, seed, X_train, y_train, X_eval, y_eval):
    clf = make_classifier(classifier, seed=seed)
    clf.fit(X_train, y_train)
    return auc_roc(clf.decision_scores(X_eval), y_eval)


def tune_grid(method_factory, grid, inner: EdgeSplit, operators=None, classifier="LRCV",
              seed=0, defaults=None) -> TuneResult:
    """Exhaustive search over grid points and node-pair operators.

    ``method_factory(params)`` returns an unfitted embedder. Each point is
    embedded once on ``inner.train_graph``; every operator is then scored
    by the validation AUC of a classifier fitted on the inner train pairs.
    The first best candidate wins, so ties go to grid order and then to
    operator order.

    Raises
    ------
    TuningError
        If every candidate failed; the message lists each cause.
    """
    operators = tuple(PairOperator(o) for o in (operators or OPERATORS))
    points = expand_grid(grid, defaults)
    train_pairs, y_train = inner.train_pairs()
    val_pairs, y_val = inner.test_pairs()
    best = None
    table = []
    failures = []
    for params in points:
        try:
            assert_train_only(inner.train_graph, inner.e_test)
            X = method_factory(params).fit(inner.train_graph).transform()
            for op in operators:
                auc = _fit_score(classifier, seed, apply_operator(X, train_pairs, op), y_train,
                                 apply_operator(X, val_pairs, op), y_val)
                table.append((params, op.value, auc))
                if best is None or auc > best[2]:
                    best = (params, op.value, auc)
        except LeakageError:
            raise
        except Exception as exc:  # one bad candidate should not sink the search
            failures.append((params, exc))
    if best is None:
        raise TuningError(failures)
    return TuneResult(dict(best[0]), best[1], float(best[2]), tuple(table))


# -- one repeat ----------------------------------------------------------

def _embedder_factory(task: EvalTask, seed: int):
    m = task.method
    if m.kind == "external":
        params = {"command": m.command, "timeout": m.timeout}

        def factory(p):
            return make_embedder("external", seed=seed, d=task.d, **{**params, **p})
    else:
        def factory(p):
            return make_embedder(m.algorithm, seed=seed, **{"d": task.d, **p})
    return factory


def _stage(name, fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except (StageError, LeakageError):
        raise
    except Exception as exc:
        raise StageError(name, exc) from exc


def _json(params) -> str:
    return json.dumps(params, sort_keys=True, separators=(",", ":"))


def evaluate_split(task: EvalTask, split: EdgeSplit, repeat: int = 0, seed: int | None = None,
                   split_s: float = 0.0) -> RepeatResult:
    """Evaluate one method on a prepared split.

    The split is checked for leakage first, and every graph handed to
    heuristic or embedding code is checked against the test edges.
    """
    seed = task.seed + repeat if seed is None else seed
    check_no_leakage(split)
    assert_train_only(split.train_graph, split.e_test)
    m = task.method
    base = dict(dataset=task.dataset.name, method=m.name, setup=task.setup,
                strategy=task.strategy, d=task.d, f=task.f, classifier=task.classifier,
                repeat=repeat, seed=seed, split_s=split_s, node_loss=split.node_loss,
                n_train_edges=len(split.e_train), n_test_edges=len(split.e_test))
    train_pairs, y_train = split.train_pairs()
    test_pairs, y_test = split.test_pairs()
    g = split.train_graph

    if m.kind == "heuristic" and m.algorithm != "NE_heuristics":
        t0 = time.perf_counter()
        scores = _stage("predict", heuristic_score, g, test_pairs, m.algorithm)
        auc = auc_roc(scores, y_test)
        return RepeatResult(**base, test_auc=auc, predict_s=time.perf_counter() - t0)

    if m.kind == "heuristic":
        t0 = time.perf_counter()
        X_train = ne_heuristics_features(g, train_pairs)
        X_test = ne_heuristics_features(g, test_pairs)
        if task.standardize_heuristics:
            scaler = StandardScaler().fit(X_train)
            X_train, X_test = scaler.transform(X_train), scaler.transform(X_test)
        auc = _stage("predict", _fit_score, task.classifier, seed, X_train, y_train, X_test,
                     y_test)
        hp = {"standardized": bool(task.standardize_heuristics)}
        return RepeatResult(**base, hyperparams=_json(hp), test_auc=auc,
                            predict_s=time.perf_counter() - t0)

    # embedding methods: tune (grid and/or operator) on an inner split
    rng = as_rng(seed)
    val_seed = int(rng.integers(0, 2**31 - 1))
    emb_seed = int(rng.integers(0, 2**31 - 1))
    factory = _embedder_factory(task, emb_seed)
    defaults = m.param_dict
    t0 = time.perf_counter()
    inner = _stage("validation split", validation_split, split, val_seed,
                   exclude_test_from_train=task.exclude_test_from_train_nonedges)
    tuned = _stage("tune", tune_grid, factory, m.effective_grid(task.setup), inner,
                   task.operators, task.classifier, seed, defaults)
    tune_s = time.perf_counter() - t0

    assert_train_only(g, split.e_test)
    t0 = time.perf_counter()
    X = _stage("embed", lambda: factory(tuned.params).fit(g).transform())
    embed_s = time.perf_counter() - t0

    t0 = time.perf_counter()
    op = tuned.operator
    auc = _stage("predict", _fit_score, task.classifier, seed,
                 apply_operator(X, train_pairs, op), y_train,
                 apply_operator(X, test_pairs, op), y_test)
    predict_s = time.perf_counter() - t0
    shown = {k: v for k, v in tuned.params.items() if k not in ("command", "timeout")}
    return RepeatResult(**base, operator=op, hyperparams=_json(shown), val_auc=tuned.val_auc,
                        test_auc=auc, embed_s=embed_s, tune_s=tune_s, predict_s=predict_s)


def evaluate_method(task: EvalTask, repeat: int = 0) -> RepeatResult:
    """Run one repeat of ``task`` with split seed ``task.seed + repeat``."""
    seed = task.seed + repeat
    source = _stage("load", load_dataset, task.dataset)
    t0 = time.perf_counter()
    split = _stage("split", make_split, source, task.strategy, task.f, seed,
                   exclude_test_from_train=task.exclude_test_from_train_nonedges)
    split_s = time.perf_counter() - t0
    return evaluate_split(task, split, repeat, seed, split_s)


def _safe_repeat(task: EvalTask, repeat: int) -> RepeatResult:
    try:
        return evaluate_method(task, repeat)
    except Exception as exc:
        log.warning("%s repeat %d failed: %s", task.label(), repeat, exc)
        m = task.method
        return RepeatResult(task.dataset.name, m.name, task.setup, task.strategy, task.d,
                            task.f, task.classifier, repeat, task.seed + repeat,
                            status="failed", error=f"{type(exc).__name__}: {exc}")


# -- results store -----------------------------------------------------

def _fmt(v) -> str:
    if isinstance(v, float):
        return "" if math.isnan(v) else repr(v)
    return str(v)


class ResultsStore:
    """Append-only results: a CSV of successful repeats plus a JSONL mirror.

    The JSONL file records every attempt with its status, error and
    timings and is what resumption reads. ``csv_timing=False`` leaves the
    four timing columns of the CSV empty so that reruns are byte-identical.
    """

    def __init__(self, directory, csv_timing: bool = True):
        self.directory = os.fspath(directory)
        self.csv_timing = csv_timing
        os.makedirs(self.directory, exist_ok=True)
        self.csv_path = os.path.join(self.directory, "results.csv")
        self.jsonl_path = os.path.join(self.directory, "results.jsonl")

    def completed(self) -> dict:
        """``{(task key..., repeat): RepeatResult}`` for repeats recorded ok."""
        done = {}
        if not os.path.exists(self.jsonl_path):
            return done
        with open(self.jsonl_path, encoding="utf-8") as fh:
            for line in fh:
                if not line.strip():
                    continue
                try:
                    rec = json.loads(line)
                except json.JSONDecodeError:
                    continue  # torn final line after an interruption
                if rec.get("status") != "ok":
                    continue
                rr = RepeatResult(**{k: (math.nan if v is None else v)
                                     for k, v in rec.items() if k in _RR_FIELDS})
                done[_repeat_key(rr)] = rr
        return done

    def append(self, result: RepeatResult) -> None:
        rec = asdict(result)
        rec = {k: (None if isinstance(v, float) and math.isnan(v) else v) for k, v in rec.items()}
        if result.status == "ok":
            row = [_fmt(getattr(result, c)) for c in CSV_COLUMNS]
            if not self.csv_timing:
                row[-4:] = ["", "", "", ""]
            buf = io.StringIO()
            w = csv.writer(buf, lineterminator="\n")
            if not os.path.exists(self.csv_path) or os.path.getsize(self.csv_path) == 0:
                w.writerow(CSV_COLUMNS)
            w.writerow(row)
            self._write(self.csv_path, buf.getvalue())
        self._write(self.jsonl_path, json.dumps(rec, sort_keys=True) + "\n")

    @staticmethod
    def _write(path, text):
        # one write per record keeps appends whole even if a run is killed
        with open(path, "a", encoding="utf-8") as fh:
            fh.write(text)
            fh.flush()
            os.fsync(fh.fileno())


_RR_FIELDS = {f for f in RepeatResult.__dataclass_fields__}


def _repeat_key(r: RepeatResult) -> tuple:
    return (r.dataset, r.method, r.setup, r.strategy, int(r.d), float(r.f), r.classifier,
            int(r.seed) - int(r.repeat), int(r.repeat))


def _aggregate(task: EvalTask, results) -> ResultRecord:
    results = tuple(sorted(results, key=lambda r: r.repeat))
    aucs = tuple(r.test_auc for r in results if r.status == "ok")
    complete = len(aucs) == task.repeats
    mean = float(np.mean(aucs)) if aucs else math.nan
    std = float(np.std(aucs)) if len(aucs) >= 2 else 0.0
    return ResultRecord(task, results, aucs, mean, std, complete)


def run_experiment(task: EvalTask, store: ResultsStore | None = None) -> ResultRecord:
    """Run every repeat of ``task``; repeats already stored as ok are reused."""
    return run_tasks([task], store, jobs=1)[0]


def run_tasks(tasks, store: ResultsStore | None = None, jobs: int = 1, progress=None) -> list:
    """Run all repeats of ``tasks`` and return one :class:`ResultRecord` each.

    Results are appended in task/repeat order whatever ``jobs`` is, so the
    stored files do not depend on scheduling.
    """
    done = store.completed() if store is not None else {}
    jobs_list = []
    for ti, task in enumerate(tasks):
        for r in range(task.repeats):
            key = (*task.key[:-1], task.seed, r)
            if key not in done:
                jobs_list.append((ti, r))
    per_task = {ti: [] for ti in range(len(tasks))}
    for ti, task in enumerate(tasks):
        for r in range(task.repeats):
            key = (*task.key[:-1], task.seed, r)
            if key in done:
                per_task[ti].append(done[key])

    def consume(results_iter):
        for (ti, r), res in zip(jobs_list, results_iter):
            if store is not None:
                store.append(res)
            per_task[ti].append(res)
            if progress is not None:
                progress(tasks[ti], res)

    if jobs > 1 and len(jobs_list) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            consume(pool.map(_safe_repeat, [tasks[ti] for ti, _ in jobs_list],
                             [r for _, r in jobs_list]))
    else:
        consume(_safe_repeat(tasks[ti], r) for ti, r in jobs_list)
    return [_aggregate(task, per_task[ti]) for ti, task in enumerate(tasks)]


def with_seed(task: EvalTask, seed: int) -> EvalTask:
    return replace(task, seed=int(seed))

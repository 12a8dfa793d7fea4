"""Experiment configuration files.

Experiments are described in INI files read with :mod:`configparser` and
validated strictly: an unknown section or key, a value of the wrong type
or out of range, or a missing required entry is a :class:`ConfigError`
naming the offending line. Example::

    [experiment]
    setup = LP2
    strategy = st
    train_fraction = 0.8
    dimension = 128
    repeats = 3
    seed = 0
    classifier = LRCV
    data_dir = ../data

    [output]
    directory = ../results/demo
    csv_timing = no

    [dataset:facebook]
    path = facebook.edgelist

    [method:CN]
    type = heuristic

    [method:node2vec]
    type = native
    algorithm = node2vec
    param.window = 10
    grid.num_walks+walk_len = 5, 10, 20

    [method:prune]
    type = external
    command = python run_prune.py {input} {output} {dim}
    timeout = 3600

``setup``, ``strategy``, ``train_fraction``, ``dimension`` and
``classifier`` accept comma-separated lists; the task list is the product
of datasets, methods and those lists. A grid axis whose name joins several
parameters with ``+`` ties them to the same value. Relative paths are
resolved against the config file's directory (datasets against
``data_dir``); ``$VARS`` are expanded. The environment variables
``LPBENCH_DATA`` and ``LPBENCH_OUTPUT_DIR`` override ``data_dir`` and the
output directory.
"""

from __future__ import annotations

import ast
import configparser
import itertools
import os
import re
from dataclasses import dataclass

from .embeddings import make_embedder
from .embeddings.external import PLACEHOLDERS
from .pipeline import HEURISTICS, SETUPS, DatasetSpec, EvalTask, MethodSpec
from .prediction import CLASSIFIERS, PairOperator
from .split import STRATEGIES

__all__ = ["ConfigError", "ExperimentConfig", "parse_config", "parse_filters", "select_tasks"]

DATA_ENV = "LPBENCH_DATA"
OUTPUT_ENV = "LPBENCH_OUTPUT_DIR"

_EXPERIMENT_KEYS = {
    "setup", "strategy", "train_fraction", "dimension", "repeats", "seed", "classifier",
    "operators", "data_dir", "exclude_test_from_train_nonedges", "standardize_heuristics",
}
_OUTPUT_KEYS = {"directory", "csv_timing"}
_DATASET_KEYS = {"path", "timestamped"}
_METHOD_KEYS = {"type", "algorithm", "command", "timeout"}
_BOOLEANS = configparser.ConfigParser.BOOLEAN_STATES


class ConfigError(ValueError):
    """Invalid configuration; ``line`` is 1-based or ``None``."""

    def __init__(self, message, line=None, path=None):
        self.line = line
        self.path = path
        where = ""
        if path is not None:
            where = f"{path}:{line}: " if line else f"{path}: "
        elif line:
            where = f"line {line}: "
        super().__init__(where + message)


@dataclass
class ExperimentConfig:
    path: str
    datasets: list
    methods: list
    setups: tuple = ("LP2",)
    strategies: tuple = ("st",)
    fractions: tuple = (0.8,)
    dimensions: tuple = (128,)
    classifiers: tuple = ("LRCV",)
    repeats: int = 3
    seed: int = 0
    operators: tuple = tuple(op.value for op in PairOperator)
    exclude_test_from_train_nonedges: bool = False
    standardize_heuristics: bool = True
    output_dir: str = "results"
    csv_timing: bool = True

    def tasks(self, seed: int | None = None) -> list:
        """All tasks, datasets outermost and classifiers innermost."""
        seed = self.seed if seed is None else int(seed)
        out = []
        for ds, m, setup, strategy, f, d, clf in itertools.product(
                self.datasets, self.methods, self.setups, self.strategies, self.fractions,
                self.dimensions, self.classifiers):
            out.append(EvalTask(ds, m, setup=setup, d=d, f=f, strategy=strategy,
                                repeats=self.repeats, seed=seed, classifier=clf,
                                operators=self.operators,
                                exclude_test_from_train_nonedges=self.exclude_test_from_train_nonedges,
                                standardize_heuristics=self.standardize_heuristics))
        return out


# -- line bookkeeping --------------------------------------------------

_SECTION_RE = re.compile(r"^\s*\[(?P<name>[^\]]+)\]")
_KEY_RE = re.compile(r"^(?P<key>[^\s#;][^=:]*?)\s*[=:]")


def _line_index(text):
    """Map ``section`` and ``(section, key)`` to the line they appear on."""
    index = {}
    section = None
    for no, line in enumerate(text.splitlines(), start=1):
        m = _SECTION_RE.match(line)
        if m:
            section = m.group("name").strip()
            index.setdefault(section, no)
            continue
        m = _KEY_RE.match(line)
        if m and section is not None:
            index.setdefault((section, m.group("key").strip().lower()), no)
    return index


class _Reader:
    """Typed access to one parsed file with line-numbered errors."""

    def __init__(self, path, parser, index):
        self.path = path
        self.parser = parser
        self.index = index

    def error(self, msg, section=None, key=None):
        line = self.index.get((section, key)) if key else self.index.get(section)
        raise ConfigError(msg, line, self.path)

    def raw(self, section, key, default=None, required=False):
        if self.parser.has_option(section, key):
            return self.parser.get(section, key).strip()
        if required:
            self.error(f"[{section}] is missing required key {key!r}", section)
        return default

    def convert(self, section, key, text, kind):
        try:
            if kind is bool:
                if text.lower() not in _BOOLEANS:
                    raise ValueError(f"not a boolean: {text!r}")
                return _BOOLEANS[text.lower()]
            return kind(text)
        except ValueError:
            self.error(f"{key} expects {kind.__name__}, got {text!r}", section, key)

    def value(self, section, key, kind, default):
        text = self.raw(section, key)
        return default if text is None else self.convert(section, key, text, kind)

    def values(self, section, key, kind, default):
        text = self.raw(section, key)
        if text is None:
            return default
        items = [t.strip() for t in text.split(",") if t.strip()]
        if not items:
            self.error(f"{key} is empty", section, key)
        return tuple(self.convert(section, key, t, kind) for t in items)

    def check_keys(self, section, allowed, prefixes=()):
        for key in self.parser.options(section):
            if key not in allowed and not key.startswith(prefixes):
                self.error(f"unknown key {key!r} in [{section}]", section, key)


def _literal(text):
    try:
        return ast.literal_eval(text)
    except (ValueError, SyntaxError):
        return text


def _resolve(path, base):
    path = os.path.expanduser(os.path.expandvars(path))
    return os.path.normpath(path if os.path.isabs(path) else os.path.join(base, path))


# -- sections ----------------------------------------------------------

def _experiment(r: _Reader, cfg: dict):
    s = "experiment"
    r.check_keys(s, _EXPERIMENT_KEYS)
    cfg["setups"] = r.values(s, "setup", str, ("LP2",))
    for v in cfg["setups"]:
        if v not in SETUPS:
            r.error(f"setup must be one of {', '.join(SETUPS)}, got {v!r}", s, "setup")
    cfg["strategies"] = tuple(v.lower() for v in r.values(s, "strategy", str, ("st",)))
    for v in cfg["strategies"]:
        if v not in STRATEGIES:
            r.error(f"strategy must be one of {', '.join(STRATEGIES)}, got {v!r}", s, "strategy")
    cfg["fractions"] = r.values(s, "train_fraction", float, (0.8,))
    for v in cfg["fractions"]:
        if not 0.0 < v < 1.0:
            r.error(f"train_fraction must lie in (0, 1), got {v}", s, "train_fraction")
    cfg["dimensions"] = r.values(s, "dimension", int, (128,))
    if min(cfg["dimensions"]) < 1:
        r.error("dimension must be >= 1", s, "dimension")
    cfg["classifiers"] = tuple(v.upper() for v in r.values(s, "classifier", str, ("LRCV",)))
    for v in cfg["classifiers"]:
        if v not in CLASSIFIERS:
            r.error(f"classifier must be one of {', '.join(CLASSIFIERS)}, got {v!r}", s,
                    "classifier")
    cfg["repeats"] = r.value(s, "repeats", int, 3)
    if cfg["repeats"] < 1:
        r.error("repeats must be >= 1", s, "repeats")
    cfg["seed"] = r.value(s, "seed", int, 0)
    ops = r.values(s, "operators", str, tuple(op.value for op in PairOperator))
    try:
        cfg["operators"] = tuple(PairOperator(o.lower()).value for o in ops)
    except ValueError as exc:
        r.error(str(exc), s, "operators")
    cfg["exclude_test_from_train_nonedges"] = r.value(
        s, "exclude_test_from_train_nonedges", bool, False)
    cfg["standardize_heuristics"] = r.value(s, "standardize_heuristics", bool, True)


def _method(r: _Reader, section: str, name: str) -> MethodSpec:
    r.check_keys(section, _METHOD_KEYS, prefixes=("param.", "grid."))
    kind = r.raw(section, "type", required=True).lower()
    if kind not in ("heuristic", "native", "external"):
        r.error(f"type must be heuristic, native or external, got {kind!r}", section, "type")
    algorithm = r.raw(section, "algorithm", default=name if kind != "external" else "external")
    params, grid = {}, []
    for key in r.parser.options(section):
        text = r.parser.get(section, key).strip()
        if key.startswith("param."):
            params[key[len("param."):]] = _literal(text)
        elif key.startswith("grid."):
            names = tuple(n.strip() for n in key[len("grid."):].split("+"))
            values = tuple(_literal(t.strip()) for t in text.split(",") if t.strip())
            if not values or not all(names):
                r.error(f"grid axis {key!r} needs names and at least one value", section, key)
            grid.append((names, values))
    command = r.raw(section, "command")
    timeout = r.value(section, "timeout", float, None)

    if kind == "heuristic":
        if algorithm not in HEURISTICS:
            r.error(f"unknown heuristic {algorithm!r}; choose from {', '.join(HEURISTICS)}",
                    section, "algorithm" if r.raw(section, "algorithm") else None)
        if params or grid or command:
            r.error(f"heuristic method {name!r} takes no parameters", section)
    elif kind == "external":
        if not command:
            r.error(f"external method {name!r} needs a command", section)
        missing = [p for p in PLACEHOLDERS if p not in command]
        if missing:
            r.error(f"command lacks placeholder(s) {', '.join(missing)}", section, "command")
    else:
        if command:
            r.error("command is only valid for external methods", section, "command")
        # construct one embedder now so that unknown names fail before any run
        probe = {**params, **{n: vals[0] for axis, vals in grid for n in axis}}
        try:
            make_embedder(algorithm, seed=0, d=8, **probe)
        except (TypeError, ValueError, KeyError) as exc:
            r.error(f"invalid parameters for {algorithm!r}: {exc}", section)
    return MethodSpec(name, kind, algorithm, params=params, grid=tuple(grid) or None,
                      command=command, timeout=timeout)


def parse_config(path, check_paths: bool = True) -> ExperimentConfig:
    """Read and validate an experiment file.

    Parameters
    ----------
    path : path-like
        The INI file.
    check_paths : bool
        Require every dataset file to exist. Turn off to enumerate the
        tasks of a config whose data is not present.

    Raises
    ------
    ConfigError
        With the file name and line number of the problem.
    """
    path = os.fspath(path)
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}", path=path) from exc
    parser = configparser.ConfigParser(interpolation=None, strict=True,
                                       inline_comment_prefixes=(";", "#"))
    try:
        parser.read_string(text, source=path)
    except configparser.Error as exc:
        raise ConfigError(str(exc).replace("\n", " "), getattr(exc, "lineno", None),
                          path) from exc
    r = _Reader(path, parser, _line_index(text))
    base = os.path.dirname(os.path.abspath(path))

    if parser.defaults():
        r.error("[DEFAULT] section is not supported", "DEFAULT")
    known = {"experiment", "output"}
    for sec in parser.sections():
        if sec not in known and not sec.startswith(("dataset:", "method:")):
            r.error(f"unknown section [{sec}]", sec)
    if not parser.has_section("experiment"):
        raise ConfigError("missing section [experiment]", None, path)

    cfg = {}
    _experiment(r, cfg)
    data_dir = os.environ.get(DATA_ENV) or r.raw("experiment", "data_dir", default=".")
    data_dir = _resolve(data_dir, base)

    out_dir, csv_timing = "results", True
    if parser.has_section("output"):
        r.check_keys("output", _OUTPUT_KEYS)
        out_dir = r.raw("output", "directory", default=out_dir)
        csv_timing = r.value("output", "csv_timing", bool, True)
    out_dir = os.environ.get(OUTPUT_ENV) or _resolve(out_dir, base)

    datasets, methods = [], []
    for sec in parser.sections():
        if sec.startswith("dataset:"):
            name = sec.split(":", 1)[1].strip()
            if not name:
                r.error("dataset section needs a name", sec)
            r.check_keys(sec, _DATASET_KEYS)
            ds_path = _resolve(r.raw(sec, "path", required=True), data_dir)
            if check_paths and not os.path.isfile(ds_path):
                r.error(f"dataset file not found: {ds_path}", sec, "path")
            datasets.append(DatasetSpec(name, ds_path, r.value(sec, "timestamped", bool, False)))
        elif sec.startswith("method:"):
            name = sec.split(":", 1)[1].strip()
            if not name:
                r.error("method section needs a name", sec)
            methods.append(_method(r, sec, name))
    if not datasets:
        raise ConfigError("no [dataset:NAME] section", None, path)
    if not methods:
        raise ConfigError("no [method:NAME] section", None, path)
    return ExperimentConfig(path=path, datasets=datasets, methods=methods, output_dir=out_dir,
                            csv_timing=csv_timing, **cfg)


# -- task filters ------------------------------------------------------

_FILTER_KEYS = {
    "dataset": lambda t: t.dataset.name,
    "method": lambda t: t.method.name,
    "setup": lambda t: t.setup,
    "strategy": lambda t: t.strategy,
    "classifier": lambda t: t.classifier,
    "d": lambda t: t.d,
    "f": lambda t: t.f,
}


def parse_filters(text) -> dict:
    """Parse ``key=value,key=value``; repeating a key allows several values."""
    filters = {}
    if not text:
        return filters
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        key, sep, value = part.partition("=")
        key = key.strip().lower()
        if not sep or key not in _FILTER_KEYS:
            raise ConfigError(f"bad filter {part!r}; use key=value with key in "
                              f"{', '.join(sorted(_FILTER_KEYS))}")
        filters.setdefault(key, set()).add(value.strip())
    return filters


def _matches(task, key, wanted):
    got = _FILTER_KEYS[key](task)
    if isinstance(got, (int, float)):
        try:
            return any(float(w) == float(got) for w in wanted)
        except ValueError:
            return False
    return any(w.lower() == str(got).lower() for w in wanted)


def select_tasks(tasks, filters) -> list:
    """Tasks matching every filter key (values of one key are alternatives)."""
    return [t for t in tasks if all(_matches(t, k, v) for k, v in filters.items())]

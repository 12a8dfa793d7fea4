"""Summaries of a results CSV.

:func:`summarize` turns the per-repeat rows into a methods x datasets
matrix of mean and (population) standard deviation of the test AUC, then
:func:`render` prints it as a text table, a CSV, or the
``-log10(1 - AUC)`` matrix used for heat maps. Rendering depends on the
file contents only.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

import numpy as np
from scipy.stats import rankdata

from .metrics import neg_log_complement

__all__ = ["FAMILIES", "FORMATS", "ReportError", "Summary", "family_of", "read_results",
           "summarize", "average_ranks", "render"]

FORMATS = ("table", "csv", "heatmap-data")

#: method name (lower case) -> family used for the per-family best markers
FAMILIES = {
    **{h.lower(): "heuristic" for h in ("CN", "JC", "AA", "PA", "RAI", "NE_heuristics")},
    **{m: "random-walk" for m in ("deepwalk", "node2vec", "struc2vec", "metapath2vec", "wys")},
    **{m: "matrix-factorization"
       for m in ("gf", "grarep", "hope", "le", "lle", "m-nmf", "mnmf", "arope")},
    **{m: "neural" for m in ("sdne", "prune", "verse")},
    **{m: "probabilistic" for m in ("line", "cne")},
}

_TASK_FIELDS = ("setup", "strategy", "d", "f", "classifier")


class ReportError(ValueError):
    pass


def family_of(method: str) -> str:
    return FAMILIES.get(method.lower(), "other")


@dataclass(frozen=True)
class Summary:
    methods: tuple
    datasets: tuple
    mean: np.ndarray  # NaN where a method was not run on a dataset
    std: np.ndarray
    counts: np.ndarray
    families: tuple


def read_results(path) -> list:
    """Rows of a results CSV as dicts."""
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            rows = list(csv.DictReader(fh))
    except OSError as exc:
        raise ReportError(f"cannot read {path}: {exc}") from exc
    need = {"dataset", "method", "test_auc"}
    if rows and not need <= set(rows[0]):
        raise ReportError(f"{path} lacks columns {sorted(need - set(rows[0]))}")
    if not rows:
        raise ReportError(f"{path} holds no results")
    return rows


def _row_label(row, varying):
    extra = [f"{k}={row[k]}" for k in varying]
    return row["method"] + (f" [{' '.join(extra)}]" if extra else "")


def summarize(rows) -> Summary:
    """Aggregate repeats; methods and datasets keep first-appearance order.

    When the file mixes setups, dimensions or other task settings, those
    that vary are appended to the method label so no cell mixes them.
    """
    if not rows:
        raise ReportError("no results to report")
    varying = [k for k in _TASK_FIELDS if len({r.get(k, "") for r in rows}) > 1]
    methods, datasets, cells, fam = [], [], {}, {}
    for r in rows:
        label = _row_label(r, varying)
        if label not in fam:
            methods.append(label)
            fam[label] = family_of(r["method"])
        if r["dataset"] not in datasets:
            datasets.append(r["dataset"])
        try:
            auc = float(r["test_auc"])
        except ValueError as exc:
            raise ReportError(f"bad test_auc {r['test_auc']!r}") from exc
        cells.setdefault((label, r["dataset"]), []).append(auc)
    shape = (len(methods), len(datasets))
    mean, std = np.full(shape, np.nan), np.full(shape, np.nan)
    counts = np.zeros(shape, dtype=int)
    for (m, ds), vals in cells.items():
        i, j = methods.index(m), datasets.index(ds)
        mean[i, j] = np.mean(vals)
        std[i, j] = np.std(vals) if len(vals) > 1 else 0.0
        counts[i, j] = len(vals)
    return Summary(tuple(methods), tuple(datasets), mean, std, counts,
                   tuple(fam[m] for m in methods))


def average_ranks(mean: np.ndarray) -> np.ndarray:
    """Mean per-dataset rank of each method (1 = best; ties share midranks).

    Each dataset column ranks only the methods that ran on it; a method's
    average is over the datasets it ran on.
    """
    ranks = np.full(mean.shape, np.nan)
    for j in range(mean.shape[1]):
        ok = ~np.isnan(mean[:, j])
        if ok.any():
            ranks[ok, j] = rankdata(-mean[ok, j], method="average")
    with np.errstate(invalid="ignore"):
        return np.array([np.nanmean(r) if (~np.isnan(r)).any() else np.nan for r in ranks])


def _family_best(s: Summary) -> np.ndarray:
    best = np.zeros(s.mean.shape, dtype=bool)
    fams = np.array(s.families)
    for fam in set(s.families):
        rows = np.flatnonzero(fams == fam)
        for j in range(len(s.datasets)):
            col = s.mean[rows, j]
            if np.isnan(col).all():
                continue
            top = np.nanmax(col)
            best[rows[col == top], j] = True
    return best


def _num(x, digits):
    return "" if math.isnan(x) else f"{x:.{digits}f}"


def _render_table(s: Summary, avg_auc, avg_rank) -> str:
    best = _family_best(s)
    header = ["method", "family", *s.datasets, "Avg AUC", "Avg Rank"]
    body = []
    for i, m in enumerate(s.methods):
        cells = []
        for j in range(len(s.datasets)):
            if math.isnan(s.mean[i, j]):
                cells.append("-")
            else:
                mark = "*" if best[i, j] else " "
                cells.append(f"{s.mean[i, j]:.3f}±{s.std[i, j]:.3f}{mark}")
        body.append([m, s.families[i], *cells, _num(avg_auc[i], 3), _num(avg_rank[i], 2)])
    widths = [max(len(r[k]) for r in [header, *body]) for k in range(len(header))]
    lines = ["  ".join(c.ljust(w) if k < 2 else c.rjust(w)
                       for k, (c, w) in enumerate(zip(row, widths))).rstrip()
             for row in [header, *body]]
    lines.insert(1, "-" * len(lines[0]))
    lines.append("")
    lines.append("* best mean AUC within the method's family on that dataset")
    return "\n".join(lines) + "\n"


def _render_csv(s: Summary, avg_auc, avg_rank) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["method", "family", *(f"{d}_{k}" for d in s.datasets for k in ("mean", "std")),
                "avg_auc", "avg_rank"])
    for i, m in enumerate(s.methods):
        vals = [v for j in range(len(s.datasets))
                for v in (_num(s.mean[i, j], 6), _num(s.std[i, j], 6))]
        w.writerow([m, s.families[i], *vals, _num(avg_auc[i], 6), _num(avg_rank[i], 6)])
    return buf.getvalue()


def _render_heatmap(s: Summary) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["method", *s.datasets])
    for i, m in enumerate(s.methods):
        w.writerow([m, *("" if math.isnan(a) else f"{neg_log_complement(a):.6f}"
                         for a in s.mean[i])])
    return buf.getvalue()


def render(rows, fmt: str = "table") -> str:
    """Render per-repeat result rows in one of :data:`FORMATS`."""
    if fmt not in FORMATS:
        raise ReportError(f"format must be one of {', '.join(FORMATS)}")
    s = summarize(rows)
    if fmt == "heatmap-data":
        return _render_heatmap(s)
    with np.errstate(invalid="ignore"):
        avg_auc = np.array([np.nanmean(r) if (~np.isnan(r)).any() else np.nan for r in s.mean])
    avg_rank = average_ranks(s.mean)
    if fmt == "csv":
        return _render_csv(s, avg_auc, avg_rank)
    return _render_table(s, avg_auc, avg_rank)

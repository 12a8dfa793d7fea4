"""Command-line front end: ``lpbench evaluate | split | report``.

Exit codes are 0 on success, 1 when a task or report fails and 2 for an
invalid configuration or command line.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys

from . import __version__
from .config import ConfigError, parse_config, parse_filters, select_tasks
from .pipeline import ResultsStore, load_dataset, run_tasks
from .report import FORMATS, ReportError, read_results, render
from .split import make_split, save_split

EXIT_OK, EXIT_FAILED, EXIT_CONFIG = 0, 1, 2

log = logging.getLogger("lpbench")


def _load(args):
    cfg = parse_config(args.config)
    tasks = cfg.tasks(seed=args.seed)
    filters = parse_filters(getattr(args, "only", None))
    return cfg, select_tasks(tasks, filters)


def cmd_evaluate(args) -> int:
    try:
        cfg, tasks = _load(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if not tasks:
        print("warning: no task matches the filters; nothing to do", file=sys.stderr)
        return EXIT_OK
    store = ResultsStore(cfg.output_dir, csv_timing=cfg.csv_timing and not args.no_timing)
    total = len(tasks)
    seen = {}

    def progress(task, res):
        seen[task.key] = seen.get(task.key, 0) + 1
        status = f"auc={res.test_auc:.4f}" if res.status == "ok" else f"FAILED ({res.error})"
        print(f"[{task.label()}] repeat {res.repeat + 1}/{task.repeats}: {status}",
              file=sys.stderr)

    print(f"running {total} task(s); results in {store.csv_path}", file=sys.stderr)
    records = run_tasks(tasks, store, jobs=args.jobs, progress=progress)
    failed = [r for r in records if not r.complete]
    for rec in records:
        print(f"{rec.task.label()}: mean AUC {rec.mean_auc:.4f} ± {rec.std_auc:.4f}"
              f"{'' if rec.complete else ' (incomplete)'}")
    if failed:
        print(f"{len(failed)} of {total} task(s) incomplete:", file=sys.stderr)
        for rec in failed:
            errs = sorted({r.error for r in rec.repeats if r.status != "ok"})
            print(f"  {rec.task.label()}: {'; '.join(errs)}", file=sys.stderr)
        return EXIT_FAILED
    return EXIT_OK


def cmd_split(args) -> int:
    try:
        cfg, tasks = _load(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    written = set()
    for task in tasks:
        for r in range(task.repeats):
            seed = task.seed + r
            key = (task.dataset.name, task.strategy, task.f, seed)
            if key in written:
                continue
            written.add(key)
            dest = os.path.join(cfg.output_dir, "splits", task.dataset.name,
                                f"{task.strategy}_f{task.f}_seed{seed}")
            try:
                split = make_split(load_dataset(task.dataset), task.strategy, task.f, seed,
                                   exclude_test_from_train=task.exclude_test_from_train_nonedges)
            except Exception as exc:
                print(f"error: {task.dataset.name} {task.strategy} seed {seed}: {exc}",
                      file=sys.stderr)
                return EXIT_FAILED
            save_split(split, dest)
            print(dest)
    return EXIT_OK


def cmd_report(args) -> int:
    try:
        text = render(read_results(args.results), args.format)
    except ReportError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAILED
    sys.stdout.write(text)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lpbench",
                                     description="Link prediction benchmarks from config files.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="log debug messages")
    sub = parser.add_subparsers(dest="command", required=True)

    ev = sub.add_parser("evaluate", help="run the tasks of a config file")
    ev.add_argument("config")
    ev.add_argument("--only", metavar="KEY=VAL,...",
                    help="keep tasks matching all keys (dataset, method, setup, strategy, "
                         "classifier, d, f); repeat a key to allow several values")
    ev.add_argument("--jobs", type=int, default=1, help="worker processes (default 1)")
    ev.add_argument("--seed", type=int, default=None, help="override the base seed")
    ev.add_argument("--no-timing", action="store_true",
                    help="leave timing columns of the CSV empty (byte-stable reruns)")
    ev.set_defaults(func=cmd_evaluate)

    sp = sub.add_parser("split", help="write the train/test split files only")
    sp.add_argument("config")
    sp.add_argument("--only", metavar="KEY=VAL,...")
    sp.add_argument("--seed", type=int, default=None)
    sp.set_defaults(func=cmd_split)

    rp = sub.add_parser("report", help="summarise a results CSV")
    rp.add_argument("results")
    rp.add_argument("--format", choices=FORMATS, default="table")
    rp.set_defaults(func=cmd_report)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse exits 2 on usage errors, 0 on --help
        return int(exc.code or 0)
    if getattr(args, "jobs", 1) < 1:
        print("error: --jobs must be >= 1", file=sys.stderr)
        return EXIT_CONFIG
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())

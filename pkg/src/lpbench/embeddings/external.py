"""Run an embedding method shipped as an external program."""

from __future__ import annotations

import os
import shlex
import subprocess
import tempfile

import numpy as np

from ..graph import Graph, write_edge_list
from .base import Embedding, EmbeddingFormatError, parse_embedding_rows

__all__ = ["run_external_method", "ExternalMethodError", "ExternalExitError",
           "ExternalTimeoutError", "MalformedOutputError", "DimensionMismatchError",
           "MissingNodeError"]

PLACEHOLDERS = ("{input}", "{output}", "{dim}")


class ExternalMethodError(RuntimeError):
    pass


class ExternalExitError(ExternalMethodError):
    def __init__(self, message, returncode, stderr=""):
        super().__init__(message)
        self.returncode = returncode
        self.stderr = stderr


class ExternalTimeoutError(ExternalMethodError):
    pass


class MalformedOutputError(ExternalMethodError):
    pass


class DimensionMismatchError(ExternalMethodError):
    pass


class MissingNodeError(ExternalMethodError):
    def __init__(self, message, missing):
        super().__init__(message)
        self.missing = missing


def _expand(template: str, values: dict) -> list:
    for ph in PLACEHOLDERS:
        if ph not in template:
            raise ValueError(f"command template lacks the {ph} placeholder: {template!r}")
    args = shlex.split(template)
    out = []
    for a in args:
        for key, val in values.items():
            a = a.replace("{" + key + "}", str(val))
        out.append(a)
    return out


def run_external_method(template: str, g_train: Graph, d: int, workdir=None,
                        timeout: float | None = None) -> Embedding:
    """Embed ``g_train`` with an external command.

    The train graph is written as ``"i j"`` lines in internal ids to
    ``{input}``; the program must write ``"node v1 ... vd"`` lines (an
    optional ``"N d"`` header is accepted) to ``{output}``. The command is
    tokenised with shell quoting rules but not run through a shell.

    Raises
    ------
    ExternalExitError, ExternalTimeoutError, MalformedOutputError,
    DimensionMismatchError, MissingNodeError
    """
    own_dir = workdir is None
    tmp = tempfile.TemporaryDirectory(prefix="lpbench-ext-") if own_dir else None
    wd = tmp.name if own_dir else os.fspath(workdir)
    os.makedirs(wd, exist_ok=True)
    try:
        inp = os.path.join(wd, "train.edgelist")
        outp = os.path.join(wd, "embedding.txt")
        if os.path.exists(outp):
            os.remove(outp)
        write_edge_list(g_train, inp)
        argv = _expand(template, {"input": inp, "output": outp, "dim": int(d)})
        try:
            proc = subprocess.run(argv, cwd=wd, capture_output=True, text=True,
                                  timeout=timeout, check=False)
        except subprocess.TimeoutExpired:
            raise ExternalTimeoutError(
                f"external method exceeded its {timeout}s time limit: {argv[0]}") from None
        except OSError as exc:
            raise ExternalExitError(f"could not start {argv[0]}: {exc}", None) from None
        if proc.returncode != 0:
            tail = proc.stderr.strip().splitlines()[-5:]
            raise ExternalExitError(
                f"external method exited with status {proc.returncode}: " + " | ".join(tail),
                proc.returncode, proc.stderr)
        if not os.path.exists(outp):
            raise MalformedOutputError(f"external method wrote no output file {outp}")
        with open(outp, encoding="utf-8") as fh:
            text = fh.read()
    finally:
        if tmp is not None:
            tmp.cleanup()

    try:
        rows, width = parse_embedding_rows(text, d)
    except EmbeddingFormatError as exc:
        raise MalformedOutputError(str(exc)) from None
    if not rows:
        raise MalformedOutputError("external method produced an empty embedding")
    if width != d:
        raise DimensionMismatchError(f"expected {d} values per node, found {width}")
    extra = [k for k in rows if not 0 <= k < g_train.n]
    if extra:
        raise MalformedOutputError(f"output references unknown node ids, e.g. {extra[0]}")
    missing = [i for i in range(g_train.n) if i not in rows]
    if missing:
        raise MissingNodeError(
            f"{len(missing)} node(s) missing from the output, e.g. {missing[:5]}", missing)
    return Embedding(np.array([rows[i] for i in range(g_train.n)], dtype=np.float64))

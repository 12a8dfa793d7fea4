"""Skip-gram with negative sampling over a walk corpus.

The per-pair update in :func:`_ns_update` is shared with LINE. Its
objective for one center ``x``, positive context ``c`` and negatives
``c_k`` is ``-log s(x.c) - sum_k log s(-x.c_k)`` with ``s`` the logistic
function; :func:`ns_loss` and :func:`ns_gradient` expose it for checking.
"""

from __future__ import annotations

import numba
import numpy as np

from .._utils import as_rng, kernel_seed
from .base import AliasTable, Embedding, alias_draw, init_uniform
from .walks import WalkCorpus

__all__ = ["train_sgns", "ns_loss", "ns_gradient", "NonFiniteLossError", "LR_FLOOR"]

#: learning rates decay linearly down to this fraction of their start value
LR_FLOOR = 1e-4


class NonFiniteLossError(FloatingPointError):
    pass


def _log_sigmoid(z):
    return -np.logaddexp(0.0, -z)


def ns_loss(x, c_pos, c_negs) -> float:
    x = np.asarray(x, dtype=np.float64)
    c_negs = np.atleast_2d(np.asarray(c_negs, dtype=np.float64))
    return float(-_log_sigmoid(x @ c_pos) - np.sum(_log_sigmoid(-(c_negs @ x))))


def ns_gradient(x, c_pos, c_negs):
    """Gradients of :func:`ns_loss` w.r.t. ``x``, ``c_pos`` and each negative."""
    x = np.asarray(x, dtype=np.float64)
    c_pos = np.asarray(c_pos, dtype=np.float64)
    c_negs = np.atleast_2d(np.asarray(c_negs, dtype=np.float64))
    s_pos = 1.0 / (1.0 + np.exp(-(x @ c_pos)))
    s_neg = 1.0 / (1.0 + np.exp(-(c_negs @ x)))
    gx = -(1.0 - s_pos) * c_pos + s_neg @ c_negs
    return gx, -(1.0 - s_pos) * x, s_neg[:, None] * x[None, :]


@numba.njit(cache=True)
def _neg_log_sigmoid(z):
    if z > 0:
        return np.log1p(np.exp(-z))
    return -z + np.log1p(np.exp(z))


@numba.njit(cache=True)
def _ns_update(X, C, i, j, negs, n_negs, lr, buf):
    """One SGD step on the pair ``(i, j)`` plus ``negs[:n_negs]``; returns the loss.

    Context rows are updated in place as their gradients are formed; the
    center row ``X[i]`` is updated last from the accumulated buffer.
    """
    d = X.shape[1]
    for c in range(d):
        buf[c] = 0.0
    loss = 0.0
    for t in range(n_negs + 1):
        if t == 0:
            k = j
            label = 1.0
        else:
            k = negs[t - 1]
            label = 0.0
        z = 0.0
        for c in range(d):
            z += X[i, c] * C[k, c]
        s = 1.0 / (1.0 + np.exp(-z))
        loss += _neg_log_sigmoid(z) if label == 1.0 else _neg_log_sigmoid(-z)
        g = (label - s) * lr
        for c in range(d):
            buf[c] += g * C[k, c]
            C[k, c] += g * X[i, c]
    for c in range(d):
        X[i, c] += buf[c]
    return loss


@numba.njit(cache=True)
def _sgns_epoch(X, C, walks, lengths, window, negatives, lr0, processed, total, prob, alias,
                seed):
    np.random.seed(seed)
    buf = np.empty(X.shape[1])
    negs = np.empty(negatives, dtype=np.int64)
    loss = 0.0
    for r in range(walks.shape[0]):
        length = lengths[r]
        for pos in range(length):
            frac = 1.0 - processed / (total + 1.0)
            lr = lr0 * max(frac, LR_FLOOR)
            processed += 1
            center = walks[r, pos]
            span = window - np.random.randint(0, window)  # reduced window
            lo = max(0, pos - span)
            hi = min(length, pos + span + 1)
            for ctx in range(lo, hi):
                if ctx == pos:
                    continue
                target = walks[r, ctx]
                k = 0
                for _ in range(negatives):
                    cand = alias_draw(prob, alias)
                    if cand != target:
                        negs[k] = cand
                        k += 1
                loss += _ns_update(X, C, center, target, negs, k, lr, buf)
    return loss, processed


def train_sgns(corpus: WalkCorpus, d: int = 128, window: int = 10, negatives: int = 5,
               lr: float = 0.025, epochs: int = 1, seed=None, return_history: bool = False,
               callback=None):
    """Skip-gram with negative sampling on a walk corpus.

    Noise nodes are drawn with probability proportional to their corpus
    count raised to 0.75. The learning rate decays linearly over all
    processed tokens down to ``1e-4 * lr``. Input vectors start uniform in
    ``[-0.5/d, 0.5/d]`` and context vectors at zero; the input matrix is
    returned.

    ``callback(epoch, X, C)``, when given, runs after every epoch with the
    live input and context matrices.

    Raises
    ------
    NonFiniteLossError
        If the accumulated loss of an epoch is not finite.
    """
    if len(corpus) == 0 or corpus.lengths.sum() == 0:
        raise ValueError("empty walk corpus")
    if window < 1 or negatives < 0 or d < 1:
        raise ValueError("need window >= 1, negatives >= 0, d >= 1")
    rng = as_rng(seed)
    X = init_uniform(rng, corpus.n, d)
    C = np.zeros((corpus.n, d))
    noise = AliasTable(corpus.counts().astype(np.float64) ** 0.75)
    total = float(epochs * corpus.lengths.sum())
    processed = 0
    history = []
    for epoch in range(1, epochs + 1):
        loss, processed = _sgns_epoch(X, C, corpus.walks, corpus.lengths, int(window),
                                      int(negatives), float(lr), processed, total, noise.prob,
                                      noise.alias, kernel_seed(rng))
        if not np.isfinite(loss) or not np.isfinite(X).all():
            raise NonFiniteLossError(f"skip-gram loss became non-finite in epoch {epoch}")
        history.append(loss)
        if callback is not None:
            callback(epoch, X, C)
    emb = Embedding(X)
    if return_history:
        return emb, history, C
    return emb

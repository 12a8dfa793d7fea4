"""L2-regularised logistic regression fitted by gradient descent."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import expit
from sklearn.model_selection import StratifiedKFold

from ..metrics import auc_roc

__all__ = ["LinearModel", "ConvergenceError", "logistic_objective", "logistic_gradient",
           "lr_fit", "lrcv_fit", "DEFAULT_LAMBDA_GRID"]

#: 7 values, log-spaced over 1e-3 .. 1e3
DEFAULT_LAMBDA_GRID = tuple(float(x) for x in np.logspace(-3, 3, 7))

_ARMIJO = 1e-4


class ConvergenceError(RuntimeError):
    def __init__(self, message, grad_norm):
        super().__init__(message)
        self.grad_norm = grad_norm


@dataclass(frozen=True)
class LinearModel:
    weights: np.ndarray
    bias: float
    regularization: float
    n_iter: int = field(default=0, compare=False)
    objective_trace: tuple = field(default=(), repr=False, compare=False)
    cv_scores: dict = field(default_factory=dict, repr=False, compare=False)


def _prep(X, y):
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64).ravel()
    if X.ndim != 2 or len(X) != len(y):
        raise ValueError("X must be 2-D with one row per label")
    if not np.isin(y, (0.0, 1.0)).all():
        raise ValueError("labels must be 0 or 1")
    return X, y


def logistic_objective(w, b, X, y, lam) -> float:
    """Mean logistic loss plus ``lam / 2 * ||w||^2`` (bias unpenalised)."""
    z = X @ w + b
    loss = np.mean(np.logaddexp(0.0, z) - y * z)
    return float(loss + 0.5 * lam * np.dot(w, w))


def logistic_gradient(w, b, X, y, lam):
    r = expit(X @ w + b) - y
    return X.T @ r / len(y) + lam * w, float(r.mean())


def lr_fit(X, y, reg: float = 1e-3, tol: float = 1e-5, max_iters: int = 10_000) -> LinearModel:
    """Fit logistic regression by full-batch gradient descent.

    Each iteration tries a Barzilai-Borwein step and halves it until the
    Armijo sufficient-decrease condition holds, so accepted iterates never
    increase the objective. Starts from zero weights.

    Raises
    ------
    ConvergenceError
        If the gradient norm is still above ``tol`` after ``max_iters``.
    """
    X, y = _prep(X, y)
    if y.min() == y.max():
        raise ValueError("need at least one example of each class")
    reg = float(reg)
    if reg < 0:
        raise ValueError("regularization must be non-negative")
    d = X.shape[1]
    theta = np.zeros(d + 1)

    def f(t):
        return logistic_objective(t[:d], t[d], X, y, reg)

    def grad(t):
        gw, gb = logistic_gradient(t[:d], t[d], X, y, reg)
        return np.append(gw, gb)

    obj = f(theta)
    g = grad(theta)
    trace = [obj]
    step = 1.0
    for it in range(max_iters):
        gnorm = float(np.linalg.norm(g))
        if gnorm <= tol:
            return LinearModel(theta[:d].copy(), float(theta[d]), reg, it, tuple(trace))
        gg = gnorm * gnorm
        while True:
            cand = theta - step * g
            new_obj = f(cand)
            if new_obj <= obj - _ARMIJO * step * gg:
                break
            step *= 0.5
            if step < 1e-20:
                raise ConvergenceError("line search failed to decrease the objective", gnorm)
        new_g = grad(cand)
        s = cand - theta
        yv = new_g - g
        sy = float(np.dot(s, yv))
        step = float(np.dot(s, s)) / sy if sy > 0 else step * 2.0
        theta, obj, g = cand, new_obj, new_g
        trace.append(obj)
    gnorm = float(np.linalg.norm(g))
    if gnorm <= tol:
        return LinearModel(theta[:d].copy(), float(theta[d]), reg, max_iters, tuple(trace))
    raise ConvergenceError(
        f"no convergence after {max_iters} iterations (gradient norm {gnorm:.3e})", gnorm)


def lrcv_fit(X, y, grid=DEFAULT_LAMBDA_GRID, folds: int = 5, seed: int = 0,
             tol: float = 1e-5, max_iters: int = 10_000) -> LinearModel:
    """Choose the L2 strength by stratified k-fold CV on AUC, then refit.

    Ties in mean validation AUC go to the larger regularization.
    """
    X, y = _prep(X, y)
    grid = [float(v) for v in grid]
    if not grid:
        raise ValueError("empty regularization grid")
    per_class = np.bincount(y.astype(int), minlength=2)
    if per_class.min() < folds:
        raise ValueError(f"need at least {folds} examples per class for {folds}-fold CV")
    skf = StratifiedKFold(n_splits=folds, shuffle=True, random_state=int(seed) % 2**32)
    splits = list(skf.split(X, y))
    scores = {}
    for lam in grid:
        fold_aucs = []
        for tr, va in splits:
            model = lr_fit(X[tr], y[tr], lam, tol, max_iters)
            fold_aucs.append(auc_roc(X[va] @ model.weights + model.bias, y[va]))
        scores[lam] = float(np.mean(fold_aucs))
    best_lam, best = None, -np.inf
    for lam in sorted(grid, reverse=True):
        if scores[lam] > best + 1e-12:
            best_lam, best = lam, scores[lam]
    model = lr_fit(X, y, best_lam, tol, max_iters)
    return LinearModel(model.weights, model.bias, best_lam, model.n_iter,
                       model.objective_trace, scores)

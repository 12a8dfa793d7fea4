"""Pair features and binary classifiers that turn them into link scores.

The functional API (:func:`lr_fit`, :func:`lrcv_fit`, :func:`dt_fit`,
:func:`predict_proba`) returns immutable model records. The estimator
classes wrap the same code in the usual ``fit`` / ``predict_proba`` shape.
"""

from __future__ import annotations

import json

import numpy as np
from scipy.special import expit
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from .linear import (DEFAULT_LAMBDA_GRID, ConvergenceError, LinearModel, logistic_gradient,
                     logistic_objective, lr_fit, lrcv_fit)
from .operators import OPERATORS, PairOperator, apply_operator
from .tree import TreeModel, dt_fit

__all__ = [
    "PairOperator", "OPERATORS", "apply_operator",
    "LinearModel", "TreeModel", "ConvergenceError", "DEFAULT_LAMBDA_GRID",
    "logistic_objective", "logistic_gradient", "lr_fit", "lrcv_fit", "dt_fit",
    "predict_proba", "model_to_text", "model_from_text",
    "LRClassifier", "LRCVClassifier", "DTClassifier", "make_classifier", "CLASSIFIERS",
]

CLASSIFIERS = ("LR", "LRCV", "DT")


def _n_features(model) -> int:
    if isinstance(model, LinearModel):
        return len(model.weights)
    if isinstance(model, TreeModel):
        return model.n_features
    raise TypeError(f"unsupported model type {type(model).__name__}")


def predict_proba(model, features) -> np.ndarray:
    """Class-1 scores in ``[0, 1]`` for every row of ``features``.

    A :class:`LinearModel` yields ``sigmoid(w . x + b)``; a
    :class:`TreeModel` yields the class-1 fraction of the reached leaf.
    """
    X = np.asarray(features, dtype=np.float64)
    if X.ndim == 1:
        X = X.reshape(1, -1)
    d = _n_features(model)
    if X.ndim != 2 or X.shape[1] != d:
        raise ValueError(f"model expects {d} features, got shape {X.shape}")
    if isinstance(model, LinearModel):
        return expit(X @ model.weights + model.bias)
    return model.value[model.apply(X)]


# -- persistence -------------------------------------------------------

def model_to_text(model) -> str:
    """Serialise a model as ``key = value`` lines (values JSON encoded).

    Floats survive a round trip exactly since JSON uses ``repr``.
    """
    if isinstance(model, LinearModel):
        fields = {"kind": "linear", "weights": model.weights.tolist(), "bias": model.bias,
                  "regularization": model.regularization}
    elif isinstance(model, TreeModel):
        fields = {"kind": "tree", "max_depth": model.max_depth,
                  "n_features": model.n_features}
        for name in ("feature", "threshold", "left", "right", "value"):
            fields[name] = getattr(model, name).tolist()
    else:
        raise TypeError(f"unsupported model type {type(model).__name__}")
    return "".join(f"{k} = {json.dumps(v)}\n" for k, v in fields.items())


def model_from_text(text: str):
    fields = {}
    for line in text.splitlines():
        if not line.strip():
            continue
        key, _, value = line.partition("=")
        fields[key.strip()] = json.loads(value)
    kind = fields.pop("kind", None)
    if kind == "linear":
        return LinearModel(np.asarray(fields["weights"], dtype=np.float64),
                           float(fields["bias"]), float(fields["regularization"]))
    if kind == "tree":
        return TreeModel(np.asarray(fields["feature"], dtype=np.int64),
                         np.asarray(fields["threshold"], dtype=np.float64),
                         np.asarray(fields["left"], dtype=np.int64),
                         np.asarray(fields["right"], dtype=np.int64),
                         np.asarray(fields["value"], dtype=np.float64),
                         int(fields["max_depth"]), int(fields["n_features"]))
    raise ValueError(f"unknown model kind {kind!r}")


# -- estimators --------------------------------------------------------

class _ModelClassifier(ClassifierMixin, BaseEstimator):
    def _fit_model(self, X, y):  # pragma: no cover - abstract
        raise NotImplementedError

    def fit(self, X, y):
        X, y = check_X_y(X, y, dtype=np.float64)
        self.classes_ = np.array([0, 1])
        self.model_ = self._fit_model(X, np.asarray(y, dtype=np.float64))
        self.n_features_in_ = X.shape[1]
        return self

    def decision_scores(self, X) -> np.ndarray:
        """Class-1 probability for every row."""
        check_is_fitted(self, "model_")
        return predict_proba(self.model_, check_array(X, dtype=np.float64))

    def predict_proba(self, X) -> np.ndarray:
        p = self.decision_scores(X)
        return np.column_stack([1.0 - p, p])

    def predict(self, X) -> np.ndarray:
        return (self.decision_scores(X) > 0.5).astype(np.int64)


class LRClassifier(_ModelClassifier):
    """Logistic regression with a fixed L2 strength."""

    def __init__(self, reg=1e-3, tol=1e-5, max_iters=10_000):
        self.reg = reg
        self.tol = tol
        self.max_iters = max_iters

    def _fit_model(self, X, y):
        return lr_fit(X, y, self.reg, self.tol, self.max_iters)


class LRCVClassifier(_ModelClassifier):
    """Logistic regression with the L2 strength picked by stratified k-fold CV."""

    def __init__(self, grid=DEFAULT_LAMBDA_GRID, folds=5, seed=0, tol=1e-5, max_iters=10_000):
        self.grid = grid
        self.folds = folds
        self.seed = seed
        self.tol = tol
        self.max_iters = max_iters

    def _fit_model(self, X, y):
        return lrcv_fit(X, y, self.grid, self.folds, self.seed, self.tol, self.max_iters)


class DTClassifier(_ModelClassifier):
    """CART decision tree (Gini)."""

    def __init__(self, max_depth=10, min_leaf=5):
        self.max_depth = max_depth
        self.min_leaf = min_leaf

    def _fit_model(self, X, y):
        return dt_fit(X, y, self.max_depth, self.min_leaf)


def make_classifier(name: str, seed: int = 0) -> _ModelClassifier:
    """Build a classifier by name: ``LR``, ``LRCV`` or ``DT``."""
    key = str(name).upper()
    if key == "LR":
        return LRClassifier()
    if key == "LRCV":
        return LRCVClassifier(seed=seed)
    if key == "DT":
        return DTClassifier()
    raise ValueError(f"unknown classifier {name!r}; choose from {', '.join(CLASSIFIERS)}")

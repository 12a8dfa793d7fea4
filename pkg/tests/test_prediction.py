import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from sklearn.base import clone

from lpbench.prediction import (DEFAULT_LAMBDA_GRID, OPERATORS, ConvergenceError,
                                DTClassifier, LinearModel, LRClassifier, LRCVClassifier,
                                PairOperator, apply_operator, dt_fit, logistic_gradient,
                                logistic_objective, lr_fit, lrcv_fit, make_classifier,
                                model_from_text, model_to_text, predict_proba)

# -- operators ---------------------------------------------------------


def scalar_operator(xi, xj, op):
    out = []
    for a, b in zip(xi, xj):
        if op == "average":
            out.append((a + b) / 2.0)
        elif op == "hadamard":
            out.append(a * b)
        elif op == "weighted_l1":
            out.append(abs(a - b))
        else:
            d = abs(a - b)
            out.append(d * d)
    return out


def test_operator_arithmetic():
    X = np.array([[1.0, 2.0], [3.0, -2.0]])
    got = {op.value: apply_operator(X, [(0, 1)], op)[0].tolist() for op in OPERATORS}
    assert got == {"average": [2.0, 0.0], "hadamard": [3.0, -4.0],
                   "weighted_l1": [2.0, 4.0], "weighted_l2": [4.0, 16.0]}


def test_operator_identity_case():
    X = np.array([[0.5, -1.5, 2.0], [0.5, -1.5, 2.0]])
    assert not apply_operator(X, [(0, 1)], "weighted_l1").any()
    assert not apply_operator(X, [(0, 1)], "weighted_l2").any()
    np.testing.assert_array_equal(apply_operator(X, [(0, 1)], "average")[0], X[0])


@pytest.mark.parametrize("op", [o.value for o in PairOperator])
def test_operators_match_scalar_loop(op):
    rng = np.random.default_rng(3)
    X = rng.normal(size=(30, 7))
    pairs = rng.integers(0, 30, size=(50, 2))
    got = apply_operator(X, pairs, op)
    want = np.array([scalar_operator(X[i], X[j], op) for i, j in pairs])
    np.testing.assert_array_equal(got, want)
    np.testing.assert_array_equal(got, apply_operator(X, pairs[:, ::-1], op))


def test_operator_missing_node():
    with pytest.raises((IndexError, KeyError)):
        apply_operator(np.zeros((3, 2)), [(0, 3)], "hadamard")


# -- logistic regression -----------------------------------------------


def test_gradient_matches_finite_differences():
    rng = np.random.default_rng(0)
    X = rng.normal(size=(40, 5))
    y = (rng.random(40) < 0.5).astype(float)
    w, b, lam = rng.normal(size=5), 0.3, 0.7
    gw, gb = logistic_gradient(w, b, X, y, lam)
    h = 1e-6
    fd = []
    for k in range(6):
        e = np.zeros(6)
        e[k] = h
        tp, tm = np.append(w, b) + e, np.append(w, b) - e
        fd.append((logistic_objective(tp[:5], tp[5], X, y, lam)
                   - logistic_objective(tm[:5], tm[5], X, y, lam)) / (2 * h))
    analytic = np.append(gw, gb)
    assert np.linalg.norm(analytic - fd) / np.linalg.norm(analytic) < 1e-6


def test_separable_1d():
    X = np.array([[-1.0], [1.0]])
    y = np.array([0, 1])
    model = lr_fit(X, y, reg=1e-6)
    assert ((predict_proba(model, X) > 0.5) == y).all()


def test_label_flip_negates_parameters():
    rng = np.random.default_rng(1)
    X = rng.normal(size=(80, 3))
    y = (X[:, 0] + 0.5 * rng.normal(size=80) > 0).astype(float)
    a = lr_fit(X, y, reg=0.1, tol=1e-10)
    b = lr_fit(X, 1 - y, reg=0.1, tol=1e-10)
    np.testing.assert_allclose(a.weights, -b.weights, atol=1e-8)
    assert a.bias == pytest.approx(-b.bias, abs=1e-8)


def test_objective_trace_is_monotone():
    rng = np.random.default_rng(2)
    X = rng.normal(size=(200, 4)) * np.array([1.0, 10.0, 0.1, 3.0])
    y = (X @ np.array([1.0, -0.2, 4.0, 0.5]) + rng.normal(size=200) > 0).astype(float)
    model = lr_fit(X, y, reg=1e-3)
    trace = np.array(model.objective_trace)
    assert (np.diff(trace) <= 1e-15).all()
    gw, gb = logistic_gradient(model.weights, model.bias, X, y, 1e-3)
    assert np.linalg.norm(np.append(gw, gb)) <= 1e-5


def test_non_convergence_reports_gradient_norm():
    rng = np.random.default_rng(4)
    X = rng.normal(size=(50, 3))
    y = (X[:, 0] > 0).astype(float)
    with pytest.raises(ConvergenceError) as exc:
        lr_fit(X, y, reg=1e-4, max_iters=2)
    assert exc.value.grad_norm > 0


def test_lr_needs_both_classes():
    with pytest.raises(ValueError):
        lr_fit(np.ones((4, 2)), np.ones(4))


def test_lrcv_singleton_grid_equals_lr():
    rng = np.random.default_rng(5)
    X = rng.normal(size=(60, 3))
    y = (X[:, 1] + rng.normal(size=60) > 0).astype(float)
    cv = lrcv_fit(X, y, grid=[0.5], seed=9)
    plain = lr_fit(X, y, 0.5)
    np.testing.assert_array_equal(cv.weights, plain.weights)
    assert (cv.bias, cv.regularization) == (plain.bias, plain.regularization)


def test_lrcv_separable_picks_largest():
    rng = np.random.default_rng(6)
    X = rng.normal(size=(100, 2))
    y = (X[:, 0] > 0).astype(float)
    X[:, 0] += np.where(y == 1, 1.0, -1.0)  # margin
    model = lrcv_fit(X, y, seed=0)
    assert all(v == 1.0 for v in model.cv_scores.values())
    assert model.regularization == max(DEFAULT_LAMBDA_GRID)


def test_lrcv_needs_enough_per_class():
    X = np.arange(12, dtype=float).reshape(-1, 1)
    y = np.array([0] * 8 + [1] * 4)
    with pytest.raises(ValueError):
        lrcv_fit(X, y, folds=5)


def test_default_grid():
    assert len(DEFAULT_LAMBDA_GRID) == 7
    assert DEFAULT_LAMBDA_GRID[0] == pytest.approx(1e-3)
    assert DEFAULT_LAMBDA_GRID[-1] == pytest.approx(1e3)


# -- predict_proba -----------------------------------------------------


def test_zero_model_gives_half():
    m = LinearModel(np.zeros(3), 0.0, 0.0)
    np.testing.assert_array_equal(predict_proba(m, np.random.default_rng(0).normal(size=(9, 3))),
                                  0.5)


def test_sigmoid_oracle_and_monotone():
    rng = np.random.default_rng(8)
    w, b = rng.normal(size=4), 0.2
    X = rng.normal(size=(100, 4))
    m = LinearModel(w, b, 0.0)
    got = predict_proba(m, X)
    want = np.array([1.0 / (1.0 + np.exp(-(float(np.dot(w, x)) + b))) for x in X])
    assert np.max(np.abs(got - want)) < 1e-12
    z = X @ w
    order = np.argsort(z)
    assert (np.diff(got[order]) > 0).all()


def test_dimension_mismatch():
    with pytest.raises(ValueError):
        predict_proba(LinearModel(np.zeros(3), 0.0, 0.0), np.zeros((2, 4)))
    tree = dt_fit(np.zeros((4, 2)), [0, 1, 0, 1])
    with pytest.raises(ValueError):
        predict_proba(tree, np.zeros((2, 3)))


# -- decision trees ----------------------------------------------------


def gini_cost(y):
    if len(y) == 0:
        return 0.0
    p = np.mean(y)
    return len(y) * 2 * p * (1 - p)


def oracle_predict(X, y, Xq, depth, max_depth, min_leaf):
    """Plain recursive CART evaluated at query points."""
    value = float(np.mean(y))
    if y.min() == y.max() or depth >= max_depth or len(y) < 2 * min_leaf:
        return np.full(len(Xq), value)
    best = None
    for f in range(X.shape[1]):
        vals = sorted(set(X[:, f].tolist()))
        for a, b in zip(vals, vals[1:]):
            t = (a + b) / 2
            left = X[:, f] <= t
            if left.sum() < min_leaf or (~left).sum() < min_leaf:
                continue
            cost = gini_cost(y[left]) + gini_cost(y[~left])
            if best is None or cost < best[0] - 1e-9:
                best = (cost, f, t)
    if best is None:
        return np.full(len(Xq), value)
    _, f, t = best
    left = X[:, f] <= t
    qleft = Xq[:, f] <= t
    out = np.empty(len(Xq))
    out[qleft] = oracle_predict(X[left], y[left], Xq[qleft], depth + 1, max_depth, min_leaf)
    out[~qleft] = oracle_predict(X[~left], y[~left], Xq[~qleft], depth + 1, max_depth, min_leaf)
    return out


def test_pure_data_is_single_leaf():
    for label in (0, 1):
        t = dt_fit(np.random.default_rng(0).normal(size=(10, 2)), [label] * 10)
        assert len(t.feature) == 1 and t.value[0] == label


def test_xor_depth_two():
    X = np.array([[0.0, 0.0], [0.0, 1.0], [1.0, 0.0], [1.0, 1.0]])
    y = np.array([0, 1, 1, 0])
    t = dt_fit(X, y, max_depth=2, min_leaf=1)
    np.testing.assert_array_equal(predict_proba(t, X), y)
    assert t.depth <= 2


def test_tree_matches_recursive_oracle():
    rng = np.random.default_rng(11)
    for trial in range(25):
        n = int(rng.integers(10, 101))
        d = int(rng.integers(1, 4))
        # rounded values give ties in both features and labels
        X = np.round(rng.normal(size=(n, d)), 1)
        y = (X[:, 0] + rng.normal(size=n) > 0).astype(float)
        max_depth = int(rng.integers(1, 6))
        min_leaf = int(rng.integers(1, 6))
        t = dt_fit(X, y, max_depth, min_leaf)
        Xq = np.round(rng.normal(size=(50, d)), 2)
        np.testing.assert_allclose(predict_proba(t, Xq),
                                   oracle_predict(X, y, Xq, 0, max_depth, min_leaf),
                                   atol=1e-12, err_msg=f"trial {trial}")


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000), st.integers(0, 6))
def test_tree_output_in_unit_interval(seed, max_depth):
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(40, 3))
    y = rng.integers(0, 2, size=40)
    t = dt_fit(X, y, max_depth=max_depth, min_leaf=2)
    p = predict_proba(t, rng.normal(size=(30, 3)) * 3)
    assert ((p >= 0) & (p <= 1)).all()
    assert t.depth <= max_depth


# -- persistence and estimators ----------------------------------------


def test_model_text_round_trip():
    rng = np.random.default_rng(12)
    X = rng.normal(size=(60, 3))
    y = (X[:, 0] > 0).astype(float)
    for model in (lr_fit(X, y, 0.01), dt_fit(X, y, 4, 2)):
        back = model_from_text(model_to_text(model))
        np.testing.assert_array_equal(predict_proba(back, X), predict_proba(model, X))


@pytest.mark.parametrize("name", ["LR", "LRCV", "DT"])
def test_estimators(name):
    rng = np.random.default_rng(13)
    X = rng.normal(size=(80, 2))
    y = (X[:, 0] - X[:, 1] > 0).astype(int)
    est = make_classifier(name, seed=1)
    est.fit(X, y)
    proba = est.predict_proba(X)
    assert proba.shape == (80, 2)
    np.testing.assert_allclose(proba.sum(axis=1), 1.0)
    assert est.score(X, y) > 0.85
    assert clone(est).get_params() == est.get_params()


def test_make_classifier_rejects_unknown():
    with pytest.raises(ValueError):
        make_classifier("SVM")
    assert isinstance(make_classifier("lr"), LRClassifier)
    assert isinstance(make_classifier("LRCV"), LRCVClassifier)
    assert isinstance(make_classifier("dt"), DTClassifier)

import numpy as np
import pytest

from sdforest.linear import SoftmaxRegression, loss_and_grad, train_logistic
from sdforest.sampler import PixelDataset


def _separable(n=80, margin=0.5, seed=20):
    """2-D points split by the line x0 + x1 = 0 with a clear margin."""
    rng = np.random.default_rng(seed)
    X = rng.uniform(-2, 2, size=(n, 2))
    s = X.sum(axis=1)
    X[s > 0] += margin
    X[s <= 0] -= margin
    y = (X.sum(axis=1) > 0).astype(np.int64)
    return X.astype(np.float64), y


def test_separating_line_exists_oracle_then_accuracy():
    X, y = _separable()
    # oracle: the construction leaves a margin along w = (1, 1)
    signed = X.sum(axis=1) * np.where(y == 1, 1.0, -1.0)
    assert signed.min() > 0
    model = SoftmaxRegression(l2=1e-4).fit(X, y)
    assert (model.predict(X) == y).mean() == 1.0


def test_zero_weight_loss_is_log_c():
    for c in (2, 3):
        rng = np.random.default_rng(c)
        X = rng.random((30, 4))
        y = np.arange(30) % c
        model = SoftmaxRegression(l2=1e-3).fit(X, y)
        loss, _ = loss_and_grad(model, X, y, theta=np.zeros_like(model.theta_))
        assert loss == pytest.approx(np.log(c), abs=1e-12)


def test_duplicating_samples_keeps_loss():
    rng = np.random.default_rng(21)
    X = rng.random((25, 3))
    y = rng.integers(0, 2, size=25)
    model = SoftmaxRegression(l2=1e-4).fit(X, y)
    base, _ = loss_and_grad(model, X, y)
    doubled, _ = loss_and_grad(model, np.vstack([X, X]), np.concatenate([y, y]))
    assert doubled == pytest.approx(base, rel=1e-12)


def test_gradient_matches_finite_differences():
    rng = np.random.default_rng(22)
    X = rng.random((40, 3))
    y = rng.integers(0, 3, size=40)
    model = SoftmaxRegression(l2=1e-3).fit(X, y)
    step = 1e-5
    for draw in range(20):
        theta = rng.standard_normal(model.theta_.shape)
        _, grad = loss_and_grad(model, X, y, theta=theta)
        i = rng.integers(0, theta.shape[0])
        j = rng.integers(0, theta.shape[1])
        up = theta.copy()
        up[i, j] += step
        down = theta.copy()
        down[i, j] -= step
        lu, _ = loss_and_grad(model, X, y, theta=up)
        ld, _ = loss_and_grad(model, X, y, theta=down)
        fd = (lu - ld) / (2 * step)
        assert abs(grad[i, j] - fd) / (1 + abs(fd)) <= 1e-4


def test_identical_features_balanced_labels_give_priors():
    X = np.ones((40, 3))
    y = np.array([0, 1] * 20)
    model = SoftmaxRegression(l2=1e-4).fit(X, y)
    proba = model.predict_proba(X)
    assert np.allclose(proba, 0.5, atol=1e-9)


def test_zero_weights_give_uniform_probabilities():
    rng = np.random.default_rng(26)
    X = rng.random((30, 4))
    y = rng.integers(0, 3, size=30)
    model = SoftmaxRegression().fit(X, y)
    model.theta_ = np.zeros_like(model.theta_)
    proba = model.predict_proba(rng.random((10, 4)))
    assert np.allclose(proba, 1.0 / 3.0, atol=1e-12)


def test_probabilities_sum_to_one():
    rng = np.random.default_rng(23)
    X = rng.random((60, 5))
    y = rng.integers(0, 4, size=60)
    model = SoftmaxRegression().fit(X, y)
    proba = model.predict_proba(rng.random((30, 5)))
    assert np.all(proba >= 0) and np.all(proba <= 1)
    assert np.abs(proba.sum(axis=1) - 1).max() <= 1e-6


def test_objective_nonincreasing_over_accepted_iterates():
    from scipy.optimize import minimize

    from sdforest.linear import _softmax_objective

    rng = np.random.default_rng(24)
    X = rng.random((120, 4))
    y = rng.integers(0, 3, size=120)
    model = SoftmaxRegression(l2=1e-4)
    # reproduce the training setup and watch the accepted iterates
    model.classes_, y_idx = np.unique(y, return_inverse=True)
    model.mean_ = X.mean(axis=0)
    model.scale_ = np.maximum(X.std(axis=0), 1e-8)
    x_aug = model._augment(model._standardize(X))
    c, d = 3, 5
    values = []

    def fun(flat):
        loss, grad = _softmax_objective(flat.reshape(c, d), x_aug, y_idx, 1e-4)
        return loss, grad.ravel()

    def record(xk):
        values.append(fun(xk)[0])

    minimize(fun, np.zeros(c * d), jac=True, method="L-BFGS-B",
             callback=record, options={"maxiter": 200, "gtol": 1e-6})
    values = np.asarray(values)
    assert np.all(np.diff(values) <= 1e-12)


def test_single_class_rejected():
    with pytest.raises(ValueError):
        SoftmaxRegression().fit(np.random.rand(10, 2), np.zeros(10))


def test_predict_map_and_wrapper():
    rng = np.random.default_rng(25)
    feats = rng.random((3, 5, 4)).astype(np.float32)
    rows = feats.reshape(3, -1).T
    labels = rng.integers(0, 2, size=rows.shape[0]).astype(np.int64)
    data = PixelDataset(rows.astype(np.float32), labels,
                        np.zeros((rows.shape[0], 2), np.int64))
    model = train_logistic(data, l2=1e-4)
    stack = model.predict_map(feats)
    assert stack.shape == (2, 5, 4)
    assert np.abs(stack.sum(axis=0) - 1).max() <= 1e-6

"""Multiclass logistic (softmax) regression: the parametric half of the
semi-parametric estimator.

The training objective is the mean softmax cross-entropy plus an
(l2/2)*||theta||^2 ridge term over the full weight matrix, minimized from
theta = 0 by a deterministic quasi-Newton method until the gradient
infinity-norm drops below the tolerance.  Features are standardized
internally (per-channel mean/std of the training set, std floored at 1e-8)
and the standardization is stored on the model.
"""

import numpy as np
from scipy.optimize import minimize
from sklearn.base import BaseEstimator

from .sampler import PixelDataset

STD_FLOOR = 1e-8


def _softmax_objective(theta, x_aug, y_idx, l2):
    """Loss and gradient of the regularized mean cross-entropy.

    theta is (c, C+1) with the bias in the last column; x_aug already
    carries the bias column of ones.
    """
    n = x_aug.shape[0]
    logits = x_aug @ theta.T
    logits -= logits.max(axis=1, keepdims=True)
    exp = np.exp(logits)
    denom = exp.sum(axis=1)
    log_prob = logits - np.log(denom)[:, None]
    loss = -log_prob[np.arange(n), y_idx].mean() + 0.5 * l2 * float((theta * theta).sum())

    prob = exp / denom[:, None]
    prob[np.arange(n), y_idx] -= 1.0
    grad = prob.T @ x_aug / n + l2 * theta
    return loss, grad


class SoftmaxRegression(BaseEstimator):
    def __init__(self, l2: float = 1e-4, tol: float = 1e-6, max_iters: int = 200):
        self.l2 = l2
        self.tol = tol
        self.max_iters = max_iters

    def _standardize(self, X):
        return (np.asarray(X, dtype=np.float64) - self.mean_) / self.scale_

    def _augment(self, Xs):
        return np.hstack([Xs, np.ones((Xs.shape[0], 1))])

    def fit(self, X, y):
        X = np.asarray(X, dtype=np.float64)
        y = np.asarray(y)
        if X.ndim != 2 or X.shape[0] < 2:
            raise ValueError("need an (N, C) matrix with N >= 2")
        self.classes_, y_idx = np.unique(y, return_inverse=True)
        if self.classes_.size < 2:
            raise ValueError("single-class data: a logistic model degenerates")
        self.mean_ = X.mean(axis=0)
        self.scale_ = np.maximum(X.std(axis=0), STD_FLOOR)
        x_aug = self._augment(self._standardize(X))
        c, d = self.classes_.size, x_aug.shape[1]

        def fun(flat):
            loss, grad = _softmax_objective(flat.reshape(c, d), x_aug, y_idx, self.l2)
            return loss, grad.ravel()

        res = minimize(
            fun,
            np.zeros(c * d),
            jac=True,
            method="L-BFGS-B",
            options={"maxiter": self.max_iters, "gtol": self.tol, "ftol": 1e-18},
        )
        self.theta_ = res.x.reshape(c, d)
        self.n_iter_ = res.nit
        return self

    def predict_proba(self, X) -> np.ndarray:
        x_aug = self._augment(self._standardize(X))
        logits = x_aug @ self.theta_.T
        logits -= logits.max(axis=1, keepdims=True)
        exp = np.exp(logits)
        return exp / exp.sum(axis=1, keepdims=True)

    def predict(self, X) -> np.ndarray:
        return self.classes_[np.argmax(self.predict_proba(X), axis=1)]

    def predict_map(self, fmap) -> np.ndarray:
        """Per-class probability stack (n_classes, H, W) for a (C, H, W) map."""
        fmap = np.asarray(fmap)
        c, h, w = fmap.shape
        proba = self.predict_proba(fmap.reshape(c, h * w).T)
        return proba.T.reshape(self.classes_.size, h, w)


def train_logistic(data: PixelDataset, l2: float = 1e-4, max_iters: int = 200,
                   tol: float = 1e-6) -> SoftmaxRegression:
    model = SoftmaxRegression(l2=l2, tol=tol, max_iters=max_iters)
    return model.fit(data.features, data.labels)


def loss_and_grad(model: SoftmaxRegression, X, y, theta=None):
    """Training objective and its exact gradient at the model's (or a given)
    weight matrix, on raw (unstandardized) features."""
    theta = model.theta_ if theta is None else np.asarray(theta, dtype=np.float64)
    x_aug = model._augment(model._standardize(X))
    y_idx = np.searchsorted(model.classes_, np.asarray(y))
    return _softmax_objective(theta, x_aug, y_idx, model.l2)


def predict_logistic(model: SoftmaxRegression, fmap) -> np.ndarray:
    return model.predict_map(fmap)

"""Linear models: multinomial logistic regression, hinge-loss SVM, log-loss SGD.

All objectives are ``mean loss + lam/2 * ||W||^2`` with ``lam = 1 / (C * n)``;
the bias is not regularized.
"""
from __future__ import annotations

import numpy as np
import scipy.optimize

from .base import Scaled, one_hot, softmax


def _xt(X, G):
    out = X.T @ G
    return np.asarray(out)


def softmax_loss_grad(W, b, X, Y, lam, sample_weight=None):
    """Cross-entropy of softmax(XW + b) against one-hot ``Y``."""
    n = X.shape[0]
    sw = np.full(n, 1.0 / n) if sample_weight is None else sample_weight / sample_weight.sum()
    Z = np.asarray(X @ W) + b
    Zmax = Z.max(axis=1, keepdims=True)
    logsum = np.log(np.exp(Z - Zmax).sum(axis=1, keepdims=True)) + Zmax
    logP = Z - logsum
    loss = -(sw[:, None] * Y * logP).sum() + 0.5 * lam * (W * W).sum()
    D = (np.exp(logP) - Y) * sw[:, None]
    return loss, _xt(X, D) + lam * W, D.sum(axis=0)


def hinge_loss_grad(W, b, X, Ypm, lam):
    """Column-wise binary hinge loss; ``Ypm`` holds +1/-1 targets, one column per class.

    Returns the summed objective over columns and its subgradient (zero at the kink).
    """
    n = X.shape[0]
    M = Ypm * (np.asarray(X @ W) + b)
    active = (M < 1.0).astype(float)
    loss = np.maximum(0.0, 1.0 - M).sum() / n + 0.5 * lam * (W * W).sum()
    G = -(Ypm * active) / n
    return loss, _xt(X, G) + lam * W, G.sum(axis=0)


def log_loss_grad(W, b, X, Ypm, lam):
    """Column-wise binary logistic loss with +1/-1 targets."""
    n = X.shape[0]
    M = Ypm * (np.asarray(X @ W) + b)
    loss = np.logaddexp(0.0, -M).sum() / n + 0.5 * lam * (W * W).sum()
    # d/dm log(1 + e^-m) = -sigmoid(-m)
    G = -Ypm * np.exp(-np.logaddexp(0.0, M)) / n
    return loss, _xt(X, G) + lam * W, G.sum(axis=0)


class LogisticRegression(Scaled):
    name = "LogisticRegression"

    def _fit(self, X, y, sample_weight):
        n, d = X.shape
        C = self.n_classes
        lam = 1.0 / (self.params["C"] * n)
        Y = one_hot(y, C)
        sw = None if sample_weight is None else np.asarray(sample_weight, dtype=float)

        def objective(theta):
            W = theta[: d * C].reshape(d, C)
            b = theta[d * C :]
            loss, gW, gb = softmax_loss_grad(W, b, X, Y, lam, sw)
            return loss, np.concatenate([gW.ravel(), gb])

        res = scipy.optimize.minimize(
            objective,
            np.zeros(d * C + C),
            jac=True,
            method="L-BFGS-B",
            options={"maxiter": self.params["max_iter"], "gtol": self.params["tol"], "ftol": 1e-12},
        )
        self.coef = res.x[: d * C].reshape(d, C)
        self.intercept = res.x[d * C :]

    def decision_function(self, X):
        return np.asarray(X @ self.coef) + self.intercept

    def _proba(self, X):
        return softmax(self.decision_function(X))

    def get_state(self):
        return self._scaled_state({"coef": self.coef.tolist(), "intercept": self.intercept.tolist()})

    def set_state(self, state):
        self._load_scaler(state)
        self.coef = np.array(state["coef"], dtype=float)
        self.intercept = np.array(state["intercept"], dtype=float)


class _SGDOneVsRest(Scaled):
    """One-vs-rest linear model trained by mini-batch SGD in seeded epoch order.

    Step size ``eta0 / (1 + eta0 * lam * t)``; the returned weights average the
    iterates of the second half of the epochs.
    """

    loss_grad = staticmethod(hinge_loss_grad)

    def _fit(self, X, y, sample_weight):
        if sample_weight is not None:
            raise ValueError(f"{self.name} does not support sample weights")
        n, d = X.shape
        K = self.n_classes
        p = self.params
        lam = 1.0 / (p["C"] * n)
        Ypm = 2.0 * one_hot(y, K) - 1.0
        W = np.zeros((d, K))
        b = np.zeros(K)
        W_avg = np.zeros_like(W)
        b_avg = np.zeros_like(b)
        n_avg = 0
        rng = np.random.default_rng(self.seed)
        bs = p["batch_size"]
        t = 0
        start_avg = p["epochs"] // 2
        for epoch in range(p["epochs"]):
            order = rng.permutation(n)
            for s in range(0, n, bs):
                idx = order[s : s + bs]
                _, gW, gb = self.loss_grad(W, b, X[idx], Ypm[idx], lam)
                eta = p["eta0"] / (1.0 + p["eta0"] * lam * t)
                W -= eta * gW
                b -= eta * gb
                t += 1
                if epoch >= start_avg:
                    n_avg += 1
                    W_avg += (W - W_avg) / n_avg
                    b_avg += (b - b_avg) / n_avg
        self.coef, self.intercept = W_avg, b_avg

    def decision_function(self, X):
        return np.asarray(X @ self.coef) + self.intercept

    def get_state(self):
        return self._scaled_state({"coef": self.coef.tolist(), "intercept": self.intercept.tolist()})

    def set_state(self, state):
        self._load_scaler(state)
        self.coef = np.array(state["coef"], dtype=float)
        self.intercept = np.array(state["intercept"], dtype=float)


class LinearSVM(_SGDOneVsRest):
    """L2-regularized hinge loss. Probabilities are a softmax over margins (uncalibrated)."""

    name = "LinearSVM"
    loss_grad = staticmethod(hinge_loss_grad)

    def _proba(self, X):
        return softmax(self.decision_function(X))


class SGDLinear(_SGDOneVsRest):
    name = "SGDLinear"
    loss_grad = staticmethod(log_loss_grad)

    def _proba(self, X):
        return 1.0 / (1.0 + np.exp(-np.clip(self.decision_function(X), -500, 500)))


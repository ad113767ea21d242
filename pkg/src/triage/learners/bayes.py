"""Gaussian and multinomial naive Bayes."""
from __future__ import annotations

import numpy as np
import scipy.sparse as sp

from ..errors import NegativeFeatureForMultinomialNB
from .base import Estimator, softmax


def _class_weights(y, n_classes, sample_weight):
    w = np.ones(len(y)) if sample_weight is None else np.asarray(sample_weight, dtype=float)
    return w, np.bincount(y, weights=w, minlength=n_classes)


def _log_prior(counts):
    with np.errstate(divide="ignore"):
        return np.log(counts / counts.sum())


class GaussianNB(Estimator):
    """Per-class diagonal Gaussians; variances floored at var_smoothing * max feature variance."""

    name = "GaussianNB"

    def _fit(self, X, y, sample_weight):
        X = X.toarray() if sp.issparse(X) else X
        K, d = self.n_classes, X.shape[1]
        w, counts = _class_weights(y, K, sample_weight)
        floor = self.params["var_smoothing"] * X.var(axis=0).max()
        if floor <= 0:
            floor = self.params["var_smoothing"] or 1e-9
        self.theta = np.zeros((K, d))
        self.var = np.ones((K, d))
        for c in range(K):
            mask = y == c
            if counts[c] > 0:
                wc = w[mask] / counts[c]
                mu = wc @ X[mask]
                self.theta[c] = mu
                self.var[c] = wc @ (X[mask] - mu) ** 2
        self.var += floor
        self.log_prior = _log_prior(counts)

    def joint_log_likelihood(self, X):
        X = X.toarray() if sp.issparse(X) else X
        ll = -0.5 * np.log(2.0 * np.pi * self.var).sum(axis=1)[None, :]
        ll = ll - 0.5 * (((X[:, None, :] - self.theta[None]) ** 2) / self.var[None]).sum(axis=2)
        return ll + self.log_prior

    def _proba(self, X):
        return softmax(self.joint_log_likelihood(X))

    def get_state(self):
        return {"theta": self.theta.tolist(), "var": self.var.tolist(), "log_prior": self.log_prior.tolist()}

    def set_state(self, state):
        self.theta = np.array(state["theta"], dtype=float)
        self.var = np.array(state["var"], dtype=float)
        self.log_prior = np.array(state["log_prior"], dtype=float)


class MultinomialNB(Estimator):
    """Count model with additive (Laplace for alpha=1) smoothing."""

    name = "MultinomialNB"

    def _fit(self, X, y, sample_weight):
        data = X.data if sp.issparse(X) else X
        if np.any(data < 0):
            raise NegativeFeatureForMultinomialNB("MultinomialNB requires non-negative features")
        K = self.n_classes
        w, counts = _class_weights(y, K, sample_weight)
        Yw = np.zeros((len(y), K))
        Yw[np.arange(len(y)), y] = w
        feature_counts = np.asarray((X.T @ Yw)).T + self.params["alpha"]
        self.feature_log_prob = np.log(feature_counts / feature_counts.sum(axis=1, keepdims=True))
        self.log_prior = _log_prior(counts)

    def joint_log_likelihood(self, X):
        return np.asarray(X @ self.feature_log_prob.T) + self.log_prior

    def _proba(self, X):
        return softmax(self.joint_log_likelihood(X))

    def get_state(self):
        return {"feature_log_prob": self.feature_log_prob.tolist(), "log_prior": self.log_prior.tolist()}

    def set_state(self, state):
        self.feature_log_prob = np.array(state["feature_log_prob"], dtype=float)
        self.log_prior = np.array(state["log_prior"], dtype=float)

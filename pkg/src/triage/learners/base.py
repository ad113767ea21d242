"""Shared estimator plumbing: the fit/predict contract, scaling, helpers."""
from __future__ import annotations

from typing import Any

import numpy as np
import scipy.sparse as sp

Matrix = np.ndarray | sp.csr_matrix


def as_matrix(X) -> Matrix:
    if sp.issparse(X):
        return sp.csr_matrix(X, dtype=float)
    return np.asarray(X, dtype=float)


def normalize_rows(P: np.ndarray) -> np.ndarray:
    P = np.clip(P, 0.0, None)
    s = P.sum(axis=1, keepdims=True)
    n = P.shape[1]
    out = np.divide(P, s, out=np.full_like(P, 1.0 / n), where=s > 0)
    return out / out.sum(axis=1, keepdims=True)


def softmax(Z: np.ndarray) -> np.ndarray:
    Z = Z - Z.max(axis=1, keepdims=True)
    E = np.exp(Z)
    return E / E.sum(axis=1, keepdims=True)


def argmax_lowest(P: np.ndarray) -> np.ndarray:
    """Row-wise argmax; exact ties resolve to the lowest column (label code)."""
    return np.argmax(P, axis=1).astype(np.int64)


def one_hot(y: np.ndarray, n_classes: int) -> np.ndarray:
    Y = np.zeros((len(y), n_classes))
    Y[np.arange(len(y)), y] = 1.0
    return Y


def child_seed(seed: int, *path: int) -> int:
    """Deterministic sub-seed for nested randomness (per tree, per fold...)."""
    ss = np.random.SeedSequence([int(seed) & 0xFFFFFFFF, *path])
    return int(ss.generate_state(1)[0])


class Estimator:
    """Base class. Subclasses implement ``_fit`` and ``_proba``.

    ``n_classes`` fixes the probability width, so classes absent from a
    training subset still get a (zero or near-zero) column.
    """

    name = "Estimator"

    def __init__(self, params: dict[str, Any] | None = None, seed: int = 0):
        self.params = dict(params or {})
        self.seed = seed
        self.n_classes = 0

    def fit(self, X, y, n_classes: int, sample_weight=None) -> "Estimator":
        self.n_classes = int(n_classes)
        self._fit(as_matrix(X), np.asarray(y, dtype=np.int64), sample_weight)
        return self

    def predict_proba(self, X) -> np.ndarray:
        return normalize_rows(self._proba(as_matrix(X)))

    def predict(self, X) -> np.ndarray:
        return argmax_lowest(self.predict_proba(X))

    def _fit(self, X, y, sample_weight):
        raise NotImplementedError

    def _proba(self, X) -> np.ndarray:
        raise NotImplementedError

    def get_state(self) -> dict:
        raise NotImplementedError

    def set_state(self, state: dict) -> None:
        raise NotImplementedError


class Constant(Estimator):
    """Model for single-class training data: always that class, probability 1."""

    name = "Constant"

    def _fit(self, X, y, sample_weight):
        self.label = int(y[0])

    def _proba(self, X):
        P = np.zeros((X.shape[0], self.n_classes))
        P[:, self.label] = 1.0
        return P

    def get_state(self):
        return {"label": self.label}

    def set_state(self, state):
        self.label = int(state["label"])


class Standardizer:
    """Per-column mean/std from the training data. Sparse input is left unscaled."""

    def __init__(self):
        self.mean: np.ndarray | None = None
        self.scale: np.ndarray | None = None

    def fit(self, X: Matrix) -> "Standardizer":
        if sp.issparse(X):
            return self
        self.mean = X.mean(axis=0)
        std = X.std(axis=0)
        self.scale = np.where(std > 0, std, 1.0)
        return self

    def transform(self, X: Matrix) -> Matrix:
        if self.mean is None or sp.issparse(X):
            return X
        return (X - self.mean) / self.scale

    def get_state(self):
        if self.mean is None:
            return None
        return {"mean": self.mean.tolist(), "scale": self.scale.tolist()}

    @classmethod
    def from_state(cls, state):
        s = cls()
        if state is not None:
            s.mean = np.array(state["mean"], dtype=float)
            s.scale = np.array(state["scale"], dtype=float)
        return s


class Scaled(Estimator):
    """Mixin-style base: standardize inputs when ``params['standardize']`` is set."""

    def fit(self, X, y, n_classes, sample_weight=None):
        X = as_matrix(X)
        self.scaler = Standardizer().fit(X) if self.params.get("standardize") else Standardizer()
        return super().fit(self.scaler.transform(X), y, n_classes, sample_weight)

    def predict_proba(self, X):
        return super().predict_proba(self.scaler.transform(as_matrix(X)))

    def _scaled_state(self, d: dict) -> dict:
        return {"scaler": self.scaler.get_state(), **d}

    def _load_scaler(self, state: dict) -> None:
        self.scaler = Standardizer.from_state(state.get("scaler"))

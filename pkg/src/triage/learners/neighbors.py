"""Brute-force k-nearest neighbours with uniform votes."""
from __future__ import annotations

import numpy as np
import scipy.sparse as sp

from .base import Scaled


def squared_distances(A, B) -> np.ndarray:
    """Exact pairwise squared Euclidean distances for dense input, expanded form for sparse."""
    if sp.issparse(A) or sp.issparse(B):
        A = sp.csr_matrix(A)
        B = sp.csr_matrix(B)
        a2 = np.asarray(A.multiply(A).sum(axis=1)).ravel()
        b2 = np.asarray(B.multiply(B).sum(axis=1)).ravel()
        D = a2[:, None] + b2[None, :] - 2.0 * np.asarray((A @ B.T).todense())
        return np.maximum(D, 0.0)
    return ((A[:, None, :] - B[None, :, :]) ** 2).sum(axis=2)


class KNN(Scaled):
    """Neighbours are the k smallest distances; equal distances keep training order."""

    name = "KNN"
    # Upper bound on floats materialized per distance block.
    block = 4_000_000

    def _fit(self, X, y, sample_weight):
        if sample_weight is not None:
            raise ValueError("KNN does not support sample weights")
        self.X = X
        self.y = y

    def neighbors(self, X) -> np.ndarray:
        k = min(self.params["n_neighbors"], self.X.shape[0])
        n_train, d = self.X.shape
        chunk = max(1, self.block // max(1, n_train * (1 if sp.issparse(X) else d)))
        out = []
        for s in range(0, X.shape[0], chunk):
            D = squared_distances(X[s : s + chunk], self.X)
            out.append(np.argsort(D, axis=1, kind="stable")[:, :k])
        return np.vstack(out) if out else np.zeros((0, k), dtype=np.int64)

    def _proba(self, X):
        idx = self.neighbors(X)
        P = np.zeros((X.shape[0], self.n_classes))
        for j in range(idx.shape[1]):
            np.add.at(P, (np.arange(X.shape[0]), self.y[idx[:, j]]), 1.0)
        return P / max(idx.shape[1], 1)

    def get_state(self):
        X = self.X.toarray() if sp.issparse(self.X) else self.X
        return self._scaled_state({"X": X.tolist(), "y": self.y.tolist(), "sparse": sp.issparse(self.X)})

    def set_state(self, state):
        self._load_scaler(state)
        X = np.array(state["X"], dtype=float).reshape(len(state["y"]), -1)
        self.X = sp.csr_matrix(X) if state.get("sparse") else X
        self.y = np.array(state["y"], dtype=np.int64)

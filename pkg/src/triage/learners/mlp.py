"""One-hidden-layer ReLU network with softmax output."""
from __future__ import annotations

import numpy as np

from .base import Scaled, one_hot, softmax


def mlp_forward(params, X):
    W1, b1, W2, b2 = params
    H_pre = np.asarray(X @ W1) + b1
    H = np.maximum(H_pre, 0.0)
    return H_pre, H, H @ W2 + b2


def mlp_loss_grad(params, X, Y, lam):
    """Mean cross-entropy + lam/2 * (||W1||^2 + ||W2||^2) and gradients for (W1, b1, W2, b2)."""
    W1, b1, W2, b2 = params
    n = X.shape[0]
    H_pre, H, Z = mlp_forward(params, X)
    Zmax = Z.max(axis=1, keepdims=True)
    logP = Z - (np.log(np.exp(Z - Zmax).sum(axis=1, keepdims=True)) + Zmax)
    loss = -(Y * logP).sum() / n + 0.5 * lam * ((W1 * W1).sum() + (W2 * W2).sum())
    dZ = (np.exp(logP) - Y) / n
    gW2 = H.T @ dZ + lam * W2
    gb2 = dZ.sum(axis=0)
    dH = (dZ @ W2.T) * (H_pre > 0)
    gW1 = np.asarray(X.T @ dH) + lam * W1
    gb1 = dH.sum(axis=0)
    return loss, (gW1, gb1, gW2, gb2)


class MLP(Scaled):
    """Mini-batch gradient descent with momentum at a fixed learning rate."""

    name = "MLP"

    def _fit(self, X, y, sample_weight):
        if sample_weight is not None:
            raise ValueError("MLP does not support sample weights")
        p = self.params
        n, d = X.shape
        K = self.n_classes
        h = p["hidden"]
        rng = np.random.default_rng(self.seed)
        # He initialization for the ReLU layer, Glorot for the output layer.
        params = [
            rng.normal(0.0, np.sqrt(2.0 / d), (d, h)),
            np.zeros(h),
            rng.normal(0.0, np.sqrt(2.0 / (h + K)), (h, K)),
            np.zeros(K),
        ]
        velocity = [np.zeros_like(a) for a in params]
        Y = one_hot(y, K)
        lr, mom, bs = p["learning_rate"], p["momentum"], p["batch_size"]
        for _ in range(p["epochs"]):
            order = rng.permutation(n)
            for s in range(0, n, bs):
                idx = order[s : s + bs]
                _, grads = mlp_loss_grad(params, X[idx], Y[idx], p["alpha"])
                for v, a, g in zip(velocity, params, grads):
                    v *= mom
                    v -= lr * g
                    a += v
        self.weights = params

    def _proba(self, X):
        return softmax(mlp_forward(self.weights, X)[2])

    def get_state(self):
        return self._scaled_state({"weights": [a.tolist() for a in self.weights]})

    def set_state(self, state):
        self._load_scaler(state)
        self.weights = [np.array(a, dtype=float) for a in state["weights"]]

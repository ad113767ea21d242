"""Analytic gradients against central finite differences."""
import numpy as np
import pytest

from triage.learners.base import one_hot
from triage.learners.linear import hinge_loss_grad, log_loss_grad, softmax_loss_grad
from triage.learners.mlp import mlp_loss_grad

SEEDS = range(20)
EPS = 1e-6


def _rel_err(a, b):
    a, b = np.ravel(a), np.ravel(b)
    return np.linalg.norm(a - b) / max(np.linalg.norm(a) + np.linalg.norm(b), 1e-12)


def _numeric(f, arrays):
    grads = []
    for arr in arrays:
        g = np.zeros_like(arr)
        it = np.nditer(arr, flags=["multi_index"])
        for _ in it:
            i = it.multi_index
            old = arr[i]
            arr[i] = old + EPS
            up = f()
            arr[i] = old - EPS
            down = f()
            arr[i] = old
            g[i] = (up - down) / (2 * EPS)
        grads.append(g)
    return grads


@pytest.mark.parametrize("seed", SEEDS)
def test_logistic_regression_gradient(seed):
    r = np.random.default_rng(seed)
    n, d, k = 12, 4, 3
    X, W, b = r.normal(size=(n, d)), r.normal(size=(d, k)), r.normal(size=k)
    Y = one_hot(r.integers(0, k, n), k)
    sw = r.uniform(0.5, 2.0, n) if seed % 2 else None
    _, gW, gb = softmax_loss_grad(W, b, X, Y, 0.1, sw)
    nW, nb = _numeric(lambda: softmax_loss_grad(W, b, X, Y, 0.1, sw)[0], [W, b])
    assert _rel_err(gW, nW) < 1e-4
    assert _rel_err(gb, nb) < 1e-4


@pytest.mark.parametrize("seed", SEEDS)
def test_linear_svm_gradient_off_kink(seed):
    r = np.random.default_rng(seed)
    n, d, k = 15, 3, 3
    X, Ypm = r.normal(size=(n, d)), 2.0 * one_hot(r.integers(0, k, n), k) - 1.0
    while True:
        W, b = r.normal(size=(d, k)), r.normal(size=k)
        margins = Ypm * (X @ W + b)
        if np.min(np.abs(margins - 1.0)) > 1e-3:
            break
    _, gW, gb = hinge_loss_grad(W, b, X, Ypm, 0.05)
    nW, nb = _numeric(lambda: hinge_loss_grad(W, b, X, Ypm, 0.05)[0], [W, b])
    assert _rel_err(gW, nW) < 1e-4
    assert _rel_err(gb, nb) < 1e-4


@pytest.mark.parametrize("seed", SEEDS)
def test_log_loss_gradient(seed):
    r = np.random.default_rng(seed)
    X, W, b = r.normal(size=(10, 3)), r.normal(size=(3, 2)), r.normal(size=2)
    Ypm = 2.0 * one_hot(r.integers(0, 2, 10), 2) - 1.0
    _, gW, gb = log_loss_grad(W, b, X, Ypm, 0.2)
    nW, nb = _numeric(lambda: log_loss_grad(W, b, X, Ypm, 0.2)[0], [W, b])
    assert _rel_err(gW, nW) < 1e-4
    assert _rel_err(gb, nb) < 1e-4


@pytest.mark.parametrize("seed", SEEDS)
def test_mlp_gradient(seed):
    r = np.random.default_rng(seed)
    n, d, h, k = 8, 4, 6, 3
    X = r.normal(size=(n, d))
    Y = one_hot(r.integers(0, k, n), k)
    while True:
        params = [r.normal(size=(d, h)), r.normal(size=h), r.normal(size=(h, k)), r.normal(size=k)]
        if np.min(np.abs(X @ params[0] + params[1])) > 1e-3:  # stay off the ReLU kink
            break
    _, grads = mlp_loss_grad(params, X, Y, 0.01)
    numeric = _numeric(lambda: mlp_loss_grad(params, X, Y, 0.01)[0], params)
    for g, ng in zip(grads, numeric):
        assert _rel_err(g, ng) < 1e-4

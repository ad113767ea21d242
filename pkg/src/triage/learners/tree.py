"""CART trees (Gini) and tree ensembles: random forest, extra trees, bagging, SAMME boosting.

Split rule is ``x <= threshold`` where the threshold is always an observed
training value (the left side of a gap between sorted unique values), so a
strictly increasing transform of any column leaves every prediction unchanged.
"""
from __future__ import annotations

import math

import numpy as np
import scipy.sparse as sp

from .base import Estimator, child_seed, normalize_rows, softmax

LEAF = -1
# Columns evaluated together when scanning for the best split.
_BLOCK = 256


def _n_features(max_features, d: int) -> int:
    if max_features is None:
        return d
    if max_features == "sqrt":
        return max(1, int(math.sqrt(d)))
    if max_features == "log2":
        return max(1, int(math.log2(d))) if d > 1 else 1
    return min(int(max_features), d)


def _node_block(X, rows, feats) -> np.ndarray:
    if sp.issparse(X):
        return X[rows][:, feats].toarray()
    return X[np.ix_(rows, feats)]


def _best_exhaustive(Xb, yb, wb, n_classes, min_leaf):
    """Best Gini split over sorted unique values for each column of ``Xb``.

    Returns (score, column, threshold) maximizing sum_c l_c^2/L + sum_c r_c^2/R,
    which is equivalent to minimizing weighted Gini impurity. Ties go to the
    lowest column then the lowest threshold. ``None`` when no valid split exists.
    """
    m, f = Xb.shape
    order = np.argsort(Xb, axis=0, kind="stable")
    xs = np.take_along_axis(Xb, order, axis=0)
    ys = yb[order]
    ws = wb[order]
    left = np.empty((m - 1, f, n_classes))
    for c in range(n_classes):
        left[:, :, c] = np.cumsum(np.where(ys == c, ws, 0.0), axis=0)[:-1]
    total = np.bincount(yb, weights=wb, minlength=n_classes)
    right = total[None, None, :] - left
    wl = left.sum(axis=2)
    wr = right.sum(axis=2)
    valid = xs[:-1] < xs[1:]
    if min_leaf > 1:
        pos = np.arange(1, m)[:, None]
        valid &= (pos >= min_leaf) & (m - pos >= min_leaf)
    if not valid.any():
        return None
    with np.errstate(divide="ignore", invalid="ignore"):
        score = (left**2).sum(axis=2) / wl + (right**2).sum(axis=2) / wr
    score = np.where(valid, score, -np.inf)
    flat = np.argmax(score.T)  # column-major: lowest column first, then lowest position
    col, i = divmod(int(flat), m - 1)
    return float(score[i, col]), col, float(xs[i, col])


def _best_random(Xb, yb, wb, n_classes, min_leaf, rng):
    """Extra-trees style: one random gap between sorted unique values per column."""
    total = np.bincount(yb, weights=wb, minlength=n_classes)
    best = None
    for col in range(Xb.shape[1]):
        x = Xb[:, col]
        uniq = np.unique(x)
        if len(uniq) < 2:
            continue
        thr = float(uniq[rng.integers(len(uniq) - 1)])
        go_left = x <= thr
        nl = int(go_left.sum())
        if nl < min_leaf or len(x) - nl < min_leaf:
            continue
        lw = np.bincount(yb[go_left], weights=wb[go_left], minlength=n_classes)
        rw = total - lw
        score = (lw**2).sum() / lw.sum() + (rw**2).sum() / rw.sum()
        if best is None or score > best[0]:
            best = (score, col, thr)
    return best


class TreeBuilder:
    def __init__(self, n_classes, max_depth=None, min_samples_leaf=1, max_features=None,
                 random_splits=False, rng=None):
        self.n_classes = n_classes
        self.max_depth = max_depth
        self.min_leaf = min_samples_leaf
        self.max_features = max_features
        self.random_splits = random_splits
        self.rng = rng if rng is not None else np.random.default_rng(0)

    def build(self, X, y, w) -> dict[str, np.ndarray]:
        d = X.shape[1]
        k = _n_features(self.max_features, d)
        feature, threshold, left, right, value = [], [], [], [], []

        def new_node():
            feature.append(LEAF)
            threshold.append(0.0)
            left.append(LEAF)
            right.append(LEAF)
            value.append(None)
            return len(feature) - 1

        root = new_node()
        stack = [(root, np.flatnonzero(w > 0), 0)]
        while stack:
            node, rows, depth = stack.pop()
            yb, wb = y[rows], w[rows]
            dist = np.bincount(yb, weights=wb, minlength=self.n_classes)
            value[node] = dist
            if (
                np.count_nonzero(dist) <= 1
                or (self.max_depth is not None and depth >= self.max_depth)
                or len(rows) < 2 * self.min_leaf
            ):
                continue
            split = self._find_split(X, rows, yb, wb, d, k)
            if split is None:
                continue
            col, thr = split
            xcol = _node_block(X, rows, [col])[:, 0]
            go_left = xcol <= thr
            l_node, r_node = new_node(), new_node()
            feature[node], threshold[node], left[node], right[node] = col, thr, l_node, r_node
            # Right pushed first so the left subtree is numbered first.
            stack.append((r_node, rows[~go_left], depth + 1))
            stack.append((l_node, rows[go_left], depth + 1))
        return {
            "feature": np.array(feature, dtype=np.int64),
            "threshold": np.array(threshold, dtype=float),
            "left": np.array(left, dtype=np.int64),
            "right": np.array(right, dtype=np.int64),
            "value": normalize_rows(np.array(value, dtype=float)),
        }

    def _find_split(self, X, rows, yb, wb, d, k):
        if k >= d:
            candidates = np.arange(d)
        else:
            candidates = self.rng.permutation(d)
        best = None
        # Scan candidates in chunks of k until some chunk yields a valid split.
        for start in range(0, d, k):
            chunk = candidates[start : start + k]
            for b in range(0, len(chunk), _BLOCK):
                feats = chunk[b : b + _BLOCK]
                Xb = _node_block(X, rows, feats)
                if self.random_splits:
                    found = _best_random(Xb, yb, wb, self.n_classes, self.min_leaf, self.rng)
                else:
                    found = _best_exhaustive(Xb, yb, wb, self.n_classes, self.min_leaf)
                if found is not None and (best is None or found[0] > best[0]):
                    best = (found[0], int(feats[found[1]]), found[2])
            if best is not None:
                break
        return None if best is None else best[1:]


def tree_apply(tree, X) -> np.ndarray:
    """Leaf index for every row."""
    n = X.shape[0]
    node = np.zeros(n, dtype=np.int64)
    Xc = X.tocsr() if sp.issparse(X) else X
    active = np.flatnonzero(tree["feature"][node] != LEAF)
    while len(active):
        feats = tree["feature"][node[active]]
        if sp.issparse(Xc):
            vals = np.asarray(Xc[active, feats]).ravel()
        else:
            vals = Xc[active, feats]
        go_left = vals <= tree["threshold"][node[active]]
        node[active] = np.where(go_left, tree["left"][node[active]], tree["right"][node[active]])
        active = active[tree["feature"][node[active]] != LEAF]
    return node


def tree_proba(tree, X) -> np.ndarray:
    return tree["value"][tree_apply(tree, X)]


def _tree_state(tree) -> dict:
    return {k: v.tolist() for k, v in tree.items()}


def _tree_from_state(state) -> dict:
    return {
        "feature": np.array(state["feature"], dtype=np.int64),
        "threshold": np.array(state["threshold"], dtype=float),
        "left": np.array(state["left"], dtype=np.int64),
        "right": np.array(state["right"], dtype=np.int64),
        "value": np.array(state["value"], dtype=float),
    }


def _weights(n, sample_weight):
    return np.ones(n) if sample_weight is None else np.asarray(sample_weight, dtype=float)


class DecisionTree(Estimator):
    name = "DecisionTree"

    def _fit(self, X, y, sample_weight):
        p = self.params
        builder = TreeBuilder(
            self.n_classes, p["max_depth"], p["min_samples_leaf"], p.get("max_features"),
            rng=np.random.default_rng(self.seed),
        )
        self.tree = builder.build(X, y, _weights(len(y), sample_weight))

    def _proba(self, X):
        return tree_proba(self.tree, X)

    def depth(self) -> int:
        depths = {0: 0}
        for i, (l, r) in enumerate(zip(self.tree["left"], self.tree["right"])):
            if l != LEAF:
                depths[l] = depths[r] = depths[i] + 1
        return max(depths.values())

    def get_state(self):
        return {"tree": _tree_state(self.tree)}

    def set_state(self, state):
        self.tree = _tree_from_state(state["tree"])


class Forest(Estimator):
    """Averaged tree probabilities; covers RandomForest, ExtraTrees and BaggedTree."""

    random_splits = False

    def _fit(self, X, y, sample_weight):
        p = self.params
        n = len(y)
        base_w = _weights(n, sample_weight)
        self.trees = []
        for t in range(p["n_estimators"]):
            rng = np.random.default_rng(child_seed(self.seed, t))
            w = base_w
            if p.get("bootstrap", True):
                draws = rng.integers(0, n, n)
                w = base_w * np.bincount(draws, minlength=n)
            builder = TreeBuilder(
                self.n_classes, p["max_depth"], p["min_samples_leaf"], p.get("max_features"),
                random_splits=self.random_splits, rng=rng,
            )
            self.trees.append(builder.build(X, y, w))

    def _proba(self, X):
        P = np.zeros((X.shape[0], self.n_classes))
        for tree in self.trees:
            P += tree_proba(tree, X)
        return P / len(self.trees)

    def get_state(self):
        return {"trees": [_tree_state(t) for t in self.trees]}

    def set_state(self, state):
        self.trees = [_tree_from_state(t) for t in state["trees"]]


class RandomForest(Forest):
    name = "RandomForest"


class ExtraTrees(Forest):
    name = "ExtraTrees"
    random_splits = True


class BaggedTree(Forest):
    name = "BaggedTree"

    def __init__(self, params=None, seed=0):
        super().__init__({**(params or {}), "bootstrap": True, "max_features": None}, seed)


class Boosted(Estimator):
    """SAMME multi-class AdaBoost over depth-limited CART trees."""

    name = "Boosted"

    def _fit(self, X, y, sample_weight):
        p = self.params
        n = len(y)
        K = max(2, len(np.unique(y)))
        w = _weights(n, sample_weight)
        w = w / w.sum()
        self.trees, self.alphas = [], []
        for m in range(p["n_estimators"]):
            builder = TreeBuilder(
                self.n_classes, p["max_depth"], p["min_samples_leaf"], None,
                rng=np.random.default_rng(child_seed(self.seed, m)),
            )
            tree = builder.build(X, y, w)
            wrong = np.argmax(tree_proba(tree, X), axis=1) != y
            err = float(w[wrong].sum() / w.sum())
            if err <= 0.0:
                self.trees.append(tree)
                self.alphas.append(1.0)
                break
            if err >= 1.0 - 1.0 / K:
                if not self.trees:
                    self.trees.append(tree)
                    self.alphas.append(1.0)
                break
            alpha = p["learning_rate"] * (math.log((1.0 - err) / err) + math.log(K - 1.0))
            self.trees.append(tree)
            self.alphas.append(alpha)
            w = w * np.exp(alpha * wrong)
            w = w / w.sum()
        self.K = K

    def decision_function(self, X, n_rounds=None):
        trees = self.trees[:n_rounds]
        alphas = self.alphas[:n_rounds]
        D = np.zeros((X.shape[0], self.n_classes))
        for tree, a in zip(trees, alphas):
            pred = np.argmax(tree_proba(tree, X), axis=1)
            D[np.arange(X.shape[0]), pred] += a
        return D / sum(alphas)

    def staged_predict(self, X):
        for r in range(1, len(self.trees) + 1):
            yield np.argmax(self.decision_function(X, r), axis=1)

    def _proba(self, X):
        return softmax(self.decision_function(X) / (self.K - 1))

    def get_state(self):
        return {"trees": [_tree_state(t) for t in self.trees], "alphas": list(self.alphas), "K": self.K}

    def set_state(self, state):
        self.trees = [_tree_from_state(t) for t in state["trees"]]
        self.alphas = [float(a) for a in state["alphas"]]
        self.K = int(state["K"])

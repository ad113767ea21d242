"""Cross-validated evaluation, grid search, 5x2cv F-test and feature importance."""
from __future__ import annotations

import copy
import enum
import itertools
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Mapping, Sequence

import numpy as np
import scipy.optimize

from .corpus import FoldPlan, stratified_split
from .errors import BadK, FoldError, LengthMismatch
from .features import FeatureMatrix
from .learners import ModelSpec, fit, predict
from .learners.base import child_seed
from .learners.linear import log_loss_grad


# ---------------------------------------------------------------- metrics


@dataclass
class MetricsReport:
    confusion: np.ndarray
    class_names: list[str] | None = None
    fold_accuracies: list[float] = field(default_factory=list)

    def __post_init__(self):
        self.confusion = np.asarray(self.confusion, dtype=np.int64)
        if self.class_names is None:
            self.class_names = [str(i) for i in range(self.n_classes)]

    @property
    def n_classes(self) -> int:
        return self.confusion.shape[0]

    @property
    def total(self) -> int:
        return int(self.confusion.sum())

    @property
    def accuracy(self) -> float:
        return float(np.trace(self.confusion) / self.total) if self.total else 0.0

    @property
    def mean_fold_accuracy(self) -> float | None:
        return float(np.mean(self.fold_accuracies)) if self.fold_accuracies else None

    @property
    def support(self) -> dict[str, int]:
        return {c: int(s) for c, s in zip(self.class_names, self.confusion.sum(axis=1))}

    @property
    def per_class(self) -> dict[str, tuple[float, float, float]]:
        out = {}
        for i, name in enumerate(self.class_names):
            tp = self.confusion[i, i]
            fp = self.confusion[:, i].sum() - tp
            fn = self.confusion[i, :].sum() - tp
            p = tp / (tp + fp) if tp + fp else 0.0
            r = tp / (tp + fn) if tp + fn else 0.0
            f1 = 2 * p * r / (p + r) if p + r else 0.0
            out[name] = (float(p), float(r), float(f1))
        return out

    def to_dict(self) -> dict:
        return {
            "accuracy": self.accuracy,
            "mean_fold_accuracy": self.mean_fold_accuracy,
            "fold_accuracies": list(self.fold_accuracies),
            "class_names": list(self.class_names),
            "confusion": self.confusion.tolist(),
            "support": self.support,
            "per_class": {c: {"precision": p, "recall": r, "f1": f} for c, (p, r, f) in self.per_class.items()},
        }

    def confusion_csv(self) -> str:
        lines = ["true\\pred," + ",".join(self.class_names)]
        for name, row in zip(self.class_names, self.confusion):
            lines.append(name + "," + ",".join(str(int(v)) for v in row))
        return "\n".join(lines) + "\n"

    def table(self) -> str:
        lines = [f"{'Class':<12}{'Precision':>10}{'Recall':>10}{'F1':>10}{'Support':>10}"]
        for name, (p, r, f1) in self.per_class.items():
            lines.append(f"{name:<12}{p:>10.2f}{r:>10.2f}{f1:>10.2f}{self.support[name]:>10d}")
        lines.append(f"{'Accuracy':<12}{self.accuracy:>10.4f}")
        if self.fold_accuracies:
            lines.append(f"{'Fold mean':<12}{self.mean_fold_accuracy:>10.4f}")
        return "\n".join(lines)


def compute_metrics(y_true, y_pred, n_classes: int, class_names: list[str] | None = None) -> MetricsReport:
    y_true = np.asarray(y_true, dtype=np.int64)
    y_pred = np.asarray(y_pred, dtype=np.int64)
    if len(y_true) != len(y_pred):
        raise LengthMismatch(f"{len(y_true)} true labels vs {len(y_pred)} predictions")
    if len(y_true) == 0:
        raise LengthMismatch("need at least one prediction")
    confusion = np.zeros((n_classes, n_classes), dtype=np.int64)
    np.add.at(confusion, (y_true, y_pred), 1)
    return MetricsReport(confusion, class_names)


# ---------------------------------------------------------------- cross-validation


def _fold_data(X, featurizer, train, test):
    """Training/test matrices for one fold; featurizers are refit on the training rows only."""
    if featurizer is None:
        if isinstance(X, FeatureMatrix):
            return X.take(train), X.take(test)
        X = np.asarray(X, dtype=float)
        return X[train], X[test]
    fz = copy.copy(featurizer)
    records = list(X)
    fz.fit([records[i] for i in train])
    return fz.transform([records[i] for i in train]), fz.transform([records[i] for i in test])


def _fit_predict(spec, Xtr, ytr, Xte, n_classes):
    return predict(fit(spec, Xtr, ytr, n_classes), Xte)


def _run_jobs(tasks, jobs: int):
    if jobs <= 1 or len(tasks) <= 1:
        return [_fit_predict(*t) for t in tasks]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        futures = [pool.submit(_fit_predict, *t) for t in tasks]
        return [f.result() for f in futures]


def cross_validate(spec: ModelSpec, X, y, folds: FoldPlan, *, featurizer=None, n_classes: int | None = None,
                   class_names: list[str] | None = None, jobs: int = 1) -> MetricsReport:
    """Pooled confusion over held-out folds, plus per-fold accuracies.

    ``X`` is a feature matrix, or a record sequence when ``featurizer`` is given.
    """
    y = np.asarray(y, dtype=np.int64)
    n_classes = int(n_classes or y.max() + 1)
    tasks = []
    for i, (train, test) in enumerate(folds):
        try:
            Xtr, Xte = _fold_data(X, featurizer, train, test)
        except Exception as exc:
            raise FoldError(i, exc) from exc
        tasks.append((spec, Xtr, y[train], Xte, n_classes))
    try:
        preds = _run_jobs(tasks, jobs)
    except Exception as exc:
        # Re-run serially to find the failing fold for the diagnostic.
        for i, t in enumerate(tasks):
            try:
                _fit_predict(*t)
            except Exception as inner:
                raise FoldError(i, inner) from inner
        raise
    pooled_true = np.concatenate([y[test] for _, test in folds])
    pooled_pred = np.concatenate(preds)
    report = compute_metrics(pooled_true, pooled_pred, n_classes, class_names)
    report.fold_accuracies = [float(np.mean(p == y[test])) for p, (_, test) in zip(preds, folds)]
    return report


@dataclass
class GridSearchResult:
    grid: list[tuple[dict[str, Any], float]]
    best: dict[str, Any]

    @property
    def best_score(self) -> float:
        return max(score for _, score in self.grid)

    def to_csv(self) -> str:
        keys = sorted({k for params, _ in self.grid for k in params})
        lines = [",".join(keys + ["mean_accuracy"])]
        for params, score in self.grid:
            lines.append(",".join([str(params.get(k)) for k in keys] + [repr(score)]))
        return "\n".join(lines) + "\n"


def grid_search(spec_template: ModelSpec, grid: Mapping[str, Sequence], X, y, k: int = 10, seed: int = 0, *,
                featurizer=None, n_classes: int | None = None, jobs: int = 1) -> GridSearchResult:
    """Score every grid point by mean k-fold accuracy on one shared fold plan."""
    if not grid or any(len(v) == 0 for v in grid.values()):
        raise ValueError("grid must name at least one value per hyperparameter")
    if k < 2:
        raise BadK("grid search needs k >= 2")
    y = np.asarray(y, dtype=np.int64)
    plan = stratified_split(y, k, seed)
    names = list(grid)
    rows = []
    for combo in itertools.product(*(grid[n] for n in names)):
        params = dict(zip(names, combo))
        report = cross_validate(spec_template.with_params(**params), X, y, plan,
                                featurizer=featurizer, n_classes=n_classes, jobs=jobs)
        rows.append((params, report.mean_fold_accuracy))
    best_score = max(s for _, s in rows)
    best = next(p for p, s in rows if s == best_score)
    return GridSearchResult(rows, best)


DEFAULT_GRIDS: dict[str, dict[str, list]] = {
    "RandomForest": {"n_estimators": [100, 300], "max_depth": [None, 16]},
    "ExtraTrees": {"n_estimators": [100, 300], "max_depth": [None, 16]},
    "LinearSVM": {"C": [0.01, 0.1, 1.0, 10.0]},
    "LogisticRegression": {"C": [0.01, 0.1, 1.0, 10.0]},
    "SGDLinear": {"C": [0.01, 0.1, 1.0, 10.0]},
    "KNN": {"n_neighbors": [3, 5, 11]},
    "DecisionTree": {"max_depth": [None, 8, 16]},
    "MLP": {"hidden": [50, 100]},
}


# ---------------------------------------------------------------- 5x2cv F-test


def _betacf(a: float, b: float, x: float) -> float:
    """Continued fraction for the incomplete beta function (modified Lentz)."""
    tiny = 1e-300
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    d = tiny if abs(d) < tiny else d
    d = 1.0 / d
    h = d
    for m in range(1, 10_000):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        d = tiny if abs(d) < tiny else d
        c = 1.0 + aa / c
        c = tiny if abs(c) < tiny else c
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        d = tiny if abs(d) < tiny else d
        c = 1.0 + aa / c
        c = tiny if abs(c) < tiny else c
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < 1e-15:
            break
    return h


def regularized_incomplete_beta(a: float, b: float, x: float) -> float:
    if x <= 0.0:
        return 0.0
    if x >= 1.0:
        return 1.0
    log_front = (
        math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b) + a * math.log(x) + b * math.log1p(-x)
    )
    front = math.exp(log_front)
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _betacf(a, b, x) / a
    return 1.0 - front * _betacf(b, a, 1.0 - x) / b


def f_upper_tail(f: float, d1: int, d2: int) -> float:
    """P(F > f) for the F(d1, d2) distribution."""
    if f <= 0.0:
        return 1.0
    if math.isinf(f):
        return 0.0
    x = d2 / (d2 + d1 * f)
    return min(1.0, max(0.0, regularized_incomplete_beta(d2 / 2.0, d1 / 2.0, x)))


class Decision(enum.Enum):
    REJECT = "Reject"
    ACCEPT = "Accept"


@dataclass
class FiveByTwoResult:
    p: np.ndarray  # 5x2 error-rate differences, A minus B
    s2: np.ndarray
    f: float
    p_value: float
    alpha: float
    decision: Decision
    degenerate: bool = False
    errors_a: np.ndarray | None = None
    errors_b: np.ndarray | None = None

    def to_dict(self) -> dict:
        return {
            "p": self.p.tolist(),
            "s2": self.s2.tolist(),
            "f": None if math.isnan(self.f) else self.f,
            "p_value": self.p_value,
            "alpha": self.alpha,
            "decision": self.decision.value,
            "degenerate": self.degenerate,
            "errors_a": None if self.errors_a is None else self.errors_a.tolist(),
            "errors_b": None if self.errors_b is None else self.errors_b.tolist(),
        }


def five_by_two_statistic(p, alpha: float = 0.05) -> FiveByTwoResult:
    """Combined F statistic from a 5x2 table of error-rate differences."""
    p = np.asarray(p, dtype=float).reshape(5, 2)
    mean = (p[:, 0] + p[:, 1]) / 2.0
    s2 = (p[:, 0] - mean) ** 2 + (p[:, 1] - mean) ** 2
    denom = 2.0 * float(np.sum(s2))
    numer = float(np.sum(p**2))
    if denom == 0.0:
        if numer == 0.0:
            return FiveByTwoResult(p, s2, float("nan"), 1.0, alpha, Decision.ACCEPT, degenerate=True)
        return FiveByTwoResult(p, s2, float("inf"), 0.0, alpha, Decision.REJECT, degenerate=True)
    f = numer / denom
    pv = f_upper_tail(f, 10, 5)
    return FiveByTwoResult(p, s2, f, pv, alpha, Decision.REJECT if pv < alpha else Decision.ACCEPT)


def five_by_two_ftest(spec_a: ModelSpec, spec_b: ModelSpec, X, y, alpha: float = 0.05, seed: int = 0, *,
                      featurizer=None, n_classes: int | None = None, jobs: int = 1) -> FiveByTwoResult:
    """Five seeded stratified halvings; each half serves once as training and once as test."""
    y = np.asarray(y, dtype=np.int64)
    n_classes = int(n_classes or y.max() + 1)
    tasks, tests = [], []
    for i in range(5):
        plan = stratified_split(y, 2, child_seed(seed, i))
        for j in range(2):
            train, test = plan.split(j)
            Xtr, Xte = _fold_data(X, featurizer, train, test)
            for spec in (spec_a, spec_b):
                tasks.append((spec, Xtr, y[train], Xte, n_classes))
            tests.append(test)
    preds = _run_jobs(tasks, jobs)
    err = np.array([np.mean(pred != y[tests[t // 2]]) for t, pred in enumerate(preds)]).reshape(5, 2, 2)
    errors_a, errors_b = err[:, :, 0], err[:, :, 1]
    result = five_by_two_statistic(errors_a - errors_b, alpha)
    result.errors_a, result.errors_b = errors_a, errors_b
    return result


# ---------------------------------------------------------------- feature importance


class ImportanceMethod(enum.Enum):
    TARGET_COEFFICIENT = "TargetCoefficient"
    MODEL_WEIGHTS = "ModelWeights"


@dataclass
class ImportanceReport:
    scores: dict[str, float]
    method: ImportanceMethod = ImportanceMethod.TARGET_COEFFICIENT

    @property
    def ranking(self) -> list[str]:
        return sorted(self.scores, key=lambda c: (-abs(self.scores[c]), c))

    def to_dict(self) -> dict:
        return {
            "method": self.method.value,
            "ranking": self.ranking,
            "scores": {c: self.scores[c] for c in self.ranking},
        }


def anova_f(X: np.ndarray, y: np.ndarray) -> np.ndarray:
    """One-way ANOVA F per column; constant columns score 0, perfectly separated ones inf."""
    classes = np.unique(y)
    n, k = len(y), len(classes)
    scores = np.zeros(X.shape[1])
    if k < 2 or n <= k:
        return scores
    grand = X.mean(axis=0)
    ssb = np.zeros(X.shape[1])
    ssw = np.zeros(X.shape[1])
    for c in classes:
        Xc = X[y == c]
        mc = Xc.mean(axis=0)
        ssb += len(Xc) * (mc - grand) ** 2
        ssw += ((Xc - mc) ** 2).sum(axis=0)
    between = ssb / (k - 1)
    within = ssw / (n - k)
    for j in range(X.shape[1]):
        if between[j] <= 0:
            scores[j] = 0.0
        elif within[j] <= 0:
            scores[j] = math.inf
        else:
            scores[j] = between[j] / within[j]
    return scores


def _binary_logistic_weights(Z: np.ndarray, t: np.ndarray, C: float = 1.0) -> np.ndarray:
    n, d = Z.shape
    ypm = (2.0 * t - 1.0)[:, None]
    lam = 1.0 / (C * n)

    def objective(theta):
        loss, gW, gb = log_loss_grad(theta[:d, None], theta[d:], Z, ypm, lam)
        return loss, np.concatenate([gW.ravel(), gb])

    res = scipy.optimize.minimize(objective, np.zeros(d + 1), jac=True, method="L-BFGS-B",
                                  options={"maxiter": 1000, "gtol": 1e-8})
    return res.x[:d]


def feature_importance(X: FeatureMatrix, y, method: ImportanceMethod | str = ImportanceMethod.TARGET_COEFFICIENT) -> ImportanceReport:
    method = ImportanceMethod(method)
    values = X.dense()
    y = np.asarray(y, dtype=np.int64)
    if method is ImportanceMethod.TARGET_COEFFICIENT:
        scores = anova_f(values, y)
    else:
        std = values.std(axis=0)
        Z = np.where(std > 0, (values - values.mean(axis=0)) / np.where(std > 0, std, 1.0), 0.0)
        classes = np.unique(y)
        if len(classes) < 2:
            scores = np.zeros(values.shape[1])
        elif len(classes) == 2:
            scores = np.abs(_binary_logistic_weights(Z, (y == classes[1]).astype(float)))
        else:
            scores = np.mean([np.abs(_binary_logistic_weights(Z, (y == c).astype(float))) for c in classes], axis=0)
    return ImportanceReport({c: float(s) for c, s in zip(X.column_names, scores)}, method)


def select_top_k(report: ImportanceReport, k: int = 8) -> list[str]:
    if not 1 <= k <= len(report.scores):
        raise BadK(f"k must be between 1 and {len(report.scores)}")
    return report.ranking[:k]

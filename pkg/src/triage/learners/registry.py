"""Spec -> estimator construction and (de)serialization of fitted estimators."""
from __future__ import annotations

import numpy as np

from .base import Constant, Estimator
from .bayes import GaussianNB, MultinomialNB
from .ensemble import OneVsRest, Stacking, VotingHard, VotingSoft
from .linear import LinearSVM, LogisticRegression, SGDLinear
from .mlp import MLP
from .neighbors import KNN
from .spec import Algorithm, ModelSpec
from .tree import BaggedTree, Boosted, DecisionTree, ExtraTrees, RandomForest

ESTIMATORS: dict[Algorithm, type[Estimator]] = {
    Algorithm.GAUSSIAN_NB: GaussianNB,
    Algorithm.MULTINOMIAL_NB: MultinomialNB,
    Algorithm.LOGISTIC_REGRESSION: LogisticRegression,
    Algorithm.LINEAR_SVM: LinearSVM,
    Algorithm.SGD_LINEAR: SGDLinear,
    Algorithm.KNN: KNN,
    Algorithm.DECISION_TREE: DecisionTree,
    Algorithm.RANDOM_FOREST: RandomForest,
    Algorithm.EXTRA_TREES: ExtraTrees,
    Algorithm.BAGGED_TREE: BaggedTree,
    Algorithm.BOOSTED: Boosted,
    Algorithm.VOTING_SOFT: VotingSoft,
    Algorithm.VOTING_HARD: VotingHard,
    Algorithm.STACKING: Stacking,
    Algorithm.ONE_VS_REST: OneVsRest,
    Algorithm.MLP: MLP,
}


def build_estimator(spec: ModelSpec) -> Estimator:
    cls = ESTIMATORS[spec.algorithm]
    if spec.base_specs:
        return cls(spec.params, spec.seed, spec=spec)
    return cls(spec.params, spec.seed)


def fit_estimator(spec: ModelSpec, X, y, n_classes: int, sample_weight=None) -> Estimator:
    y = np.asarray(y, dtype=np.int64)
    if len(np.unique(y)) == 1:
        return Constant().fit(X, y, n_classes)
    return build_estimator(spec).fit(X, y, n_classes, sample_weight)


def estimator_state(est: Estimator) -> dict:
    return {"kind": est.name, "n_classes": est.n_classes, "state": est.get_state()}


def restore_estimator(spec: ModelSpec, doc: dict) -> Estimator:
    est = Constant() if doc["kind"] == "Constant" else build_estimator(spec)
    if doc["kind"] not in ("Constant", est.name):
        raise ValueError(f"state is for {doc['kind']}, spec builds {est.name}")
    est.n_classes = int(doc["n_classes"])
    est.set_state(doc["state"])
    return est

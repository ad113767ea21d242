"""Meta-estimators built from other specs: voting, stacking, one-vs-rest."""
from __future__ import annotations

import numpy as np

from ..corpus import stratified_split
from .base import Estimator, argmax_lowest, normalize_rows


def _registry():
    from . import registry

    return registry


class _Composite(Estimator):
    def __init__(self, params=None, seed=0, spec=None):
        super().__init__(params, seed)
        self.spec = spec

    def _child_state(self, est):
        return _registry().estimator_state(est)

    def _restore(self, spec, doc):
        return _registry().restore_estimator(spec, doc)


class Voting(_Composite):
    hard = False

    def _fit(self, X, y, sample_weight):
        fit = _registry().fit_estimator
        self.members = [fit(b, X, y, self.n_classes, sample_weight) for b in self.spec.base_specs]

    def _weights(self):
        w = self.params.get("weights")
        return np.ones(len(self.members)) if w is None else np.asarray(w, dtype=float)

    def _proba(self, X):
        w = self._weights()
        if not self.hard:
            P = sum(wi * m.predict_proba(X) for wi, m in zip(w, self.members))
            return P / w.sum()
        votes = np.zeros((X.shape[0], self.n_classes))
        for wi, m in zip(w, self.members):
            votes[np.arange(X.shape[0]), m.predict(X)] += wi
        winner = argmax_lowest(votes)
        P = np.zeros_like(votes)
        P[np.arange(X.shape[0]), winner] = 1.0
        return P

    def get_state(self):
        return {"members": [self._child_state(m) for m in self.members]}

    def set_state(self, state):
        self.members = [self._restore(b, d) for b, d in zip(self.spec.base_specs, state["members"])]


class VotingSoft(Voting):
    name = "VotingSoft"


class VotingHard(Voting):
    """Majority vote; probabilities are the one-hot winner (lowest code on ties)."""

    name = "VotingHard"
    hard = True


def out_of_fold_proba(base_specs, X, y, folds, n_classes, return_models=False):
    """Meta-feature matrix: each row holds base probabilities from models that never saw it."""
    fit = _registry().fit_estimator
    blocks = np.zeros((X.shape[0], n_classes * len(base_specs)))
    models = []
    for f, (train, test) in enumerate(folds):
        fold_models = []
        for b, spec in enumerate(base_specs):
            model = fit(spec, X[train], y[train], n_classes)
            blocks[test, b * n_classes : (b + 1) * n_classes] = model.predict_proba(X[test])
            fold_models.append(model)
        models.append(fold_models)
    return (blocks, models) if return_models else blocks


class Stacking(_Composite):
    """Meta-learner over out-of-fold base probabilities; bases refit on all rows for inference."""

    name = "Stacking"

    def _fit(self, X, y, sample_weight):
        if sample_weight is not None:
            raise ValueError("Stacking does not support sample weights")
        reg = _registry()
        k = min(self.params["folds"], len(y))
        folds = stratified_split(y, k, self.seed)
        meta_X = out_of_fold_proba(self.spec.base_specs, X, y, folds, self.n_classes)
        self.bases = [reg.fit_estimator(b, X, y, self.n_classes) for b in self.spec.base_specs]
        self.meta = reg.fit_estimator(self.spec.meta_spec, meta_X, y, self.n_classes)

    def meta_features(self, X) -> np.ndarray:
        return np.hstack([b.predict_proba(X) for b in self.bases])

    def _proba(self, X):
        return self.meta.predict_proba(self.meta_features(X))

    def get_state(self):
        return {"bases": [self._child_state(b) for b in self.bases], "meta": self._child_state(self.meta)}

    def set_state(self, state):
        self.bases = [self._restore(b, d) for b, d in zip(self.spec.base_specs, state["bases"])]
        self.meta = self._restore(self.spec.meta_spec, state["meta"])


class OneVsRest(_Composite):
    """One binary base model per class; a two-class problem uses a single base model."""

    name = "OneVsRest"

    def _fit(self, X, y, sample_weight):
        fit = _registry().fit_estimator
        base = self.spec.base_specs[0]
        if self.n_classes == 2:
            self.members = [fit(base, X, y, 2, sample_weight)]
            return
        self.members = [
            fit(base, X, (y == c).astype(np.int64), 2, sample_weight) for c in range(self.n_classes)
        ]

    def _proba(self, X):
        if len(self.members) == 1:
            return self.members[0].predict_proba(X)
        return normalize_rows(np.column_stack([m.predict_proba(X)[:, 1] for m in self.members]))

    def get_state(self):
        return {"members": [self._child_state(m) for m in self.members]}

    def set_state(self, state):
        base = self.spec.base_specs[0]
        self.members = [self._restore(base, d) for d in state["members"]]

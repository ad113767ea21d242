"""Declarative model specifications, default hyperparameters and named presets."""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Any, Mapping

from ..errors import BadHyperparameter


class Algorithm(enum.Enum):
    GAUSSIAN_NB = "GaussianNB"
    MULTINOMIAL_NB = "MultinomialNB"
    LOGISTIC_REGRESSION = "LogisticRegression"
    LINEAR_SVM = "LinearSVM"
    SGD_LINEAR = "SGDLinear"
    KNN = "KNN"
    DECISION_TREE = "DecisionTree"
    RANDOM_FOREST = "RandomForest"
    EXTRA_TREES = "ExtraTrees"
    BAGGED_TREE = "BaggedTree"
    BOOSTED = "Boosted"
    VOTING_SOFT = "VotingSoft"
    VOTING_HARD = "VotingHard"
    STACKING = "Stacking"
    ONE_VS_REST = "OneVsRest"
    MLP = "MLP"


_TREE = {"max_depth": None, "min_samples_leaf": 1}

DEFAULTS: dict[Algorithm, dict[str, Any]] = {
    Algorithm.GAUSSIAN_NB: {"var_smoothing": 1e-9},
    Algorithm.MULTINOMIAL_NB: {"alpha": 1.0},
    Algorithm.LOGISTIC_REGRESSION: {"C": 1.0, "max_iter": 500, "tol": 1e-7, "standardize": True},
    Algorithm.LINEAR_SVM: {"C": 1.0, "epochs": 30, "batch_size": 32, "eta0": 0.1, "standardize": True},
    Algorithm.SGD_LINEAR: {"C": 1.0, "epochs": 30, "batch_size": 32, "eta0": 0.1, "standardize": True},
    Algorithm.KNN: {"n_neighbors": 5, "standardize": True},
    Algorithm.DECISION_TREE: {**_TREE, "max_features": None},
    Algorithm.RANDOM_FOREST: {**_TREE, "n_estimators": 100, "max_features": "sqrt", "bootstrap": True},
    Algorithm.EXTRA_TREES: {**_TREE, "n_estimators": 100, "max_features": "sqrt", "bootstrap": False},
    Algorithm.BAGGED_TREE: {**_TREE, "n_estimators": 10},
    Algorithm.BOOSTED: {"n_estimators": 50, "learning_rate": 1.0, "max_depth": 3, "min_samples_leaf": 1},
    Algorithm.VOTING_SOFT: {"weights": None},
    Algorithm.VOTING_HARD: {"weights": None},
    Algorithm.STACKING: {"folds": 5},
    Algorithm.ONE_VS_REST: {},
    Algorithm.MLP: {
        "hidden": 100,
        "epochs": 200,
        "batch_size": 32,
        "learning_rate": 0.01,
        "momentum": 0.9,
        "alpha": 1e-4,
        "standardize": True,
    },
}

ENSEMBLES = {
    Algorithm.VOTING_SOFT,
    Algorithm.VOTING_HARD,
    Algorithm.STACKING,
    Algorithm.ONE_VS_REST,
}


def _check_positive(name, value, integer=False, allow_none=False):
    if value is None and allow_none:
        return
    ok = isinstance(value, (int, float)) and not isinstance(value, bool) and value > 0
    if integer:
        ok = ok and float(value).is_integer()
    if not ok:
        raise BadHyperparameter(f"{name} must be a positive {'integer' if integer else 'number'}, got {value!r}")


_INTEGER = {"max_iter", "epochs", "batch_size", "n_neighbors", "min_samples_leaf", "n_estimators", "folds", "hidden"}


def _validate_value(name: str, value: Any) -> None:
    if name in _INTEGER:
        _check_positive(name, value, integer=True)
    elif name == "max_depth":
        _check_positive(name, value, integer=True, allow_none=True)
    elif name == "max_features":
        if value not in (None, "sqrt", "log2"):
            _check_positive(name, value, integer=True)
    elif name in ("C", "alpha", "eta0", "learning_rate", "tol"):
        _check_positive(name, value)
    elif name == "var_smoothing":
        if not isinstance(value, (int, float)) or value < 0:
            raise BadHyperparameter(f"var_smoothing must be >= 0, got {value!r}")
    elif name == "momentum":
        if not isinstance(value, (int, float)) or not 0 <= value < 1:
            raise BadHyperparameter(f"momentum must be in [0, 1), got {value!r}")
    elif name in ("standardize", "bootstrap"):
        if not isinstance(value, bool):
            raise BadHyperparameter(f"{name} must be a boolean, got {value!r}")
    elif name == "weights":
        if value is not None and (not isinstance(value, (list, tuple)) or any(w < 0 for w in value)):
            raise BadHyperparameter("weights must be a list of non-negative numbers")


@dataclass(frozen=True)
class ModelSpec:
    algorithm: Algorithm
    hyperparameters: Mapping[str, Any] = field(default_factory=dict)
    base_specs: tuple["ModelSpec", ...] = ()
    seed: int = 0
    # Stacking meta-learner; logistic regression when omitted.
    meta: "ModelSpec | None" = None

    def __post_init__(self):
        object.__setattr__(self, "algorithm", Algorithm(self.algorithm))
        object.__setattr__(self, "hyperparameters", dict(self.hyperparameters))
        object.__setattr__(self, "base_specs", tuple(self.base_specs))
        allowed = DEFAULTS[self.algorithm]
        for name, value in self.hyperparameters.items():
            if name not in allowed:
                raise BadHyperparameter(f"{self.algorithm.value} has no hyperparameter {name!r}")
            _validate_value(name, value)
        if self.algorithm in ENSEMBLES:
            if not self.base_specs:
                raise BadHyperparameter(f"{self.algorithm.value} needs base_specs")
            if self.algorithm is Algorithm.STACKING and len(self.base_specs) < 2:
                raise BadHyperparameter("Stacking needs at least two base specs")
            if self.algorithm is Algorithm.ONE_VS_REST and len(self.base_specs) != 1:
                raise BadHyperparameter("OneVsRest takes exactly one base spec")
            weights = self.params.get("weights")
            if weights is not None and len(weights) != len(self.base_specs):
                raise BadHyperparameter("weights must match base_specs in length")
        elif self.base_specs:
            raise BadHyperparameter(f"{self.algorithm.value} does not take base_specs")
        if self.meta is not None and self.algorithm is not Algorithm.STACKING:
            raise BadHyperparameter("only Stacking takes a meta spec")

    @property
    def params(self) -> dict[str, Any]:
        return {**DEFAULTS[self.algorithm], **self.hyperparameters}

    def with_params(self, **updates) -> "ModelSpec":
        return ModelSpec(self.algorithm, {**self.hyperparameters, **updates}, self.base_specs, self.seed, self.meta)

    def with_seed(self, seed: int) -> "ModelSpec":
        return ModelSpec(self.algorithm, self.hyperparameters, self.base_specs, seed, self.meta)

    @property
    def meta_spec(self) -> "ModelSpec":
        return self.meta or ModelSpec(Algorithm.LOGISTIC_REGRESSION, seed=self.seed)

    def to_dict(self) -> dict:
        d: dict[str, Any] = {
            "algorithm": self.algorithm.value,
            "hyperparameters": {k: self.hyperparameters[k] for k in sorted(self.hyperparameters)},
            "seed": self.seed,
        }
        if self.base_specs:
            d["base_specs"] = [b.to_dict() for b in self.base_specs]
        if self.meta is not None:
            d["meta"] = self.meta.to_dict()
        return d

    @classmethod
    def from_dict(cls, d: Mapping) -> "ModelSpec":
        hp = dict(d.get("hyperparameters", {}))
        if isinstance(hp.get("weights"), list):
            hp["weights"] = tuple(hp["weights"])
        return cls(
            Algorithm(d["algorithm"]),
            hp,
            tuple(cls.from_dict(b) for b in d.get("base_specs", ())),
            int(d.get("seed", 0)),
            cls.from_dict(d["meta"]) if d.get("meta") else None,
        )


def _spec(alg: Algorithm, seed: int, **hp) -> ModelSpec:
    return ModelSpec(alg, hp, seed=seed)


def preset(name: str, seed: int = 42) -> ModelSpec:
    """Named specs covering the shallow and ensemble rows of the comparison table."""
    A = Algorithm
    if name not in PRESET_NAMES:
        raise KeyError(name)
    if name == "svm":
        return _spec(A.LINEAR_SVM, seed)
    if name == "lr":
        return _spec(A.LOGISTIC_REGRESSION, seed)
    if name == "nb":
        return _spec(A.GAUSSIAN_NB, seed)
    if name == "mnb":
        return _spec(A.MULTINOMIAL_NB, seed)
    if name == "mlp":
        return _spec(A.MLP, seed)
    if name == "sgd":
        return _spec(A.SGD_LINEAR, seed)
    if name == "dt":
        return _spec(A.DECISION_TREE, seed)
    if name == "rf":
        return _spec(A.RANDOM_FOREST, seed)
    if name == "knn":
        return _spec(A.KNN, seed)
    if name == "ovr":
        return ModelSpec(A.ONE_VS_REST, base_specs=(_spec(A.LINEAR_SVM, seed),), seed=seed)
    if name in ("voting-soft", "voting-hard"):
        bases = (_spec(A.LOGISTIC_REGRESSION, seed), _spec(A.RANDOM_FOREST, seed), _spec(A.KNN, seed))
        alg = A.VOTING_SOFT if name == "voting-soft" else A.VOTING_HARD
        return ModelSpec(alg, base_specs=bases, seed=seed)
    if name == "boosting":
        return _spec(A.BOOSTED, seed)
    if name == "bagging":
        return _spec(A.BAGGED_TREE, seed)
    if name == "extra-trees":
        return _spec(A.EXTRA_TREES, seed)
    # stacking
    bases = (_spec(A.RANDOM_FOREST, seed), _spec(A.LINEAR_SVM, seed))
    return ModelSpec(A.STACKING, base_specs=bases, seed=seed, meta=_spec(A.LOGISTIC_REGRESSION, seed))


PRESET_NAMES = (
    "svm", "lr", "nb", "mnb", "mlp", "sgd", "dt", "rf", "knn", "ovr",
    "voting-soft", "voting-hard", "boosting", "bagging", "extra-trees", "stacking",
)

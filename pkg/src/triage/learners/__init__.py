"""Classifiers behind a uniform fit / predict / predict_proba contract."""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from ..errors import DegenerateData, LengthMismatch, SchemaMismatch, VersionMismatch
from ..features import FeatureMatrix
from .base import argmax_lowest
from .ensemble import out_of_fold_proba
from .registry import estimator_state, fit_estimator, restore_estimator
from .spec import PRESET_NAMES, Algorithm, ModelSpec, preset

MODEL_FORMAT = "triage-model"
MODEL_VERSION = 1

__all__ = [
    "Algorithm",
    "ClassifierModel",
    "ModelSpec",
    "PRESET_NAMES",
    "fit",
    "fit_stacking",
    "load_model",
    "model_from_dict",
    "model_to_dict",
    "out_of_fold_proba",
    "predict",
    "predict_proba",
    "preset",
    "save_model",
]


@dataclass
class ClassifierModel:
    spec: ModelSpec
    n_classes: int
    column_names: tuple[str, ...]
    estimator: object


def _unpack(X, column_names=None):
    if isinstance(X, FeatureMatrix):
        return X.values, X.column_names
    X = np.asarray(X, dtype=float)
    names = column_names or tuple(f"x{i}" for i in range(X.shape[1]))
    return X, tuple(names)


def fit(spec: ModelSpec, X, y, n_classes: int | None = None, column_names: Sequence[str] | None = None) -> ClassifierModel:
    values, names = _unpack(X, column_names)
    y = np.asarray(y, dtype=np.int64)
    if values.shape[0] == 0:
        raise DegenerateData("cannot fit on zero rows")
    if values.shape[0] != len(y):
        raise LengthMismatch(f"X has {values.shape[0]} rows but y has {len(y)} labels")
    if y.min() < 0:
        raise DegenerateData("label codes must be non-negative")
    n_classes = int(n_classes if n_classes is not None else y.max() + 1)
    est = fit_estimator(spec, values, y, n_classes)
    return ClassifierModel(spec, n_classes, names, est)


def _check_schema(model: ClassifierModel, X):
    if isinstance(X, FeatureMatrix):
        if X.column_names != model.column_names:
            raise SchemaMismatch("feature columns differ from the columns the model was fitted on")
        return X.values
    values = np.asarray(X, dtype=float)
    if values.ndim != 2 or values.shape[1] != len(model.column_names):
        raise SchemaMismatch(f"expected {len(model.column_names)} columns")
    return values


def predict_proba(model: ClassifierModel, X) -> np.ndarray:
    return model.estimator.predict_proba(_check_schema(model, X))


def predict(model: ClassifierModel, X) -> np.ndarray:
    return argmax_lowest(predict_proba(model, X))


def fit_stacking(base: Sequence[ModelSpec], meta: ModelSpec | None, X, y, folds: int = 5, seed: int = 0,
                 n_classes: int | None = None) -> ClassifierModel:
    if not base:
        base = (preset("rf", seed), preset("svm", seed))
    spec = ModelSpec(Algorithm.STACKING, {"folds": folds}, tuple(base), seed, meta)
    return fit(spec, X, y, n_classes)


def model_to_dict(model: ClassifierModel, label_index: dict[str, int] | None = None) -> dict:
    return {
        "format": MODEL_FORMAT,
        "version": MODEL_VERSION,
        "spec": model.spec.to_dict(),
        "n_classes": model.n_classes,
        "label_index": label_index,
        "column_names": list(model.column_names),
        "estimator": estimator_state(model.estimator),
    }


def model_from_dict(doc: dict) -> ClassifierModel:
    if doc.get("format") != MODEL_FORMAT or doc.get("version") != MODEL_VERSION:
        raise VersionMismatch(
            f"model document is {doc.get('format')!r} v{doc.get('version')!r}; "
            f"this build reads {MODEL_FORMAT!r} v{MODEL_VERSION}"
        )
    spec = ModelSpec.from_dict(doc["spec"])
    est = restore_estimator(spec, doc["estimator"])
    return ClassifierModel(spec, int(doc["n_classes"]), tuple(doc["column_names"]), est)


def save_model(model: ClassifierModel, path: str | Path, label_index: dict[str, int] | None = None) -> None:
    Path(path).write_text(json.dumps(model_to_dict(model, label_index), sort_keys=True), encoding="utf-8")


def load_model(path: str | Path) -> ClassifierModel:
    return model_from_dict(json.loads(Path(path).read_text(encoding="utf-8")))

"""A trained featurizer plus classifier, ready to rank labels for new issues."""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .corpus import Dataset, IssueRecord, TaskKind
from .errors import MissingRequiredField, VersionMismatch
from .features import CuratedFeaturizer, KeywordRuleSet, NgramMode, TextVectorizer, featurizer_from_dict
from .learners import ClassifierModel, ModelSpec, fit, model_from_dict, model_to_dict, predict_proba
from .textprep import SentimentLexicon

PIPELINE_FORMAT = "triage-pipeline"
PIPELINE_VERSION = 1
FEATURE_MODES = ("curated", "bow", "tfidf")


def make_featurizer(mode: str, *, rules: KeywordRuleSet | None = None, lexicon: SentimentLexicon | None = None,
                    stopwords: frozenset[str] | None = None, ngram: NgramMode | str = NgramMode.UNIGRAM,
                    min_df: int = 1, selection: Sequence[str] | None = None):
    if mode == "curated":
        return CuratedFeaturizer(rules, lexicon, selection=selection)
    if mode in ("bow", "tfidf"):
        return TextVectorizer(mode, NgramMode(ngram), min_df, stopwords)
    raise ValueError(f"unknown feature mode {mode!r}; expected one of {FEATURE_MODES}")


@dataclass
class Pipeline:
    featurizer: object
    model: ClassifierModel
    task: TaskKind
    label_index: dict[str, int]

    @property
    def class_names(self) -> list[str]:
        return sorted(self.label_index, key=self.label_index.__getitem__)

    def predict_proba(self, records: Sequence[IssueRecord]) -> np.ndarray:
        return predict_proba(self.model, self.featurizer.transform(list(records)))

    def rank(self, record: IssueRecord) -> list[tuple[str, float]]:
        """Labels by descending probability; ties keep label-code order."""
        p = self.predict_proba([record])[0]
        order = sorted(range(len(p)), key=lambda i: (-p[i], i))
        return [(self.class_names[i], float(p[i])) for i in order]

    def to_dict(self) -> dict:
        return {
            "format": PIPELINE_FORMAT,
            "version": PIPELINE_VERSION,
            "task": self.task.value,
            "label_index": dict(self.label_index),
            "featurizer": self.featurizer.to_dict(),
            "model": model_to_dict(self.model, dict(self.label_index)),
        }

    @classmethod
    def from_dict(cls, doc: Mapping) -> "Pipeline":
        if doc.get("format") != PIPELINE_FORMAT or doc.get("version") != PIPELINE_VERSION:
            raise VersionMismatch(
                f"file is {doc.get('format')!r} v{doc.get('version')!r}; "
                f"this build reads {PIPELINE_FORMAT!r} v{PIPELINE_VERSION}"
            )
        return cls(
            featurizer_from_dict(doc["featurizer"]),
            model_from_dict(doc["model"]),
            TaskKind(doc["task"]),
            {k: int(v) for k, v in doc["label_index"].items()},
        )

    def save(self, path: str | Path, extra: Mapping | None = None) -> None:
        doc = {**(extra or {}), **self.to_dict()}
        Path(path).write_text(json.dumps(doc, sort_keys=True), encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "Pipeline":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def train_pipeline(dataset: Dataset, spec: ModelSpec, featurizer) -> Pipeline:
    records = list(dataset.records)
    X = featurizer.fit_transform(records)
    model = fit(spec, X, dataset.labels, dataset.n_classes)
    return Pipeline(featurizer, model, dataset.task, dict(dataset.label_index))


def issue_from_json(doc: Mapping) -> IssueRecord:
    """Build an issue from a JSON object keyed by canonical CSV field names."""
    if not isinstance(doc, Mapping):
        raise MissingRequiredField("issue document must be a JSON object")
    missing = [f for f in ("summary", "description") if f not in doc]
    if missing:
        raise MissingRequiredField(f"issue document lacks {', '.join(missing)}")
    raw = {k: v for k, v in doc.items() if k not in ("assignee_role", "assignee_seniority")}
    try:
        return IssueRecord.from_mapping(raw)
    except ValueError as exc:
        raise MissingRequiredField(f"invalid issue document: {exc}") from exc

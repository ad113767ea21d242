"""Curated issue features, BoW/TF-IDF vectorizers and feature matrices.

Column layout of the curated vector (39 columns):

    FJN1..FJN7   tracker counts
    FJB1..FJB5   tracker presence flags
    FJC1..FJC6   label-encoded tracker categories
    FTN1..FTN4   summary words, description words, polarity, subjectivity
    FTNP_<Tag>   POS tag counts over the issue text, one per ``PosTag``
    FTB1..FTB6   keyword / necessity / negation flags
"""
from __future__ import annotations

import configparser
import csv
import enum
from collections import Counter
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np
import scipy.sparse as sp

from .corpus import CATEGORY_FIELDS, COUNT_FIELDS, PRESENCE_FIELDS, UNKNOWN, IssueRecord
from .errors import EmptyVocabulary, SelectionUnknownColumn
from .textprep import (
    EnglishTagger,
    PosTag,
    SentimentLexicon,
    Tagger,
    clean_for_embedding,
    default_lexicon,
    load_lemmas,
    load_stopwords,
    normalize_tokenize,
    pos_tag,
    sentiment,
    strip_punct,
)

FJN = tuple(f"FJN{i}" for i in range(1, 8))
FJB = tuple(f"FJB{i}" for i in range(1, 6))
FJC = tuple(f"FJC{i}" for i in range(1, 7))
FTN = tuple(f"FTN{i}" for i in range(1, 5))
FTNP = tuple(f"FTNP_{tag.value}" for tag in PosTag)
FTB = tuple(f"FTB{i}" for i in range(1, 7))
CURATED_COLUMNS = FJN + FJB + FJC + FTN + FTNP + FTB

# Human-readable names for reports.
FEATURE_NAMES = dict(
    zip(
        FJN + FJB + FJC + FTN + FTB,
        (
            "Watchers", "Images", "ReopenCount", "ReassignCount", "LinkedIssues", "SubTasks", "Components",
            "ReportedByCustomer", "TestedVersions", "TestExecutionType", "ApprovalType", "AffectsVersions",
            "IssueType", "Reporter", "Priority", "Frequency", "BugCategory", "Labels",
            "SummaryWords", "DescriptionWords", "PolarityScore", "SubjectivityScore",
            "BugWords", "TestWords", "DocumentWords", "DesignWords", "NecessityVerb", "NegativeVerb",
        ),
    )
)
FEATURE_NAMES.update({f"FTNP_{t.value}": f"Pos{t.value}" for t in PosTag})


def _csv_list(value: str) -> frozenset[str]:
    return frozenset(w.strip().lower() for w in value.split(",") if w.strip())


@dataclass(frozen=True)
class KeywordRuleSet:
    bug_words: frozenset[str] = frozenset({"error", "null", "bug", "server", "undefined"})
    test_words: frozenset[str] = frozenset({"test", "request"})
    document_words: frozenset[str] = frozenset({"document", "documentation", "write"})
    design_words: frozenset[str] = frozenset({"design", "icon", "logo"})
    necessity_words: frozenset[str] = frozenset({"should"})
    necessity_suffixes: frozenset[str] = frozenset()
    negation_words: frozenset[str] = frozenset({"not"})
    negation_suffixes: frozenset[str] = frozenset({"n't"})
    # Suffixes that only count on verb-tagged tokens (Turkish -me/-ma).
    negation_verb_suffixes: frozenset[str] = frozenset()

    def __post_init__(self):
        for name in self.__dataclass_fields__:
            words = getattr(self, name)
            if any(w != w.lower() for w in words):
                raise ValueError(f"{name}: rule entries must be lowercase")

    @classmethod
    def load(cls, path: str | Path | None = None, section: str | None = None) -> "KeywordRuleSet":
        parser = configparser.ConfigParser()
        if path is None:
            text = resources.files("triage.data").joinpath("rules_default.ini").read_text(encoding="utf-8")
        else:
            text = Path(path).read_text(encoding="utf-8")
        parser.read_string(text)
        section = section or parser.sections()[0]
        known = set(cls.__dataclass_fields__)
        kw = {}
        for key, value in parser[section].items():
            if key not in known:
                raise ValueError(f"unknown rule key {key!r} in section [{section}]")
            kw[key] = _csv_list(value)
        return cls(**kw)

    def to_dict(self) -> dict[str, list[str]]:
        return {name: sorted(getattr(self, name)) for name in self.__dataclass_fields__}

    @classmethod
    def from_dict(cls, d: Mapping[str, Sequence[str]]) -> "KeywordRuleSet":
        return cls(**{k: frozenset(v) for k, v in d.items()})


class CategoryCodes:
    """Per-field category -> code maps for FJC1..FJC6, fitted on training records.

    Codes follow lexicographic category order; the literal ``"unknown"``
    category is always present and absorbs categories unseen at fit time.
    """

    def __init__(self, maps: Mapping[str, Mapping[str, int]]):
        self.maps = {f: dict(m) for f, m in maps.items()}

    @classmethod
    def fit(cls, records: Sequence[IssueRecord]) -> "CategoryCodes":
        maps = {}
        for name in CATEGORY_FIELDS:
            cats = sorted({getattr(r, name) for r in records} | {UNKNOWN})
            maps[name] = {c: i for i, c in enumerate(cats)}
        return cls(maps)

    def encode(self, name: str, value: str) -> int:
        m = self.maps[name]
        return m.get(value, m[UNKNOWN])


@dataclass(frozen=True)
class CuratedFeatureVector:
    values: tuple[float, ...]

    def __post_init__(self):
        if len(self.values) != len(CURATED_COLUMNS):
            raise ValueError("curated vector has the wrong width")

    def __getitem__(self, name: str) -> float:
        return self.values[CURATED_COLUMNS.index(name)]

    def as_dict(self) -> dict[str, float]:
        return dict(zip(CURATED_COLUMNS, self.values))


def text_features(
    summary: str,
    description: str,
    rules: KeywordRuleSet,
    lex: SentimentLexicon,
    tagger: Tagger | None = None,
) -> list[float]:
    """FTN, FTNP and FTB columns; no cleaning beyond lowercase tokenization."""
    sum_tokens = normalize_tokenize(summary)
    desc_tokens = normalize_tokenize(description)
    tokens = sum_tokens + desc_tokens
    polarity, subjectivity = sentiment(tokens, lex)
    tagged = pos_tag(tokens, tagger)
    tag_counts = Counter(tag for _, tag in tagged)

    cores = [strip_punct(t) or t for t in tokens]
    core_set = set(cores)

    def hit(words):
        return float(not core_set.isdisjoint(words))

    necessity = hit(rules.necessity_words) or float(
        any(c.endswith(s) for c in cores for s in rules.necessity_suffixes)
    )
    negation = hit(rules.negation_words) or float(
        any(c.endswith(s) for c in cores for s in rules.negation_suffixes)
        or any(
            tag is PosTag.VERB and (strip_punct(tok) or tok).endswith(s)
            for tok, tag in tagged
            for s in rules.negation_verb_suffixes
        )
    )
    return (
        [float(len(sum_tokens)), float(len(desc_tokens)), polarity, subjectivity]
        + [float(tag_counts.get(tag, 0)) for tag in PosTag]
        + [
            hit(rules.bug_words),
            hit(rules.test_words),
            hit(rules.document_words),
            hit(rules.design_words),
            float(necessity),
            float(negation),
        ]
    )


def extract_curated(
    issue: IssueRecord,
    rules: KeywordRuleSet,
    lex: SentimentLexicon,
    tagger: Tagger | None,
    label_maps: CategoryCodes,
) -> CuratedFeatureVector:
    text = text_features(issue.summary, issue.description, rules, lex, tagger)
    return CuratedFeatureVector(tuple(_tracker_features(issue, label_maps) + text))


def _tracker_features(issue: IssueRecord, label_maps: CategoryCodes) -> list[float]:
    values = [float(getattr(issue, n)) for n in COUNT_FIELDS]
    values += [float(getattr(issue, n)) for n in PRESENCE_FIELDS]
    values += [float(label_maps.encode(n, getattr(issue, n))) for n in CATEGORY_FIELDS]
    return values


class NgramMode(enum.Enum):
    UNIGRAM = "unigram"
    BIGRAM = "bigram"
    UNIGRAM_PLUS_BIGRAM = "unigram+bigram"


def ngrams(tokens: Sequence[str], mode: NgramMode) -> list[tuple[str, ...]]:
    grams: list[tuple[str, ...]] = []
    if mode in (NgramMode.UNIGRAM, NgramMode.UNIGRAM_PLUS_BIGRAM):
        grams.extend((t,) for t in tokens)
    if mode in (NgramMode.BIGRAM, NgramMode.UNIGRAM_PLUS_BIGRAM):
        grams.extend(zip(tokens, tokens[1:]))
    return grams


def term_name(term: tuple[str, ...]) -> str:
    return "_".join(term)


@dataclass(frozen=True)
class Vocabulary:
    terms: tuple[tuple[str, ...], ...]
    ngram_mode: NgramMode
    document_frequency: Mapping[tuple[str, ...], int]
    n_documents: int
    index: Mapping[tuple[str, ...], int] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "index", {t: i for i, t in enumerate(self.terms)})

    def __len__(self) -> int:
        return len(self.terms)

    @property
    def column_names(self) -> tuple[str, ...]:
        return tuple(term_name(t) for t in self.terms)

    def idf(self) -> np.ndarray:
        df = np.array([self.document_frequency[t] for t in self.terms], dtype=float)
        return np.log((1.0 + self.n_documents) / (1.0 + df)) + 1.0

    def to_dict(self) -> dict:
        return {
            "ngram_mode": self.ngram_mode.value,
            "n_documents": self.n_documents,
            "terms": [list(t) for t in self.terms],
            "document_frequency": [self.document_frequency[t] for t in self.terms],
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "Vocabulary":
        terms = tuple(tuple(t) for t in d["terms"])
        return cls(terms, NgramMode(d["ngram_mode"]), dict(zip(terms, d["document_frequency"])), d["n_documents"])


def fit_vocabulary(train_texts: Sequence[Sequence[str]], mode: NgramMode = NgramMode.UNIGRAM, min_df: int = 1) -> Vocabulary:
    if not train_texts:
        raise ValueError("fit_vocabulary needs at least one training document")
    df: Counter = Counter()
    for doc in train_texts:
        df.update(set(ngrams(doc, mode)))
    kept = sorted((t for t, c in df.items() if c >= min_df), key=lambda t: (term_name(t), t))
    if not kept:
        raise EmptyVocabulary(f"no n-gram reaches min_df={min_df}")
    return Vocabulary(tuple(kept), mode, {t: df[t] for t in kept}, len(train_texts))


@dataclass(frozen=True)
class FeatureMatrix:
    values: np.ndarray | sp.csr_matrix
    column_names: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "column_names", tuple(self.column_names))
        if self.values.ndim != 2 or self.values.shape[1] != len(self.column_names):
            raise ValueError("column_names length must equal the number of columns")
        data = self.values.data if sp.issparse(self.values) else self.values
        if not np.all(np.isfinite(data)):
            raise ValueError("feature matrix contains NaN or Inf")

    @property
    def rows(self) -> int:
        return self.values.shape[0]

    @property
    def columns(self) -> int:
        return self.values.shape[1]

    @property
    def is_sparse(self) -> bool:
        return sp.issparse(self.values)

    def dense(self) -> np.ndarray:
        return self.values.toarray() if self.is_sparse else np.asarray(self.values)

    def take(self, rows: np.ndarray | Sequence[int]) -> "FeatureMatrix":
        return FeatureMatrix(self.values[np.asarray(rows, dtype=np.int64)], self.column_names)

    def select(self, columns: Sequence[str]) -> "FeatureMatrix":
        where = {c: i for i, c in enumerate(self.column_names)}
        missing = [c for c in columns if c not in where]
        if missing:
            raise SelectionUnknownColumn(f"unknown column(s): {', '.join(missing)}")
        idx = [where[c] for c in columns]
        return FeatureMatrix(self.values[:, idx], tuple(columns))

    def to_csv(self, path: str | Path) -> None:
        dense = self.dense()
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(self.column_names)
            for row in dense:
                writer.writerow([_fmt(v) for v in row])

    @classmethod
    def from_csv(cls, path: str | Path) -> "FeatureMatrix":
        with open(path, newline="", encoding="utf-8") as fh:
            reader = csv.reader(fh)
            header = next(reader)
            rows = [[float(v) for v in row] for row in reader]
        values = np.array(rows, dtype=float).reshape(len(rows), len(header))
        return cls(values, tuple(header))


def _fmt(v: float) -> str:
    return str(int(v)) if float(v).is_integer() else repr(float(v))


def bow_transform(texts: Sequence[Sequence[str]], vocab: Vocabulary) -> FeatureMatrix:
    rows, cols, vals = [], [], []
    for d, doc in enumerate(texts):
        counts = Counter(g for g in ngrams(doc, vocab.ngram_mode) if g in vocab.index)
        for term, c in sorted(counts.items(), key=lambda kv: vocab.index[kv[0]]):
            rows.append(d)
            cols.append(vocab.index[term])
            vals.append(float(c))
    m = sp.csr_matrix((vals, (rows, cols)), shape=(len(texts), len(vocab)), dtype=float)
    return FeatureMatrix(m, vocab.column_names)


def tfidf_transform(texts: Sequence[Sequence[str]], vocab: Vocabulary) -> FeatureMatrix:
    """Raw counts times smoothed idf, then per-row L2 normalization."""
    counts = bow_transform(texts, vocab).values
    weighted = counts.multiply(vocab.idf()[None, :]).tocsr()
    norms = np.sqrt(np.asarray(weighted.multiply(weighted).sum(axis=1)).ravel())
    scale = np.divide(1.0, norms, out=np.zeros_like(norms), where=norms > 0)
    return FeatureMatrix(sp.diags(scale) @ weighted, vocab.column_names)


def assemble(
    vectors: Sequence[CuratedFeatureVector] | Sequence[FeatureMatrix],
    selection: Sequence[str] | None = None,
) -> FeatureMatrix:
    if not vectors:
        matrix = FeatureMatrix(np.zeros((0, len(CURATED_COLUMNS))), CURATED_COLUMNS)
    elif all(isinstance(v, CuratedFeatureVector) for v in vectors):
        matrix = FeatureMatrix(np.array([v.values for v in vectors], dtype=float), CURATED_COLUMNS)
    elif all(isinstance(v, FeatureMatrix) for v in vectors):
        names = vectors[0].column_names
        if any(v.column_names != names for v in vectors):
            raise ValueError("feature matrices disagree on columns")
        if any(v.is_sparse for v in vectors):
            values = sp.vstack([sp.csr_matrix(v.values) for v in vectors]).tocsr()
        else:
            values = np.vstack([v.values for v in vectors])
        matrix = FeatureMatrix(values, names)
    else:
        raise TypeError("assemble needs homogeneous input: all curated vectors or all matrices")
    return matrix if selection is None else matrix.select(list(selection))


class CuratedFeaturizer:
    """Fits FJC category codes on training records and emits curated matrices."""

    kind = "curated"

    def __init__(self, rules: KeywordRuleSet | None = None, lexicon: SentimentLexicon | None = None,
                 tagger: Tagger | None = None, selection: Sequence[str] | None = None):
        self.rules = rules or KeywordRuleSet()
        self.lexicon = lexicon or default_lexicon()
        self.tagger = tagger or EnglishTagger()
        self.selection = tuple(selection) if selection is not None else None
        self.codes: CategoryCodes | None = None
        self._text_cache: dict[tuple[str, str], list[float]] = {}

    def fit(self, records: Sequence[IssueRecord]) -> "CuratedFeaturizer":
        self.codes = CategoryCodes.fit(records)
        return self

    def vectors(self, records: Sequence[IssueRecord]) -> list[CuratedFeatureVector]:
        if self.codes is None:
            raise RuntimeError("featurizer is not fitted")
        out = []
        for r in records:
            key = (r.summary, r.description)
            text = self._text_cache.get(key)
            if text is None:
                text = self._text_cache[key] = text_features(r.summary, r.description, self.rules, self.lexicon, self.tagger)
            out.append(CuratedFeatureVector(tuple(_tracker_features(r, self.codes) + text)))
        return out

    def transform(self, records: Sequence[IssueRecord]) -> FeatureMatrix:
        return assemble(self.vectors(records), self.selection)

    def fit_transform(self, records: Sequence[IssueRecord]) -> FeatureMatrix:
        return self.fit(records).transform(records)

    def with_selection(self, selection: Sequence[str] | None) -> "CuratedFeaturizer":
        clone = CuratedFeaturizer(self.rules, self.lexicon, self.tagger, selection)
        clone.codes = self.codes
        clone._text_cache = self._text_cache
        return clone

    def to_dict(self) -> dict:
        if not isinstance(self.tagger, EnglishTagger):
            raise TypeError("only the built-in English tagger can be serialized")
        return {
            "kind": self.kind,
            "rules": self.rules.to_dict(),
            "lexicon": {
                "entries": {w: list(v) for w, v in sorted(self.lexicon.entries.items())},
                "negation_markers": sorted(self.lexicon.negation_markers),
                "necessity_markers": sorted(self.lexicon.necessity_markers),
            },
            "tagger": "english",
            "selection": None if self.selection is None else list(self.selection),
            "codes": None if self.codes is None else self.codes.maps,
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "CuratedFeaturizer":
        lex = d["lexicon"]
        lexicon = SentimentLexicon(
            {w: (float(v[0]), float(v[1])) for w, v in lex["entries"].items()},
            frozenset(lex["negation_markers"]),
            frozenset(lex["necessity_markers"]),
        )
        f = cls(KeywordRuleSet.from_dict(d["rules"]), lexicon, EnglishTagger(), d.get("selection"))
        if d.get("codes") is not None:
            f.codes = CategoryCodes(d["codes"])
        return f


class TextVectorizer:
    """Embedding-path BoW or TF-IDF over the cleaned, lemmatized issue text."""

    def __init__(self, weighting: str = "bow", mode: NgramMode = NgramMode.UNIGRAM, min_df: int = 1,
                 stopwords: frozenset[str] | None = None, lemmas: Mapping[str, str] | None = None):
        if weighting not in ("bow", "tfidf"):
            raise ValueError(f"weighting must be bow or tfidf, not {weighting!r}")
        self.kind = weighting
        self.mode = NgramMode(mode)
        self.min_df = min_df
        self.stopwords = load_stopwords() if stopwords is None else frozenset(stopwords)
        self.lemmas = load_lemmas() if lemmas is None else dict(lemmas)
        self.vocabulary: Vocabulary | None = None

    def tokens(self, record: IssueRecord) -> list[str]:
        return clean_for_embedding(normalize_tokenize(record.text), self.stopwords, self.lemmas)

    def fit(self, records: Sequence[IssueRecord]) -> "TextVectorizer":
        self.vocabulary = fit_vocabulary([self.tokens(r) for r in records], self.mode, self.min_df)
        return self

    def transform(self, records: Sequence[IssueRecord]) -> FeatureMatrix:
        if self.vocabulary is None:
            raise RuntimeError("vectorizer is not fitted")
        docs = [self.tokens(r) for r in records]
        fn = tfidf_transform if self.kind == "tfidf" else bow_transform
        return fn(docs, self.vocabulary)

    def fit_transform(self, records: Sequence[IssueRecord]) -> FeatureMatrix:
        return self.fit(records).transform(records)

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "mode": self.mode.value,
            "min_df": self.min_df,
            "stopwords": sorted(self.stopwords),
            "lemmas": dict(sorted(self.lemmas.items())),
            "vocabulary": None if self.vocabulary is None else self.vocabulary.to_dict(),
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "TextVectorizer":
        v = cls(d["kind"], NgramMode(d["mode"]), d["min_df"], frozenset(d["stopwords"]), d["lemmas"])
        if d.get("vocabulary") is not None:
            v.vocabulary = Vocabulary.from_dict(d["vocabulary"])
        return v


def featurizer_from_dict(d: Mapping):
    return CuratedFeaturizer.from_dict(d) if d["kind"] == "curated" else TextVectorizer.from_dict(d)


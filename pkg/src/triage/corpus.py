"""Issue data model, tracker CSV ingestion and labelled datasets."""
from __future__ import annotations

import csv
import enum
import logging
import math
import warnings
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Iterator, Mapping, Sequence

import numpy as np

from .errors import (
    BadK,
    MalformedRow,
    MissingColumn,
    NoUsableRecords,
    SingleClassWarning,
    StratificationWarning,
)

log = logging.getLogger(__name__)

UNKNOWN = "unknown"

TEXT_FIELDS = ("id", "project", "summary", "description")
CATEGORY_FIELDS = ("issue_type", "reporter", "priority", "frequency", "bug_category", "labels")
COUNT_FIELDS = (
    "watchers",
    "images",
    "reopen_count",
    "reassign_count",
    "linked_issues",
    "sub_tasks",
    "components",
)
PRESENCE_FIELDS = (
    "reported_by_customer",
    "tested_versions",
    "test_execution_type",
    "approval_type",
    "affects_versions",
)
LABEL_FIELDS = ("assignee_role", "assignee_seniority")
CANONICAL_COLUMNS = TEXT_FIELDS + CATEGORY_FIELDS + COUNT_FIELDS + PRESENCE_FIELDS + LABEL_FIELDS
REQUIRED_COLUMNS = ("summary", "description", "assignee_role")

ROLES = ("Designer", "Developer", "Leader", "Tester")
SENIORITIES = ("Junior", "Mid", "Senior")

_ROLE_ALIASES = {
    "developer": "Developer",
    "software developer": "Developer",
    "software engineer": "Developer",
    "tester": "Tester",
    "test engineer": "Tester",
    "software tester": "Tester",
    "designer": "Designer",
    "ui/ux designer": "Designer",
    "ux designer": "Designer",
    "ui designer": "Designer",
    "leader": "Leader",
    "team leader": "Leader",
    "team lead": "Leader",
}
_SENIORITY_ALIASES = {
    "senior": "Senior",
    "mid": "Mid",
    "mid-level": "Mid",
    "mid level": "Mid",
    "junior": "Junior",
}
_MISSING_NUMERIC = {"", "nan", "none", "null"}


def normalize_role(value: str | None) -> str | None:
    """Map a raw assignee-role cell onto the canonical role name (None if empty)."""
    if value is None or not value.strip():
        return None
    return _ROLE_ALIASES.get(value.strip().lower())


def normalize_seniority(value: str | None) -> str | None:
    if value is None or not value.strip():
        return None
    return _SENIORITY_ALIASES.get(value.strip().lower())


@dataclass(frozen=True)
class IssueRecord:
    id: str = ""
    project: str = ""
    summary: str = ""
    description: str = ""
    issue_type: str = UNKNOWN
    reporter: str = UNKNOWN
    priority: str = UNKNOWN
    frequency: str = UNKNOWN
    bug_category: str = UNKNOWN
    labels: str = UNKNOWN
    watchers: int = 0
    images: int = 0
    reopen_count: int = 0
    reassign_count: int = 0
    linked_issues: int = 0
    sub_tasks: int = 0
    components: int = 0
    reported_by_customer: int = 0
    tested_versions: int = 0
    test_execution_type: int = 0
    approval_type: int = 0
    affects_versions: int = 0
    assignee_role: str | None = None
    assignee_seniority: str | None = None

    def __post_init__(self):
        for name in COUNT_FIELDS:
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")
        for name in PRESENCE_FIELDS:
            if getattr(self, name) not in (0, 1):
                raise ValueError(f"{name} must be 0 or 1")
        if self.assignee_seniority is not None and self.assignee_role != "Developer":
            raise ValueError("assignee_seniority is only valid for Developer assignees")

    @property
    def text(self) -> str:
        """Combined issue text: summary then description, single-space joined."""
        return f"{self.summary} {self.description}"

    @classmethod
    def from_mapping(cls, raw: Mapping[str, object]) -> "IssueRecord":
        """Build a record from loosely typed values (JSON issue documents, CSV rows).

        Normalization follows ingestion: blank numerics become 0, blank
        categories become ``"unknown"``, presence flags are 1 for any non-empty
        value. Raises ``ValueError`` for unparseable counts.
        """
        kw: dict[str, object] = {}
        for name in TEXT_FIELDS:
            value = raw.get(name)
            kw[name] = "" if value is None else str(value)
        for name in CATEGORY_FIELDS:
            value = raw.get(name)
            value = "" if value is None else str(value).strip()
            kw[name] = value or UNKNOWN
        for name in COUNT_FIELDS:
            kw[name] = _parse_count(raw.get(name), name)
        for name in PRESENCE_FIELDS:
            kw[name] = _presence(raw.get(name))
        role_raw = raw.get("assignee_role")
        role = normalize_role(None if role_raw is None else str(role_raw))
        if role_raw is not None and str(role_raw).strip() and role is None:
            raise ValueError(f"unrecognized assignee_role {role_raw!r}")
        kw["assignee_role"] = role
        sen_raw = raw.get("assignee_seniority")
        sen = normalize_seniority(None if sen_raw is None else str(sen_raw))
        if sen_raw is not None and str(sen_raw).strip() and sen is None:
            raise ValueError(f"unrecognized assignee_seniority {sen_raw!r}")
        kw["assignee_seniority"] = sen if role == "Developer" else None
        return cls(**kw)

    def to_row(self) -> dict[str, str]:
        row = {}
        for name, value in asdict(self).items():
            if name in PRESENCE_FIELDS:
                row[name] = "1" if value else ""
            elif value is None:
                row[name] = ""
            else:
                row[name] = str(value)
        return row


def _parse_count(value, name: str) -> int:
    if value is None:
        return 0
    if isinstance(value, bool):
        raise ValueError(f"{name}: boolean is not a count")
    if isinstance(value, (int, np.integer)):
        number = float(value)
    elif isinstance(value, float):
        if math.isnan(value):
            return 0
        number = value
    else:
        text = str(value).strip()
        if text.lower() in _MISSING_NUMERIC:
            return 0
        try:
            number = float(text)
        except ValueError:
            raise ValueError(f"{name}: not a number: {text!r}") from None
    if not math.isfinite(number) or number < 0 or number != int(number):
        raise ValueError(f"{name}: not a non-negative integer: {value!r}")
    return int(number)


def _presence(value) -> int:
    if value is None:
        return 0
    if isinstance(value, float) and math.isnan(value):
        return 0
    if isinstance(value, (bool, int)):
        return int(bool(value))
    text = str(value).strip()
    return 0 if text.lower() in ("", "nan") else 1


@dataclass
class IngestReport:
    records: list[IssueRecord]
    dropped_unlabeled: int = 0
    malformed: list[MalformedRow] = field(default_factory=list)


def ingest_with_report(path: str | Path, schema: Mapping[str, str] | None = None) -> IngestReport:
    """Read a tracker export; ``schema`` maps canonical names to file headers."""
    schema = dict(schema or {})
    unknown = set(schema) - set(CANONICAL_COLUMNS)
    if unknown:
        raise MissingColumn(f"schema names non-canonical fields: {sorted(unknown)}")
    with open(path, newline="", encoding="utf-8-sig") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        columns: dict[str, str | None] = {}
        for name in CANONICAL_COLUMNS:
            if name in schema:
                if schema[name] not in header:
                    raise MissingColumn(f"schema maps {name!r} to {schema[name]!r}, which is not in the header")
                columns[name] = schema[name]
            else:
                columns[name] = name if name in header else None
        missing = [name for name in REQUIRED_COLUMNS if columns[name] is None]
        if missing:
            raise MissingColumn(f"required column(s) absent: {', '.join(missing)}")

        report = IngestReport(records=[])
        # Row indices are 1-based data rows (header excluded).
        for index, row in enumerate(reader, start=1):
            raw = {name: (row.get(col) if col else None) for name, col in columns.items()}
            if not (raw["assignee_role"] or "").strip():
                report.dropped_unlabeled += 1
                continue
            try:
                report.records.append(IssueRecord.from_mapping(raw))
            except ValueError as exc:
                report.malformed.append(MalformedRow(index, str(exc)))
    if report.malformed:
        log.warning("skipped %d malformed row(s); first: %s", len(report.malformed), report.malformed[0])
        warnings.warn(f"{len(report.malformed)} malformed row(s) skipped", stacklevel=2)
    return report


def ingest(path: str | Path, schema: Mapping[str, str] | None = None) -> list[IssueRecord]:
    return ingest_with_report(path, schema).records


def write_csv(records: Sequence[IssueRecord], path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=CANONICAL_COLUMNS, lineterminator="\n")
        writer.writeheader()
        for rec in records:
            writer.writerow(rec.to_row())


class TaskKind(enum.Enum):
    TEAM = "team"
    DEVELOPER = "developer"

    @property
    def label_space(self) -> tuple[str, ...]:
        return ROLES if self is TaskKind.TEAM else SENIORITIES

    def label_of(self, record: IssueRecord) -> str | None:
        if self is TaskKind.TEAM:
            return record.assignee_role
        if record.assignee_role != "Developer":
            return None
        return record.assignee_seniority


@dataclass(frozen=True)
class Dataset:
    records: tuple[IssueRecord, ...]
    task: TaskKind
    label_index: Mapping[str, int]

    def __post_init__(self):
        codes = sorted(self.label_index.values())
        if codes != list(range(len(codes))):
            raise ValueError("label_index must be a bijection onto 0..n_classes-1")
        for rec in self.records:
            if self.task.label_of(rec) not in self.label_index:
                raise ValueError(f"record {rec.id!r} has no valid {self.task.value} label")

    def __len__(self) -> int:
        return len(self.records)

    @property
    def n_classes(self) -> int:
        return len(self.label_index)

    @property
    def class_names(self) -> list[str]:
        return sorted(self.label_index, key=self.label_index.__getitem__)

    @property
    def labels(self) -> np.ndarray:
        return np.array([self.label_index[self.task.label_of(r)] for r in self.records], dtype=np.int64)


def build_dataset(records: Sequence[IssueRecord], task: TaskKind) -> Dataset:
    kept = tuple(r for r in records if task.label_of(r) in task.label_space)
    if not kept:
        raise NoUsableRecords(f"no records carry a {task.value}-assignment label")
    present = sorted({task.label_of(r) for r in kept})
    if len(present) == 1:
        warnings.warn(f"only one label present: {present[0]}", SingleClassWarning, stacklevel=2)
    return Dataset(kept, task, {name: code for code, name in enumerate(present)})


@dataclass(frozen=True)
class FoldPlan:
    folds: tuple[np.ndarray, ...]
    stratified: bool = True

    def __len__(self) -> int:
        return len(self.folds)

    def __iter__(self) -> Iterator[tuple[np.ndarray, np.ndarray]]:
        for i in range(len(self.folds)):
            yield self.split(i)

    @property
    def n(self) -> int:
        return sum(len(f) for f in self.folds)

    def split(self, i: int) -> tuple[np.ndarray, np.ndarray]:
        """(train indices, test indices) for fold ``i``; both sorted."""
        test = self.folds[i]
        train = np.sort(np.concatenate([f for j, f in enumerate(self.folds) if j != i]))
        return train, test


def stratified_split(ds: Dataset | Sequence[int] | np.ndarray, k: int, seed: int) -> FoldPlan:
    """Shuffle each class with ``seed`` and deal the class-ordered indices round robin.

    Per-class fold counts are then floor/ceil of n_c/k. When some class has
    fewer than k members the split falls back to a plain shuffled deal.
    """
    y = ds.labels if isinstance(ds, Dataset) else np.asarray(ds)
    n = len(y)
    if k < 2 or k > n:
        raise BadK(f"k must satisfy 2 <= k <= n (k={k}, n={n})")
    rng = np.random.default_rng(seed)
    classes, counts = np.unique(y, return_counts=True)
    if counts.min() >= k:
        order = np.concatenate([rng.permutation(np.flatnonzero(y == c)) for c in classes])
        stratified = True
    else:
        warnings.warn(
            f"a class has fewer than {k} members; using a non-stratified split",
            StratificationWarning,
            stacklevel=2,
        )
        order = rng.permutation(n)
        stratified = False
    slot = np.arange(n) % k
    folds = tuple(np.sort(order[slot == i]) for i in range(k))
    return FoldPlan(folds, stratified)


def record_field_names() -> list[str]:
    return [f.name for f in fields(IssueRecord)]

import csv
import warnings

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from triage.corpus import (
    CANONICAL_COLUMNS,
    IssueRecord,
    TaskKind,
    build_dataset,
    ingest,
    ingest_with_report,
    stratified_split,
    write_csv,
)
from triage.errors import BadK, MissingColumn, NoUsableRecords, SingleClassWarning, StratificationWarning


def _write(path, header, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        w.writerows(rows)
    return path


def test_header_only_file_gives_no_records(tmp_path):
    path = _write(tmp_path / "empty.csv", CANONICAL_COLUMNS, [])
    assert ingest(path) == []


def test_blank_watchers_cell_becomes_zero(tmp_path):
    path = _write(tmp_path / "a.csv", ["summary", "description", "watchers", "assignee_role"],
                  [["Login fails", "", "", "Developer"]])
    (rec,) = ingest(path)
    assert rec.watchers == 0
    assert rec.issue_type == "unknown"


def test_unlabeled_rows_dropped_and_others_untouched(tmp_path):
    rows = [["a b", "c", "3", "Tester"], ["x", "y", "1", ""], ["d", "e", "", "Designer"]]
    path = _write(tmp_path / "a.csv", ["summary", "description", "watchers", "assignee_role"], rows)
    rep = ingest_with_report(path)
    assert rep.dropped_unlabeled == 1
    assert [(r.summary, r.watchers, r.assignee_role) for r in rep.records] == [("a b", 3, "Tester"), ("d", 0, "Designer")]


def test_malformed_numeric_row_is_skipped_with_index(tmp_path):
    rows = [["a", "b", "many", "Tester"], ["c", "d", "2", "Tester"]]
    path = _write(tmp_path / "a.csv", ["summary", "description", "watchers", "assignee_role"], rows)
    with pytest.warns(UserWarning):
        rep = ingest_with_report(path)
    assert len(rep.records) == 1
    assert rep.malformed[0].row == 1


def test_schema_maps_renamed_headers(tmp_path):
    path = _write(tmp_path / "a.csv", ["Title", "Body", "Role"], [["t", "b", "Leader"]])
    (rec,) = ingest(path, {"summary": "Title", "description": "Body", "assignee_role": "Role"})
    assert (rec.summary, rec.description, rec.assignee_role) == ("t", "b", "Leader")


def test_schema_naming_absent_header_raises(tmp_path):
    path = _write(tmp_path / "a.csv", ["summary", "description", "assignee_role"], [])
    with pytest.raises(MissingColumn):
        ingest(path, {"summary": "Title"})


def test_missing_required_column_raises(tmp_path):
    path = _write(tmp_path / "a.csv", ["summary", "assignee_role"], [])
    with pytest.raises(MissingColumn):
        ingest(path)


def test_presence_flags_are_binary(tmp_path):
    path = _write(tmp_path / "a.csv", ["summary", "description", "tested_versions", "approval_type", "assignee_role"],
                  [["s", "d", "v1.2, v1.3", "", "Tester"]])
    (rec,) = ingest(path)
    assert (rec.tested_versions, rec.approval_type) == (1, 0)


def test_record_invariants():
    with pytest.raises(ValueError):
        IssueRecord(watchers=-1)
    with pytest.raises(ValueError):
        IssueRecord(approval_type=2)
    with pytest.raises(ValueError):
        IssueRecord(assignee_role="Tester", assignee_seniority="Senior")


def test_round_trip(tmp_path, small_corpus):
    path = tmp_path / "rt.csv"
    write_csv(small_corpus, path)
    assert ingest(path) == small_corpus


def test_label_index_is_lexicographic():
    recs = [IssueRecord(summary="a", assignee_role="Tester"), IssueRecord(summary="b", assignee_role="Developer")]
    ds = build_dataset(recs, TaskKind.TEAM)
    assert dict(ds.label_index) == {"Developer": 0, "Tester": 1}
    assert ds.labels.tolist() == [1, 0]


def test_single_label_warns():
    with pytest.warns(SingleClassWarning):
        ds = build_dataset([IssueRecord(assignee_role="Leader")], TaskKind.TEAM)
    assert len(ds.label_index) == 1


def test_developer_task_keeps_developer_rows(small_corpus):
    ds = build_dataset(small_corpus, TaskKind.DEVELOPER)
    assert len(ds) == sum(r.assignee_role == "Developer" for r in small_corpus)
    assert set(ds.label_index) <= {"Junior", "Mid", "Senior"}


def test_no_usable_records():
    with pytest.raises(NoUsableRecords):
        build_dataset([IssueRecord(assignee_role="Tester")], TaskKind.DEVELOPER)


def test_ten_singleton_folds():
    with pytest.warns(StratificationWarning):
        plan = stratified_split(np.arange(10) % 2, 10, 0)
    assert all(len(f) == 1 for f in plan.folds)


def test_balanced_two_class_folds():
    y = np.repeat([0, 1], 50)
    plan = stratified_split(y, 10, 7)
    for fold in plan.folds:
        assert np.bincount(y[fold]).tolist() == [5, 5]


def test_split_is_deterministic():
    y = np.arange(57) % 3
    a, b = stratified_split(y, 5, 9), stratified_split(y, 5, 9)
    assert all(np.array_equal(x, z) for x, z in zip(a.folds, b.folds))


def test_bad_k():
    with pytest.raises(BadK):
        stratified_split([0, 1, 0], 1, 0)
    with pytest.raises(BadK):
        stratified_split([0, 1, 0], 4, 0)


def test_small_class_falls_back():
    with pytest.warns(StratificationWarning):
        plan = stratified_split([0] * 10 + [1], 5, 0)
    assert not plan.stratified


@given(st.lists(st.integers(0, 3), min_size=2, max_size=120), st.integers(2, 12), st.integers(0, 2**31))
def test_folds_partition_and_stratify(labels, k, seed):
    y = np.array(labels)
    if k > len(y):
        return
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        plan = stratified_split(y, k, seed)
    allidx = np.concatenate(plan.folds)
    assert sorted(allidx.tolist()) == list(range(len(y)))
    if plan.stratified:
        for c in np.unique(y):
            share = np.sum(y == c) / k
            for fold in plan.folds:
                assert abs(np.sum(y[fold] == c) - share) <= 1

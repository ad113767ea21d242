"""Seeded synthetic issue corpora shaped like a tracker export.

Each role has its own vocabulary, issue-type mix and tracker-field habits, so
both curated and bag-of-words features carry signal. ``noise`` controls the
share of tokens drawn from a shared vocabulary and the chance that tracker
fields follow another role's habits.
"""
from __future__ import annotations

import numpy as np

from .corpus import ROLES, SENIORITIES, IssueRecord

_SHARED = (
    "page screen user the a on in when after for with is it this we please "
    "module version app mobile web login list item new update view field"
).split()

_ROLE_WORDS = {
    "Developer": "error null bug server undefined crash exception api endpoint timeout response fails broken".split(),
    "Tester": "test request scenario regression verify case coverage check automation smoke".split(),
    "Designer": "design icon logo colour font layout mockup spacing banner visual".split(),
    "Leader": "document documentation write plan release should review schedule meeting approve".split(),
}

_ISSUE_TYPES = {
    "Developer": {"Bug": 0.7, "Task": 0.2, "Story": 0.1},
    "Tester": {"Test": 0.6, "Bug": 0.2, "Task": 0.2},
    "Designer": {"Design": 0.7, "Story": 0.2, "Task": 0.1},
    "Leader": {"Task": 0.5, "Epic": 0.3, "Story": 0.2},
}

_PRIORITIES = ("Low", "Medium", "High", "Critical")
_ROLE_SHARE = {"Developer": 0.55, "Tester": 0.2, "Designer": 0.13, "Leader": 0.12}
_SENIORITY_SHARE = {"Junior": 0.3, "Mid": 0.4, "Senior": 0.3}


def _pick(rng, weights: dict[str, float]) -> str:
    keys = list(weights)
    p = np.array([weights[k] for k in keys])
    return keys[rng.choice(len(keys), p=p / p.sum())]


def _sentence(rng, role: str, length: int, noise: float) -> str:
    words = []
    for _ in range(length):
        pool = _SHARED if rng.random() < noise else _ROLE_WORDS[role]
        words.append(pool[rng.integers(len(pool))])
    return " ".join(words)


def make_issue(rng: np.random.Generator, role: str, seniority: str | None, index: int, noise: float = 0.5) -> IssueRecord:
    habit = role if rng.random() >= noise / 2 else ROLES[rng.integers(len(ROLES))]
    rank = SENIORITIES.index(seniority) if seniority else 1
    summary = _sentence(rng, role, int(rng.integers(3, 8)), noise)
    description = "" if rng.random() < 0.05 else _sentence(rng, role, int(rng.integers(6, 25)), noise)
    return IssueRecord(
        id=f"SYN-{index}",
        project="synthetic",
        summary=summary.capitalize(),
        description=description,
        issue_type=_pick(rng, _ISSUE_TYPES[habit]),
        reporter=f"reporter{int(rng.integers(12))}",
        priority=_PRIORITIES[min(3, int(rng.integers(0, 3)) + (rank == 2))],
        frequency=("Always", "Sometimes", "Rarely")[int(rng.integers(3))],
        bug_category=_maybe(rng, habit == "Developer", ("Functional", "Performance", "UI")),
        labels=("frontend", "backend", "ux", "qa", "ops")[int(rng.integers(5))],
        watchers=int(rng.poisson(2 + (habit == "Leader") * 3)),
        images=int(rng.poisson(1.5 if habit == "Designer" else 0.3)),
        reopen_count=int(rng.poisson(0.2 + 0.4 * (2 - rank) * (role == "Developer"))),
        reassign_count=int(rng.poisson(0.5)),
        linked_issues=int(rng.poisson(1.0 if habit == "Leader" else 0.4)),
        sub_tasks=int(rng.poisson(2.0 if habit == "Leader" else 0.2)),
        components=int(rng.integers(0, 4)),
        reported_by_customer=int(rng.random() < (0.4 if habit == "Developer" else 0.1)),
        tested_versions=int(rng.random() < (0.7 if habit == "Tester" else 0.1)),
        test_execution_type=int(rng.random() < (0.8 if habit == "Tester" else 0.05)),
        approval_type=int(rng.random() < (0.6 if habit == "Leader" else 0.1)),
        affects_versions=int(rng.random() < (0.5 if habit in ("Developer", "Tester") else 0.1)),
        assignee_role=role,
        assignee_seniority=seniority,
    )


def _maybe(rng, present: bool, values: tuple[str, ...]) -> str:
    return values[int(rng.integers(len(values)))] if present else "unknown"


def synthetic_corpus(n: int = 500, seed: int = 0, noise: float = 0.5) -> list[IssueRecord]:
    """``n`` labelled issues; roles and developer seniorities drawn from fixed shares."""
    if not 0.0 <= noise <= 1.0:
        raise ValueError("noise must be in [0, 1]")
    rng = np.random.default_rng(seed)
    records = []
    for i in range(n):
        role = _pick(rng, _ROLE_SHARE)
        seniority = _pick(rng, _SENIORITY_SHARE) if role == "Developer" else None
        records.append(make_issue(rng, role, seniority, i, noise))
    return records


def separable_blobs(n: int = 300, n_classes: int = 3, d: int = 5, seed: int = 0, gap: float = 6.0):
    """Nonnegative, linearly separable Gaussian blobs: (X, y)."""
    rng = np.random.default_rng(seed)
    y = np.arange(n) % n_classes
    rng.shuffle(y)
    centers = np.zeros((n_classes, d))
    for c in range(n_classes):
        centers[c, c % d] = gap
    X = centers[y] + rng.normal(scale=0.7, size=(n, d)) + 3.0
    return np.clip(X, 0.0, None), y

import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from triage.errors import (
    BadHyperparameter,
    DegenerateData,
    LengthMismatch,
    NegativeFeatureForMultinomialNB,
    SchemaMismatch,
    VersionMismatch,
)
from triage.features import FeatureMatrix
from triage.learners import (
    PRESET_NAMES,
    Algorithm,
    ModelSpec,
    fit,
    fit_stacking,
    model_from_dict,
    model_to_dict,
    out_of_fold_proba,
    predict,
    predict_proba,
    preset,
)
from triage.learners.base import Constant, argmax_lowest
from triage.learners.ensemble import VotingHard, VotingSoft
from triage.corpus import stratified_split
from triage.synthetic import separable_blobs

A = Algorithm


def _spec(alg, **hp):
    return ModelSpec(alg, hp, seed=0)


def _constant(label, n_classes=2):
    return Constant().fit(np.zeros((1, 1)), np.array([label]), n_classes)


class _Fixed:
    """Stand-in member with fixed probabilities."""

    def __init__(self, p):
        self.p = np.asarray(p, dtype=float)

    def predict_proba(self, X):
        return np.tile(self.p, (X.shape[0], 1))

    def predict(self, X):
        return argmax_lowest(self.predict_proba(X))


@pytest.fixture(scope="module")
def blobs():
    return separable_blobs(120, 3, 4, seed=5)


def test_single_class_training_gives_constant_model():
    X = np.random.default_rng(0).normal(size=(6, 3))
    model = fit(preset("svm"), X, np.full(6, 2), n_classes=3)
    assert predict_proba(model, X).tolist() == [[0, 0, 1]] * 6


def test_unbounded_tree_fits_consistent_data(rng):
    X = rng.integers(0, 4, size=(80, 3)).astype(float)
    keys = {tuple(r): int(rng.integers(0, 3)) for r in X}
    y = np.array([keys[tuple(r)] for r in X])
    model = fit(_spec(A.DECISION_TREE), X, y)
    assert np.array_equal(predict(model, X), y)


def test_gaussian_nb_symmetric_query():
    X = np.array([[-3.0], [-1.0], [1.0], [3.0]])
    y = np.array([0, 0, 1, 1])
    model = fit(_spec(A.GAUSSIAN_NB), X, y)
    assert predict_proba(model, np.array([[0.0]]))[0] == pytest.approx([0.5, 0.5], abs=1e-12)


def test_knn_k1_returns_duplicate_label(rng):
    X = rng.normal(size=(15, 2))
    y = rng.integers(0, 3, 15)
    model = fit(_spec(A.KNN, n_neighbors=1, standardize=False), X, y, 3)
    assert np.array_equal(predict(model, X), y)


def test_knn_crafted_plane():
    X = np.array([[0, 0], [1, 0], [0, 1], [5, 5], [6, 5]], dtype=float)
    y = np.array([0, 0, 1, 1, 1])
    model = fit(_spec(A.KNN, n_neighbors=3, standardize=False), X, y)
    q = np.array([[0.2, 0.1], [5.5, 5.0], [0.4, 0.6]])
    # distance-sorted neighbours: {0,1,2} -> 0,0,1 ; {3,4,2 or 1} -> 1 ; {2,0,1} -> 1,0,0
    assert predict(model, q).tolist() == [0, 1, 0]


def test_voting_hard_majority():
    spec = ModelSpec(A.VOTING_HARD, {}, (preset("dt"),) * 3)
    est = VotingHard(spec.params, 0, spec=spec)
    est.n_classes = 2
    est.members = [_constant(0), _constant(0), _constant(1)]
    assert est.predict(np.zeros((2, 1))).tolist() == [0, 0]
    assert est.predict_proba(np.zeros((1, 1))).tolist() == [[1.0, 0.0]]


def test_voting_soft_mean():
    spec = ModelSpec(A.VOTING_SOFT, {}, (preset("dt"),) * 2)
    est = VotingSoft(spec.params, 0, spec=spec)
    est.n_classes = 2
    est.members = [_Fixed([0.8, 0.2]), _Fixed([0.4, 0.6])]
    assert est.predict_proba(np.zeros((1, 1)))[0] == pytest.approx([0.6, 0.4], abs=1e-12)


def test_lr_zero_weights_is_uniform():
    X = np.random.default_rng(1).normal(size=(9, 2))
    y = np.arange(9) % 3
    model = fit(_spec(A.LOGISTIC_REGRESSION), X, y)
    model.estimator.coef[:] = 0.0
    model.estimator.intercept[:] = 0.0
    assert np.allclose(predict_proba(model, X), 1 / 3)


def test_ties_break_to_lowest_code():
    P = np.array([[0.5, 0.5, 0.0], [0.2, 0.4, 0.4], [1 / 3, 1 / 3, 1 / 3]])
    assert argmax_lowest(P).tolist() == [0, 1, 0]
    # KNN with one neighbour per class votes a tie
    X = np.array([[-1.0], [1.0]])
    model = fit(_spec(A.KNN, n_neighbors=2, standardize=False), X, np.array([1, 0]))
    assert predict(model, np.array([[0.0]])).tolist() == [0]


def test_multinomial_nb_matches_hand_bayes():
    X = np.array([[2, 1, 0], [1, 0, 1], [0, 3, 1], [0, 1, 2]], dtype=float)
    y = np.array([0, 0, 1, 1])
    q = np.array([[1.0, 1.0, 1.0], [0.0, 2.0, 0.0]])
    model = fit(_spec(A.MULTINOMIAL_NB), X, y)
    got = predict_proba(model, q)
    # counts: class 0 -> [3,1,1] total 5 ; class 1 -> [0,4,3] total 7 ; alpha 1, V 3
    theta = [[4 / 8, 2 / 8, 2 / 8], [1 / 10, 5 / 10, 4 / 10]]
    for row, doc in zip(got, q):
        joint = [0.5 * math.prod(t**c for t, c in zip(theta[k], doc)) for k in range(2)]
        expected = [j / sum(joint) for j in joint]
        assert row == pytest.approx(expected, abs=1e-9)


def test_multinomial_nb_rejects_negative():
    with pytest.raises(NegativeFeatureForMultinomialNB):
        fit(_spec(A.MULTINOMIAL_NB), np.array([[1.0], [-1.0]]), np.array([0, 1]))


def test_fit_errors():
    with pytest.raises(DegenerateData):
        fit(preset("lr"), np.zeros((0, 2)), np.zeros(0, dtype=int))
    with pytest.raises(LengthMismatch):
        fit(preset("lr"), np.zeros((3, 2)), np.zeros(2, dtype=int))
    with pytest.raises(BadHyperparameter):
        ModelSpec(A.KNN, {"n_neighbors": 0})
    with pytest.raises(BadHyperparameter):
        ModelSpec(A.KNN, {"depth": 3})
    with pytest.raises(BadHyperparameter):
        ModelSpec(A.STACKING, {}, (preset("lr"),))


def test_schema_mismatch():
    X = FeatureMatrix(np.eye(4), ("a", "b", "c", "d"))
    model = fit(preset("dt"), X, np.array([0, 1, 0, 1]))
    with pytest.raises(SchemaMismatch):
        predict(model, FeatureMatrix(np.eye(4), ("a", "b", "d", "c")))
    with pytest.raises(SchemaMismatch):
        predict(model, np.eye(3))


def test_random_forest_single_tree_equals_decision_tree(rng):
    X = rng.normal(size=(150, 6))
    y = (X[:, 0] + X[:, 1] ** 2 > 0.5).astype(int) + (X[:, 2] > 1)
    rf = fit(_spec(A.RANDOM_FOREST, n_estimators=1, bootstrap=False, max_features=None), X, y)
    dt = fit(_spec(A.DECISION_TREE), X, y)
    Q = rng.normal(size=(300, 6))
    assert np.array_equal(predict(rf, Q), predict(dt, Q))
    assert np.array_equal(predict_proba(rf, Q), predict_proba(dt, Q))


@pytest.mark.parametrize("make", [lambda: preset("svm"), lambda: preset("lr"), lambda: preset("dt")])
def test_one_vs_rest_binary_equals_base(rng, make):
    X = rng.normal(size=(80, 4))
    y = (X[:, 0] - X[:, 3] > 0).astype(int)
    base = make()
    ovr = ModelSpec(A.ONE_VS_REST, {}, (base,), seed=base.seed)
    a, b = fit(ovr, X, y), fit(base, X, y)
    Q = rng.normal(size=(50, 4))
    assert np.array_equal(predict_proba(a, Q), predict_proba(b, Q))


_monotone = [np.exp, lambda v: v**3 + v, lambda v: 2.0 * v - 7.0, np.arctan]


@given(st.integers(0, 2**31), st.sampled_from(["dt", "rf", "extra-trees"]), st.integers(0, 3))
def test_threshold_models_invariant_to_monotone_transforms(seed, name, which):
    r = np.random.default_rng(seed)
    X = r.normal(size=(60, 3))
    y = (X[:, 0] + 0.5 * r.normal(size=60) > 0).astype(int)
    f = _monotone[which]
    spec = preset(name).with_params(n_estimators=5) if name != "dt" else preset(name)
    Q = r.normal(size=(40, 3))
    a = predict(fit(spec, X, y), Q)
    b = predict(fit(spec, f(X), y), f(Q))
    assert np.array_equal(a, b)


def test_boosting_training_error_non_increasing():
    r = np.random.default_rng(0)
    X = r.uniform(-1, 1, size=(200, 2))
    y = ((X[:, 0] > 0) ^ (X[:, 1] > 0)).astype(int)
    model = fit(ModelSpec(A.BOOSTED, {"max_depth": 2, "n_estimators": 30}), X, y)
    errors = [float(np.mean(p != y)) for p in model.estimator.staged_predict(X)]
    assert len(errors) > 1
    assert all(b <= a + 1e-12 for a, b in zip(errors, errors[1:]))


def test_bagging_disagreement_bounded_by_trees(rng):
    X = rng.normal(size=(120, 4))
    y = (X[:, 0] + rng.normal(scale=0.8, size=120) > 0).astype(int)
    bag = [predict(fit(preset("bagging", s), X, y), X) for s in range(4)]
    tree = [predict(fit(preset("bagging", s).with_params(n_estimators=1), X, y), X) for s in range(4)]

    def disagreement(preds):
        return np.mean([np.mean(a != b) for i, a in enumerate(preds) for b in preds[i + 1 :]])

    assert disagreement(bag) <= disagreement(tree)


def test_stacking_perfect_on_separable(blobs):
    X, y = blobs
    model = fit_stacking([], None, X, y, folds=5, seed=0)
    assert np.array_equal(predict(model, X), y)
    assert model.estimator.meta_features(X).shape == (len(y), 6)


def test_stacking_out_of_fold_purity(blobs):
    X, y = blobs
    folds = stratified_split(y, 4, 0)
    bases = (preset("rf", 1).with_params(n_estimators=10), preset("svm", 1))
    M = out_of_fold_proba(bases, X, y, folds, 3)
    assert M.shape == (len(y), 6)
    for _, test in folds:
        # scrambling a fold's labels cannot reach the meta-features of that fold
        y2 = y.copy()
        y2[test] = (y2[test] + 1) % 3
        assert np.array_equal(out_of_fold_proba(bases, X, y2, folds, 3)[test], M[test])


def test_probabilities_are_simplex(blobs):
    X, y = blobs
    for name in PRESET_NAMES:
        P = predict_proba(fit(preset(name), X, y), X[:20])
        assert P.shape == (20, 3)
        assert np.all(P >= 0)
        assert np.allclose(P.sum(axis=1), 1.0, atol=1e-9), name


def test_fit_is_deterministic(blobs):
    X, y = blobs
    for name in ("rf", "svm", "mlp", "stacking", "extra-trees"):
        a = model_to_dict(fit(preset(name, 3), X, y))
        b = model_to_dict(fit(preset(name, 3), X, y))
        assert json.dumps(a, sort_keys=True) == json.dumps(b, sort_keys=True)


@pytest.mark.parametrize("name", PRESET_NAMES)
def test_serialization_round_trip(blobs, name):
    X, y = blobs
    model = fit(preset(name), FeatureMatrix(X, tuple(f"c{i}" for i in range(X.shape[1]))), y)
    doc = json.loads(json.dumps(model_to_dict(model, {"a": 0, "b": 1, "c": 2})))
    back = model_from_dict(doc)
    assert back.column_names == model.column_names
    assert np.array_equal(predict_proba(back, X), predict_proba(model, X))


def test_version_mismatch_fails_closed(blobs):
    X, y = blobs
    doc = model_to_dict(fit(preset("dt"), X, y))
    doc["version"] = 99
    with pytest.raises(VersionMismatch):
        model_from_dict(doc)


def test_spec_round_trip():
    for name in PRESET_NAMES:
        spec = preset(name, 7)
        assert ModelSpec.from_dict(json.loads(json.dumps(spec.to_dict()))) == spec


def _brute_knn(Xtr, ytr, q, k, n_classes):
    dists = sorted((sum((a - b) ** 2 for a, b in zip(row, q)), i) for i, row in enumerate(Xtr))
    votes = [0] * n_classes
    for _, i in dists[:k]:
        votes[ytr[i]] += 1
    return max(range(n_classes), key=lambda c: (votes[c], -c))


@pytest.mark.parametrize("problem", range(50))
def test_knn_matches_brute_force(problem):
    r = np.random.default_rng(1000 + problem)
    X = r.normal(size=(20, 3))
    y = r.integers(0, 3, 20)
    k = int(r.integers(1, 8))
    Q = r.normal(size=(10, 3))
    model = fit(_spec(A.KNN, n_neighbors=k, standardize=False), X, y, 3)
    expected = [_brute_knn(X.tolist(), y.tolist(), q, k, 3) for q in Q.tolist()]
    assert predict(model, Q).tolist() == expected

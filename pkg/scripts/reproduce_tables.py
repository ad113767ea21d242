"""Accuracy table, per-class stacking metrics, 5x2cv comparisons and the feature study.

    python scripts/reproduce_tables.py --input P1.csv P2.csv ... [--schema map.json] [--out results/]

Without --input a synthetic corpus stands in, which exercises the pipeline
but says nothing about the real data.
"""
import argparse
import json
import os
import time
import warnings
from pathlib import Path

from triage.corpus import TaskKind, build_dataset, ingest, stratified_split
from triage.evaluation import ImportanceMethod, cross_validate, feature_importance, five_by_two_ftest, select_top_k
from triage.features import CuratedFeaturizer, NgramMode, TextVectorizer
from triage.learners import preset
from triage.synthetic import synthetic_corpus

ACCURACY_ROWS = [
    ("SVM", "svm"),
    ("Logistic Regression", "lr"),
    ("Naive Bayes", "nb"),
    ("Multilayer", "mlp"),
    ("SGD", "sgd"),
    ("Decision Tree", "dt"),
    ("Random Forest", "rf"),
    ("KNN", "knn"),
    ("One-vs-Rest", "ovr"),
    ("Voting (soft)", "voting-soft"),
    ("Voting (hard)", "voting-hard"),
    ("RF with Boosting", "boosting"),
    ("Bagging", "bagging"),
    ("Extra Trees", "extra-trees"),
    ("Stacking (RF and Linear SVC)", "stacking"),
]


def load(args):
    if not args.input:
        return synthetic_corpus(args.rows, args.seed)
    schema = json.loads(Path(args.schema).read_text()) if args.schema else None
    records = []
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        for path in args.input:
            records.extend(ingest(path, schema))
    return records


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--input", nargs="*")
    ap.add_argument("--schema")
    ap.add_argument("--rows", type=int, default=1500, help="synthetic corpus size when --input is absent")
    ap.add_argument("--seed", type=int, default=42)
    ap.add_argument("--folds", type=int, default=10)
    ap.add_argument("--jobs", type=int, default=os.cpu_count() or 1)
    ap.add_argument("--out", default="results")
    ap.add_argument("--skip-comparisons", action="store_true")
    args = ap.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    records = load(args)
    results = {"source": args.input or f"synthetic({args.rows}, seed={args.seed})"}

    data = {}
    for task in TaskKind:
        ds = build_dataset(records, task)
        data[task] = (ds, list(ds.records), ds.labels, stratified_split(ds.labels, args.folds, args.seed))

    print(f"{'Model':<32}{'TA':>8}{'DA':>8}")
    table = {}
    for label, name in ACCURACY_ROWS:
        row = {}
        for task, (ds, recs, y, plan) in data.items():
            t0 = time.perf_counter()
            rep = cross_validate(preset(name, args.seed), recs, y, plan, featurizer=CuratedFeaturizer(),
                                 n_classes=ds.n_classes, class_names=ds.class_names, jobs=args.jobs)
            row[task.value] = {"accuracy": rep.accuracy, "fold_mean": rep.mean_fold_accuracy,
                               "seconds": time.perf_counter() - t0}
            if name == "stacking":
                results.setdefault("per_class", {})[task.value] = rep.to_dict()
                (out / f"confusion_{task.value}.csv").write_text(rep.confusion_csv())
        table[label] = row
        print(f"{label:<32}{row['team']['accuracy']:>8.2f}{row['developer']['accuracy']:>8.2f}")
    results["accuracy"] = table

    print("\nStacking per-class metrics")
    for task in TaskKind:
        print(task.value)
        for cls, m in results["per_class"][task.value]["per_class"].items():
            print(f"  {cls:<10} P {m['precision']:.2f}  R {m['recall']:.2f}  F1 {m['f1']:.2f}")

    ds, recs, y, plan = data[TaskKind.TEAM]
    feats = {}
    for label, fz in (("curated", CuratedFeaturizer()), ("bow-unigram", TextVectorizer("bow", NgramMode.UNIGRAM)),
                      ("bow-bigram", TextVectorizer("bow", NgramMode.BIGRAM)), ("tfidf", TextVectorizer("tfidf"))):
        feats[label] = cross_validate(preset("stacking", args.seed), recs, y, plan, featurizer=fz,
                                      n_classes=ds.n_classes, jobs=args.jobs).accuracy
        print(f"stacking / {label:<12} {feats[label]:.4f}")
    results["feature_sets"] = feats

    X = CuratedFeaturizer().fit_transform(recs)
    study = {}
    for method in ImportanceMethod:
        rep = feature_importance(X, y, method)
        top = select_top_k(rep, 8)
        acc = cross_validate(preset("stacking", args.seed), X.select(top), y, plan, n_classes=ds.n_classes,
                             jobs=args.jobs).accuracy
        study[method.value] = {"ranking": rep.ranking, "top8": top, "top8_accuracy": acc}
        print(f"{method.value}: top-8 {', '.join(top)} -> {acc:.4f}")
    results["importance"] = study

    if not args.skip_comparisons:
        print(f"\n{'Stacking vs':<22}{'p-value':>10}  Decision")
        comps = {}
        for label, name in ACCURACY_ROWS[:-1]:
            res = five_by_two_ftest(preset("stacking", args.seed), preset(name, args.seed), recs, y, 0.05,
                                    args.seed, featurizer=CuratedFeaturizer(), n_classes=ds.n_classes,
                                    jobs=args.jobs)
            comps[label] = res.to_dict()
            print(f"{label:<22}{res.p_value:>10.4f}  {res.decision.value}")
        results["comparisons"] = comps

    (out / "results.json").write_text(json.dumps(results, indent=2, sort_keys=True))
    print(f"\nwrote {out / 'results.json'}")


if __name__ == "__main__":
    main()

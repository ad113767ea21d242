"""``triage`` command line: ingest, featurize, train, eval, compare, importance, predict."""
from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import warnings
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Sequence

import numpy as np

from . import evaluation as ev
from .corpus import IngestReport, TaskKind, build_dataset, ingest_with_report, stratified_split, write_csv
from .errors import TriageError
from .features import KeywordRuleSet
from .learners import PRESET_NAMES, ModelSpec, preset
from .pipeline import FEATURE_MODES, Pipeline, issue_from_json, make_featurizer, train_pipeline
from .textprep import SentimentLexicon, load_stopwords

COMMANDS = ("ingest", "featurize", "train", "eval", "compare", "importance", "predict")
DEFAULT_OUTPUT = {
    "ingest": "issues.normalized.csv",
    "featurize": "features.csv",
    "train": "model.json",
    "eval": "eval_report.json",
    "compare": "compare_report.json",
    "importance": "importance_report.json",
    "predict": None,
}
# Keys that never influence results and so stay out of embedded configs.
_VOLATILE = ("output", "jobs", "config")


@dataclass
class RunConfig:
    command: str
    input: list[str] = field(default_factory=list)
    output: str | None = None
    task: str = "team"
    features: str = "curated"
    model: str = "stacking"
    a: str = "stacking"
    b: str = "svm"
    folds: int = 10
    seed: int = 42
    alpha: float = 0.05
    top_k: int = 8
    jobs: int = 1
    schema: str | None = None
    rules: str | None = None
    lexicon: str | None = None
    stopwords: str | None = None
    ngram: str = "unigram"
    config: str | None = None

    def resolved(self) -> dict:
        return {k: v for k, v in asdict(self).items() if k not in _VOLATILE}


class UsageError(Exception):
    pass


def _model_ref(value: str) -> str:
    if value in PRESET_NAMES or (value.endswith(".json") and Path(value).is_file()):
        return value
    raise argparse.ArgumentTypeError(f"unknown model {value!r}; choose a preset ({', '.join(PRESET_NAMES)}) or a spec .json file")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="triage", description="Issue assignment to team roles and seniority levels.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--input", nargs="+", default=None)
        p.add_argument("--output", default=None)
        p.add_argument("--config", default=None, help="JSON file of RunConfig keys; flags override it")
        p.add_argument("--task", choices=[t.value for t in TaskKind], default=None)
        p.add_argument("--features", choices=FEATURE_MODES, default=None)
        if name == "predict":
            p.add_argument("--model", default=None, help="trained model file")
        else:
            p.add_argument("--model", type=_model_ref, default=None)
        if name == "compare":
            p.add_argument("--a", type=_model_ref, default=None)
            p.add_argument("--b", type=_model_ref, default=None)
        p.add_argument("--folds", type=int, default=None)
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--alpha", type=float, default=None)
        p.add_argument("--top-k", dest="top_k", type=int, default=None)
        p.add_argument("--jobs", type=int, default=None)
        p.add_argument("--schema", default=None, help="JSON map of canonical field -> file header")
        p.add_argument("--rules", default=None, help="keyword rule .ini file")
        p.add_argument("--lexicon", default=None, help="sentiment lexicon TSV")
        p.add_argument("--stopwords", default=None, help="stopword list, one per line")
    return parser


def resolve_config(args: argparse.Namespace) -> RunConfig:
    values = {}
    if args.config:
        try:
            loaded = json.loads(Path(args.config).read_text(encoding="utf-8"))
        except (OSError, ValueError) as exc:
            raise UsageError(f"--config: cannot read {args.config}: {exc}") from exc
        known = {f.name for f in fields(RunConfig)} - {"command"}
        bad = sorted(set(loaded) - known)
        if bad:
            raise UsageError(f"--config: unknown key(s) {', '.join(bad)}")
        values.update(loaded)
    for key, value in vars(args).items():
        if key != "command" and value is not None:
            values[key] = value
    cfg = RunConfig(command=args.command, **values)
    if isinstance(cfg.input, str):
        cfg.input = [cfg.input]
    if cfg.output is None:
        cfg.output = DEFAULT_OUTPUT[cfg.command]
    if "jobs" not in values:
        cfg.jobs = os.cpu_count() or 1
    if not cfg.input:
        raise UsageError("--input is required")
    if cfg.folds < 2:
        raise UsageError("--folds must be >= 2")
    if not 0.0 < cfg.alpha < 1.0:
        raise UsageError("--alpha must be in (0, 1)")
    if cfg.top_k < 1:
        raise UsageError("--top-k must be >= 1")
    if cfg.command == "predict" and not cfg.model:
        raise UsageError("--model (trained model file) is required for predict")
    return cfg


# ---------------------------------------------------------------- helpers


def _sha256(paths: Sequence[str | None]) -> str:
    h = hashlib.sha256()
    for p in paths:
        if p is None:
            continue
        h.update(Path(p).read_bytes())
        h.update(b"\0")
    return h.hexdigest()


def _provenance(cfg: RunConfig) -> dict:
    return {
        "config": cfg.resolved(),
        "input_sha256": _sha256([*cfg.input, cfg.schema, cfg.rules, cfg.lexicon, cfg.stopwords]),
    }


def _write_json(path: str | Path, doc: dict) -> None:
    Path(path).write_text(json.dumps(doc, sort_keys=True, indent=2) + "\n", encoding="utf-8")


def _read_json(path: str, flag: str):
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise TriageError(f"{flag}: cannot read {path}: {exc.strerror}") from exc
    except ValueError as exc:
        raise TriageError(f"{flag}: {path} is not valid JSON: {exc}") from exc


def _ingest(cfg: RunConfig) -> IngestReport:
    schema = _read_json(cfg.schema, "--schema") if cfg.schema else None
    merged = IngestReport(records=[])
    for path in cfg.input:
        if not Path(path).is_file():
            raise TriageError(f"--input: no such file {path}")
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            rep = ingest_with_report(path, schema)
        merged.records.extend(rep.records)
        merged.dropped_unlabeled += rep.dropped_unlabeled
        merged.malformed.extend(rep.malformed)
    if merged.malformed:
        print(f"warning: skipped {len(merged.malformed)} malformed row(s); first: {merged.malformed[0]}", file=sys.stderr)
    return merged


def _dataset(cfg: RunConfig):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return build_dataset(_ingest(cfg).records, TaskKind(cfg.task))


def _featurizer(cfg: RunConfig, mode: str | None = None):
    rules = KeywordRuleSet.load(cfg.rules) if cfg.rules else None
    lexicon = SentimentLexicon.load(cfg.lexicon) if cfg.lexicon else None
    stopwords = load_stopwords(cfg.stopwords) if cfg.stopwords else None
    return make_featurizer(mode or cfg.features, rules=rules, lexicon=lexicon, stopwords=stopwords, ngram=cfg.ngram)


def _spec(ref: str, seed: int) -> ModelSpec:
    if ref in PRESET_NAMES:
        return preset(ref, seed)
    return ModelSpec.from_dict(_read_json(ref, "--model")).with_seed(seed)


def _stem(path: str) -> str:
    p = Path(path)
    return str(p.with_suffix("")) if p.suffix else str(p)


# ---------------------------------------------------------------- commands


def cmd_ingest(cfg: RunConfig) -> None:
    rep = _ingest(cfg)
    write_csv(rep.records, cfg.output)
    meta = {
        **_provenance(cfg),
        "records": len(rep.records),
        "dropped_unlabeled": rep.dropped_unlabeled,
        "malformed": [str(m) for m in rep.malformed],
    }
    _write_json(_stem(cfg.output) + ".meta.json", meta)
    print(f"kept {len(rep.records)} record(s), dropped {rep.dropped_unlabeled} unlabeled, "
          f"skipped {len(rep.malformed)} malformed -> {cfg.output}")


def cmd_featurize(cfg: RunConfig) -> None:
    ds = _dataset(cfg)
    X = _featurizer(cfg).fit_transform(list(ds.records))
    X.to_csv(cfg.output)
    meta = {
        **_provenance(cfg),
        "columns": list(X.column_names),
        "label_index": dict(ds.label_index),
        "labels": ds.labels.tolist(),
    }
    _write_json(_stem(cfg.output) + ".meta.json", meta)
    print(f"{X.rows} row(s) x {X.columns} column(s) -> {cfg.output}")


def cmd_train(cfg: RunConfig) -> None:
    ds = _dataset(cfg)
    pipe = train_pipeline(ds, _spec(cfg.model, cfg.seed), _featurizer(cfg))
    pipe.save(cfg.output, _provenance(cfg))
    print(f"trained {cfg.model} on {len(ds)} record(s), classes {', '.join(ds.class_names)} -> {cfg.output}")


def _features_and_labels(cfg: RunConfig):
    ds = _dataset(cfg)
    return ds, list(ds.records), ds.labels, _featurizer(cfg)


def cmd_eval(cfg: RunConfig) -> None:
    ds, records, y, fz = _features_and_labels(cfg)
    plan = stratified_split(y, cfg.folds, cfg.seed)
    report = ev.cross_validate(_spec(cfg.model, cfg.seed), records, y, plan, featurizer=fz,
                               n_classes=ds.n_classes, class_names=ds.class_names, jobs=cfg.jobs)
    _write_json(cfg.output, {**_provenance(cfg), "metrics": report.to_dict()})
    Path(_stem(cfg.output) + ".confusion.csv").write_text(report.confusion_csv(), encoding="utf-8")
    print(f"{cfg.model} / {cfg.features} / {cfg.task}, {cfg.folds}-fold CV on {len(ds)} record(s)")
    print(report.table())


def cmd_compare(cfg: RunConfig) -> None:
    ds, records, y, fz = _features_and_labels(cfg)
    res = ev.five_by_two_ftest(_spec(cfg.a, cfg.seed), _spec(cfg.b, cfg.seed), records, y, cfg.alpha, cfg.seed,
                               featurizer=fz, n_classes=ds.n_classes, jobs=cfg.jobs)
    _write_json(cfg.output, {**_provenance(cfg), "comparison": res.to_dict()})
    f = "nan" if np.isnan(res.f) else f"{res.f:.6f}"
    print(f"{'A':<12}{'B':<12}{'f':>12}{'p-value':>12}  Decision")
    print(f"{cfg.a:<12}{cfg.b:<12}{f:>12}{res.p_value:>12.4f}  {res.decision.value}"
          + ("  (degenerate variance)" if res.degenerate else ""))


def cmd_importance(cfg: RunConfig) -> None:
    ds, records, y, fz = _features_and_labels(cfg)
    X = fz.fit_transform(records)
    if cfg.top_k > X.columns:
        raise TriageError(f"--top-k {cfg.top_k} exceeds the {X.columns} available columns")
    spec = _spec(cfg.model, cfg.seed)
    plan = stratified_split(y, cfg.folds, cfg.seed)
    full = ev.cross_validate(spec, X, y, plan, n_classes=ds.n_classes, jobs=cfg.jobs)
    doc = {**_provenance(cfg), "full_accuracy": full.accuracy, "methods": {}}
    print(f"full feature set ({X.columns} columns): accuracy {full.accuracy:.4f}")
    for method in ev.ImportanceMethod:
        rep = ev.feature_importance(X, y, method)
        top = ev.select_top_k(rep, cfg.top_k)
        sub = ev.cross_validate(spec, X.select(top), y, plan, n_classes=ds.n_classes, jobs=cfg.jobs)
        doc["methods"][method.value] = {**rep.to_dict(), "top_k": top, "top_k_accuracy": sub.accuracy}
        print(f"{method.value}: top-{cfg.top_k} {', '.join(top)}; accuracy {sub.accuracy:.4f}")
    _write_json(cfg.output, doc)


def cmd_predict(cfg: RunConfig) -> None:
    if not Path(cfg.model).is_file():
        raise TriageError(f"--model: no such file {cfg.model}")
    pipe = Pipeline.load(cfg.model)
    docs = []
    for path in cfg.input:
        doc = _read_json(path, "--input")
        docs.extend(doc if isinstance(doc, list) else [doc])
    results = []
    for doc in docs:
        ranking = pipe.rank(issue_from_json(doc))
        results.append({"id": str(doc.get("id", "")), "ranking": [[label, p] for label, p in ranking]})
        if len(docs) > 1:
            print(f"# {doc.get('id', '')}")
        for label, p in ranking:
            print(f"{label}\t{p:.6f}")
    if cfg.output:
        _write_json(cfg.output, {**_provenance(cfg), "predictions": results})


HANDLERS = {
    "ingest": cmd_ingest,
    "featurize": cmd_featurize,
    "train": cmd_train,
    "eval": cmd_eval,
    "compare": cmd_compare,
    "importance": cmd_importance,
    "predict": cmd_predict,
}


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        cfg = resolve_config(args)
    except UsageError as exc:
        print(f"triage {args.command}: error: {exc}", file=sys.stderr)
        return 2
    try:
        HANDLERS[cfg.command](cfg)
    except TriageError as exc:
        print(f"triage {cfg.command}: error: {exc}", file=sys.stderr)
        return 1
    except (OSError, ValueError, KeyError) as exc:
        print(f"triage {cfg.command}: error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    return 0


run = main


if __name__ == "__main__":
    sys.exit(main())

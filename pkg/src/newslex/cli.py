"""Command-line entry point.

Subcommands: preprocess, extract, train, eval, importance, explain, fuse.
Global flags: --seed, --threads, --config, --json-errors. Exit codes:
0 success (and --help), 2 usage error, 1 runtime error. Identical inputs
and seeds produce byte-identical outputs regardless of --threads.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import fusion as fusion_mod
from . import harness
from .documents import read_corpus, write_corpus, write_text_atomic
from .features import (
    FEATURE_NAMES,
    FeatureTable,
    LexiconFeatureExtractor,
    read_features_csv,
    write_features_csv,
)
from .models import export_rule, gain_importance, load_model, save_model
from .normalize import FeatureNormalizer
from .textprep import PLACEHOLDER_KINDS, RewriteRules, preprocess_corpus


def _load_json(path):
    with open(path, encoding="utf-8") as handle:
        return json.load(handle)


def cmd_preprocess(args):
    rules = RewriteRules.from_json(args.rules) if args.rules else RewriteRules()
    docs = read_corpus(args.input, fmt=args.in_format)
    clean = preprocess_corpus(docs, rules=rules, threads=args.threads)
    write_corpus(clean, args.output, fmt=args.out_format or args.in_format)
    totals = {kind: 0 for kind in PLACEHOLDER_KINDS}
    unknown = 0
    for doc in clean:
        for kind in PLACEHOLDER_KINDS:
            totals[kind] += doc.placeholder_counts.get(kind, 0)
        unknown += doc.unknown_emoji
    print(f"documents: {len(clean)}")
    print("placeholders: " + " ".join(f"{k}={totals[k]}" for k in PLACEHOLDER_KINDS))
    if unknown:
        print(f"warning: unknown emoji codepoints: {unknown}")
    return 0


def cmd_extract(args):
    docs = read_corpus(args.input, fmt=args.in_format)
    extractor = LexiconFeatureExtractor(
        lexicon_dir=args.lexicons, use_raw_text=args.raw_text
    ).fit()
    X = extractor.transform(docs)
    table = FeatureTable(ids=[d.id for d in docs], X=X, labels=[d.label for d in docs])
    if args.fit_normalizer:
        split = harness.split_dataset(table.ids, seed=args.split_seed)
        norm = FeatureNormalizer().fit(table.subset(split.train).X)
        norm.save(args.fit_normalizer)
        print(f"normalizer written: {args.fit_normalizer} "
              f"(fitted on {len(split.train)} train rows, split seed {args.split_seed})")
    if args.normalize:
        norm = FeatureNormalizer.load(args.normalize)
        table = FeatureTable(ids=table.ids, X=norm.transform(table.X), labels=table.labels)
    write_features_csv(table, args.output)
    print(f"features written: {args.output} ({len(table)} rows)")
    return 0


def _experiment_config(args):
    config = dict(args.config_data) if args.config_data else {}
    if args.features:
        config["features"] = args.features
    if args.dataset:
        config["dataset"] = args.dataset
    if args.model:
        config["model"] = args.model
    if args.lexicons:
        config["lexicons"] = args.lexicons
    if args.runs is not None:
        config["runs"] = args.runs
    if args.grid:
        grid = _load_json(args.grid)
        # a multi-model grid file (like the bundled default_grids.json)
        # is indexed by the chosen model name
        if grid and all(isinstance(v, dict) for v in grid.values()):
            model = config.get("model", "gbdt")
            if model not in grid:
                raise ValueError(f"grid file has no entry for model {model!r}")
            grid = grid[model]
        config["grid"] = grid
    if args.params:
        config["params"] = _load_json(args.params)
    if args.split_seed is not None:
        config["split_seed"] = args.split_seed
    if args.split_file:
        config["split_file"] = args.split_file
    config.setdefault("base_seed", args.seed)
    return config


def cmd_train(args):
    config = _experiment_config(args)
    report, models, norm = harness.run_experiment(config, threads=args.threads)
    out = args.out
    write_text_atomic(out + ".report.txt", harness.render_report([report]))
    write_text_atomic(out + ".report.csv", harness.render_report_csv([report]))
    best = report.provenance["best_run_index"]
    save_model(models[best], out + ".model.json")
    norm.save(out + ".normalizer.json")
    provenance = json.dumps(report.provenance, sort_keys=True, indent=2) + "\n"
    write_text_atomic(out + ".provenance.json", provenance)
    print(harness.render_report([report]), end="")
    print(f"model written: {out}.model.json (run {best}, seed {report.seeds[best]})")
    return 0


def cmd_eval(args):
    model = load_model(args.model)
    table = read_features_csv(args.features)
    X = table.X
    if args.normalizer:
        X = FeatureNormalizer.load(args.normalizer).transform(X)
    pred = model.predict(X)
    err = harness.error_rate(pred, table.y())
    n_wrong = int(np.sum(pred != table.y()))
    print(f"documents: {len(table)}")
    print(f"misclassified: {n_wrong}")
    print(f"error rate: {err:.2f}%")
    return 0


def cmd_importance(args):
    model = load_model(args.model)
    if model.model_kind != "gbdt":
        raise ValueError(f"importance needs a gbdt model, got {model.model_kind!r}")
    report = gain_importance(model, FEATURE_NAMES)
    write_text_atomic(args.output, report.to_csv())
    chart_path = args.chart or (os.path.splitext(args.output)[0] + "_chart.json")
    chart = {
        "features": [name for name, _ in report.entries],
        "importance_pct": [pct for _, pct in report.entries],
    }
    write_text_atomic(chart_path, json.dumps(chart, sort_keys=True, indent=2) + "\n")
    for name, pct in report.entries:
        print(f"{name}\t{pct:.2f}")
    return 0


def cmd_explain(args):
    model = load_model(args.model)
    if model.model_kind != "decision_tree":
        raise ValueError(f"explain needs a decision tree, got {model.model_kind!r}")
    text = export_rule(model, feature_names=FEATURE_NAMES,
                       max_export_depth=args.max_export_depth)
    print(text, end="")
    return 0


def cmd_fuse(args):
    table = read_features_csv(args.features)
    if args.embeddings:
        manifest, records = fusion_mod.load_embeddings(args.embeddings)
    elif args.corpus:
        docs = read_corpus(args.corpus, fmt=args.in_format)
        manifest, recs = fusion_mod.encode_corpus(docs, dim=args.toy_dim)
        records = {r.id: r for r in recs}
    else:
        raise ValueError("fuse needs --embeddings or --corpus (toy encoder)")
    split = harness.split_dataset(table.ids, seed=args.split_seed or 0)
    head_params = {}
    if args.config_data and "head" in args.config_data:
        head_params = {k: tuple(v) if isinstance(v, list) else v
                       for k, v in args.config_data["head"].items()}
    if args.validate_every is not None:
        head_params["validate_every"] = args.validate_every
    comparison = fusion_mod.compare_fusion(
        records, table, split, runs=args.runs if args.runs is not None else 5,
        base_seed=args.seed, **head_params,
    )
    text = harness.render_report([comparison])
    print(f"embeddings: {manifest.model} dim={manifest.dim} pooling={manifest.pooling}")
    print(text, end="")
    print(f"relative improvement: {comparison.improvement_pct:.1f}%")
    if args.out:
        write_text_atomic(args.out + ".report.txt", text)
        write_text_atomic(args.out + ".report.csv",
                          harness.render_report_csv([comparison]))
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="newslex",
        description="Linguistic-feature fake news detection pipeline",
    )
    parser.add_argument("--seed", type=int, default=0, help="base random seed")
    parser.add_argument("--threads", type=int, default=os.cpu_count(),
                        help="worker threads for per-document stages "
                             "(never affects outputs)")
    parser.add_argument("--config", help="JSON config file (experiment keys)")
    parser.add_argument("--json-errors", action="store_true",
                        help="report errors as JSON on stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("preprocess", help="uncase, rewrite tokens, textualize emoji")
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--in-format", choices=("tsv", "csv"), default="tsv")
    p.add_argument("--out-format", choices=("tsv", "csv"))
    p.add_argument("--rules", help="JSON rewrite-rules file")
    p.set_defaults(func=cmd_preprocess)

    p = sub.add_parser("extract", help="compute the 18 linguistic features")
    p.add_argument("--input", required=True, help="preprocessed corpus")
    p.add_argument("--output", required=True, help="features CSV")
    p.add_argument("--in-format", choices=("tsv", "csv"), default="tsv")
    p.add_argument("--lexicons", help="lexicon directory (default: bundled)")
    p.add_argument("--raw-text", action="store_true",
                   help="extract from raw text instead of preprocessed")
    p.add_argument("--fit-normalizer", metavar="PATH",
                   help="fit z-score stats on the train split and write them as JSON")
    p.add_argument("--split-seed", type=int, default=0,
                   help="seed of the 60/20/20 split whose train part fits the normalizer")
    p.add_argument("--normalize", metavar="PATH",
                   help="apply a saved normalizer to the output")
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("train", help="run seeded training runs and report")
    p.add_argument("--features", help="extracted features CSV")
    p.add_argument("--dataset", help="raw corpus (runs preprocess+extract)")
    p.add_argument("--model", choices=sorted(harness.MODEL_ALIASES))
    p.add_argument("--lexicons")
    p.add_argument("--runs", type=int)
    p.add_argument("--grid", help="JSON hyperparameter grid file")
    p.add_argument("--params", help="JSON fixed-hyperparameter file")
    p.add_argument("--split-seed", type=int)
    p.add_argument("--split-file", help="predefined split JSON")
    p.add_argument("--out", required=True, help="output path prefix")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="score a saved model on a feature CSV")
    p.add_argument("--model", required=True)
    p.add_argument("--features", required=True)
    p.add_argument("--normalizer", help="saved normalizer JSON to apply")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("importance", help="gain importance of a gbdt model")
    p.add_argument("--model", required=True)
    p.add_argument("--output", required=True, help="importance CSV")
    p.add_argument("--chart", help="bar-chart data JSON (default: <output>_chart.json)")
    p.set_defaults(func=cmd_importance)

    p = sub.add_parser("explain", help="print a tree's if/else rule")
    p.add_argument("--model", required=True)
    p.add_argument("--max-export-depth", type=int, default=3)
    p.set_defaults(func=cmd_explain)

    p = sub.add_parser("fuse", help="compare embedding-only vs fused heads")
    p.add_argument("--features", required=True, help="normalized features CSV")
    p.add_argument("--embeddings", help="embedding JSONL file")
    p.add_argument("--corpus", help="preprocessed corpus for the toy encoder")
    p.add_argument("--in-format", choices=("tsv", "csv"), default="tsv")
    p.add_argument("--toy-dim", type=int, default=64)
    p.add_argument("--runs", type=int)
    p.add_argument("--split-seed", type=int)
    p.add_argument("--validate-every", type=int)
    p.add_argument("--out", help="output path prefix for reports")
    p.set_defaults(func=cmd_fuse)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    args.config_data = _load_json(args.config) if args.config else None
    try:
        return args.func(args)
    except BrokenPipeError:
        return 1
    except Exception as exc:  # uniform nonzero-exit convention
        if args.json_errors:
            payload = {"error": type(exc).__name__, "message": str(exc)}
            print(json.dumps(payload, sort_keys=True), file=sys.stderr)
        else:
            print(f"newslex: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

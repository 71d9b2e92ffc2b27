"""Dataset splitting, seeded multi-run experiments and report tables.

An experiment config is one JSON object (all keys below; unknown keys are
rejected so typos fail fast):

    dataset      corpus path (id/text/label), or null when "features" given
    format       "tsv" | "csv" (default tsv)
    features     precomputed features CSV path, bypasses preprocess+extract
    lexicons     lexicon directory (null -> bundled substitutes)
    raw_text     extract from raw instead of preprocessed text (default false)
    model        "dt" | "rf" | "gbdt" | "svm" | "mlp"
    params       fixed hyperparameters (dict)
    grid         hyperparameter grid {name: [values, ...]} or null
    runs         number of seeded runs (default 5)
    base_seed    run i uses seed base_seed + i (default 0)
    split_seed   seed of the 60/20/20 shuffle (default 0)
    split_file   JSON {"train": [...], "validation": [...], "test": [...]}
                 honored instead of shuffling when given

The split stays fixed across the runs; only training is reseeded. Every
report embeds its full effective config and a sha256 of it, so a report
can be reproduced exactly from its own provenance block.
"""

from __future__ import annotations

import hashlib
import itertools
import json
import math
from contextlib import contextmanager
from dataclasses import dataclass, field

import numpy as np

from .documents import read_corpus
from .features import FeatureTable, LexiconFeatureExtractor, read_features_csv
from .models import MODEL_CLASSES
from .normalize import FeatureNormalizer
from .textprep import preprocess_corpus

MODEL_ALIASES = {
    "dt": "decision_tree",
    "rf": "random_forest",
    "gbdt": "gbdt",
    "svm": "linear_svm",
    "mlp": "mlp",
}


class ExperimentError(RuntimeError):
    """An experiment stage failed; the message names the stage."""


@contextmanager
def _stage(name):
    try:
        yield
    except ExperimentError:
        raise
    except Exception as exc:
        raise ExperimentError(f"stage '{name}' failed: {exc}") from exc


@dataclass(frozen=True)
class DatasetSplit:
    """Disjoint train/validation/test document ids, 60/20/20 within one
    document (the rounding remainder goes to train)."""

    train: tuple[str, ...]
    validation: tuple[str, ...]
    test: tuple[str, ...]
    seed: int | None = None

    def __post_init__(self):
        parts = [set(self.train), set(self.validation), set(self.test)]
        total = len(self.train) + len(self.validation) + len(self.test)
        if len(parts[0] | parts[1] | parts[2]) != total:
            raise ValueError("split parts overlap or contain duplicates")


def split_dataset(docs, seed=0, given_split=None) -> DatasetSplit:
    """Deterministic seeded shuffle then 60/20/20 cut, or honor a
    predefined split mapping when the corpus ships one."""
    ids = [doc.id if hasattr(doc, "id") else str(doc) for doc in docs]
    if given_split is not None:
        parts = {k: tuple(given_split[k]) for k in ("train", "validation", "test")}
        known = set(ids)
        listed = set(parts["train"]) | set(parts["validation"]) | set(parts["test"])
        if listed != known:
            raise ValueError(
                f"predefined split does not cover the corpus exactly "
                f"(missing {sorted(known - listed)[:3]}, extra {sorted(listed - known)[:3]})"
            )
        return DatasetSplit(**parts, seed=None)
    n = len(ids)
    if n < 5:
        raise ValueError(f"need at least 5 documents to split, got {n}")
    order = np.random.default_rng(seed).permutation(n)
    # validation/test round to the nearest document; the remainder goes
    # to train, keeping every part within one document of 60/20/20
    n_val = int(n / 5 + 0.5)
    n_test = int(n / 5 + 0.5)
    n_train = n - n_val - n_test
    shuffled = [ids[i] for i in order]
    return DatasetSplit(
        train=tuple(shuffled[:n_train]),
        validation=tuple(shuffled[n_train : n_train + n_val]),
        test=tuple(shuffled[n_train + n_val :]),
        seed=seed,
    )


def load_split_file(path):
    with open(path, encoding="utf-8") as handle:
        return json.load(handle)


def load_dataset(path, fmt="tsv"):
    """Labeled corpus loader: every row must carry a real/fake label."""
    return read_corpus(path, fmt=fmt, require_labels=True)


def error_rate(pred, truth) -> float:
    """Misclassified fraction as a percentage."""
    pred = np.asarray(pred, dtype=bool)
    truth = np.asarray(truth, dtype=bool)
    if len(pred) != len(truth) or len(pred) == 0:
        raise ValueError("prediction/truth length mismatch or empty")
    return 100.0 * float(np.mean(pred != truth))


def summarize_errors(errors):
    """(mean, best, sample SD); a single run reports SD 0."""
    if not errors:
        raise ValueError("no error values to summarize")
    arr = np.asarray(errors, dtype=np.float64)
    mean = float(arr.mean())
    best = float(arr.min())
    sd = float(arr.std(ddof=1)) if len(arr) > 1 else 0.0
    return mean, best, sd


@dataclass(frozen=True)
class RunReport:
    model: str
    errors: tuple[float, ...]
    seeds: tuple[int, ...]
    mean: float
    best: float
    sd: float
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.errors:
            raise ValueError("report needs at least one run")
        if self.best > self.mean + 1e-12:
            raise ValueError("best error cannot exceed the mean")

    @property
    def single_run(self) -> bool:
        return len(self.errors) == 1


DEFAULT_CONFIG = {
    "dataset": None,
    "format": "tsv",
    "features": None,
    "lexicons": None,
    "raw_text": False,
    "model": "gbdt",
    "params": {},
    "grid": None,
    "runs": 5,
    "base_seed": 0,
    "split_seed": 0,
    "split_file": None,
}

_COMPLEXITY_KEYS = ("max_depth", "n_rounds", "n_trees", "epochs", "max_epochs")


def _complexity(params):
    key = []
    for name in _COMPLEXITY_KEYS:
        value = params.get(name)
        if value is None:
            value = math.inf
        key.append(value)
    return tuple(key)


def _canonical(obj):
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def config_hash(config) -> str:
    return hashlib.sha256(_canonical(config).encode("utf-8")).hexdigest()


def _make_model(kind, params, seed):
    cls = MODEL_CLASSES[kind]
    kwargs = dict(params)
    if "seed" in cls().get_params():
        kwargs.setdefault("seed", seed)
    model = cls(**kwargs)
    return model


def _fit_eval(kind, params, seed, data):
    X_train, y_train, X_val, y_val, X_test, y_test = data
    model = _make_model(kind, params, seed)
    model.fit(X_train, y_train, X_val=X_val, y_val=y_val)
    val_err = error_rate(model.predict(X_val), y_val)
    test_err = error_rate(model.predict(X_test), y_test)
    return model, val_err, test_err


def _grid_search(kind, base_params, grid, seed, data):
    """Pick the grid point with the lowest validation error; ties prefer
    the smaller model, then canonical JSON order of the combo."""
    names = sorted(grid)
    best = None
    for values in itertools.product(*(grid[name] for name in names)):
        combo = dict(zip(names, values))
        params = {**base_params, **combo}
        _, val_err, _ = _fit_eval(kind, params, seed, data)
        key = (val_err, _complexity(params), _canonical(combo))
        if best is None or key < best[0]:
            best = (key, params)
    return best[1]


def _prepare_table(cfg, threads=None):
    if cfg["features"]:
        with _stage("load-features"):
            return read_features_csv(cfg["features"])
    if not cfg["dataset"]:
        raise ExperimentError("config needs either 'dataset' or 'features'")
    with _stage("load"):
        docs = load_dataset(cfg["dataset"], fmt=cfg["format"])
    with _stage("preprocess"):
        clean = preprocess_corpus(docs, threads=threads)
    with _stage("extract"):
        extractor = LexiconFeatureExtractor(
            lexicon_dir=cfg["lexicons"], use_raw_text=cfg["raw_text"]
        ).fit()
        X = extractor.transform(docs if cfg["raw_text"] else clean)
    return FeatureTable(ids=[d.id for d in docs], X=X,
                        labels=[d.label for d in docs])


def run_experiment(config, threads=None):
    """Full protocol: load, preprocess, extract, split, normalize, then
    ``runs`` seeded train/test rounds (optional grid search per run).

    Returns (RunReport, trained models one per run, fitted normalizer)."""
    unknown = set(config) - set(DEFAULT_CONFIG)
    if unknown:
        raise ExperimentError(f"unknown config keys: {sorted(unknown)}")
    cfg = {**DEFAULT_CONFIG, **config}
    kind = MODEL_ALIASES.get(cfg["model"], cfg["model"])
    if kind not in MODEL_CLASSES:
        raise ExperimentError(f"unknown model {cfg['model']!r}")

    table = _prepare_table(cfg, threads=threads)
    with _stage("split"):
        given = load_split_file(cfg["split_file"]) if cfg["split_file"] else None
        split = split_dataset(table.ids, seed=cfg["split_seed"], given_split=given)
        parts = {k: table.subset(getattr(split, k))
                 for k in ("train", "validation", "test")}
    with _stage("normalize"):
        norm = FeatureNormalizer().fit(parts["train"].X)
        data = (
            norm.transform(parts["train"].X), parts["train"].y(),
            norm.transform(parts["validation"].X), parts["validation"].y(),
            norm.transform(parts["test"].X), parts["test"].y(),
        )

    seeds = [cfg["base_seed"] + i for i in range(cfg["runs"])]
    errors = []
    chosen_params = []
    models = []
    for i, seed in enumerate(seeds):
        with _stage(f"run[{i}]"):
            params = dict(cfg["params"])
            if cfg["grid"]:
                params = _grid_search(kind, params, cfg["grid"], seed, data)
            model, _, test_err = _fit_eval(kind, params, seed, data)
            errors.append(test_err)
            chosen_params.append(params)
            models.append(model)
    mean, best, sd = summarize_errors(errors)
    report = RunReport(
        model=cfg["model"],
        errors=tuple(errors),
        seeds=tuple(seeds),
        mean=mean,
        best=best,
        sd=sd,
        provenance={
            "config": cfg,
            "config_sha256": config_hash(cfg),
            "seeds": seeds,
            "split_sizes": [len(split.train), len(split.validation), len(split.test)],
            "chosen_params": chosen_params,
        },
    )
    report.provenance["best_run_index"] = int(np.argmin(errors))
    return report, models, norm


def _rows_for(item):
    if hasattr(item, "plain") and hasattr(item, "fused"):
        improvement = item.improvement_pct
        return [
            (item.plain, None),
            (item.fused, improvement),
        ]
    return [(item, None)]


def render_report(items) -> str:
    """Fixed-width table: Model | Mean | Best | SD [| Improvement].

    Mean/Best print with 2 decimals, SD with 3, Improvement with 1; the
    Improvement column appears only when a plain/fused comparison is
    present. Single-run reports are marked with an asterisk.
    """
    if not items:
        raise ValueError("nothing to render")
    rows = [row for item in items for row in _rows_for(item)]
    with_improvement = any(imp is not None for _, imp in rows)
    header = ["Model", "Mean", "Best", "SD"]
    if with_improvement:
        header.append("Improvement")
    body = []
    for report, improvement in rows:
        name = report.model + (" *single run*" if report.single_run else "")
        cells = [name, f"{report.mean:.2f}", f"{report.best:.2f}", f"{report.sd:.3f}"]
        if with_improvement:
            cells.append("" if improvement is None else f"{improvement:.1f}")
        body.append(cells)
    widths = [max(len(row[i]) for row in [header] + body) for i in range(len(header))]
    lines = [
        " | ".join(cell.ljust(width) for cell, width in zip(header, widths)).rstrip(),
        "-+-".join("-" * width for width in widths),
    ]
    for cells in body:
        lines.append(" | ".join(c.ljust(w) for c, w in zip(cells, widths)).rstrip())
    return "\n".join(lines) + "\n"


def render_report_csv(items) -> str:
    if not items:
        raise ValueError("nothing to render")
    rows = [row for item in items for row in _rows_for(item)]
    lines = ["model,mean,best,sd,improvement,runs,seeds"]
    for report, improvement in rows:
        imp = "" if improvement is None else f"{improvement:.4f}"
        seeds = ";".join(str(s) for s in report.seeds)
        lines.append(
            f"{report.model},{report.mean:.4f},{report.best:.4f},"
            f"{report.sd:.4f},{imp},{len(report.errors)},{seeds}"
        )
    return "\n".join(lines) + "\n"

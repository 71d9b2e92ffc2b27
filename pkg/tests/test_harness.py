import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from newslex.documents import CorpusError
from newslex.harness import (
    DatasetSplit,
    ExperimentError,
    RunReport,
    error_rate,
    load_dataset,
    render_report,
    render_report_csv,
    run_experiment,
    split_dataset,
    summarize_errors,
)


def _write_corpus(path, rows):
    lines = ["id\ttext\tlabel"] + [f"{i}\t{t}\t{l}" for i, t, l in rows]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


class TestLoadDataset:
    def test_three_rows(self, tmp_path):
        path = tmp_path / "c.tsv"
        _write_corpus(path, [("1", "a", "real"), ("2", "b", "fake"), ("3", "c", "REAL")])
        docs = load_dataset(path)
        assert [d.label for d in docs] == [False, True, False]

    def test_unknown_label_lists_row(self, tmp_path):
        path = tmp_path / "c.tsv"
        _write_corpus(path, [("1", "a", "real"), ("2", "b", "hoax")])
        with pytest.raises(CorpusError, match="row 3"):
            load_dataset(path)

    def test_duplicate_id(self, tmp_path):
        path = tmp_path / "c.tsv"
        _write_corpus(path, [("1", "a", "real"), ("1", "b", "fake")])
        with pytest.raises(CorpusError, match="duplicate"):
            load_dataset(path)

    def test_missing_column(self, tmp_path):
        path = tmp_path / "c.tsv"
        path.write_text("id\tbody\nx\ty\n", encoding="utf-8")
        with pytest.raises(CorpusError, match="missing columns"):
            load_dataset(path)

    def test_empty_file(self, tmp_path):
        path = tmp_path / "c.tsv"
        path.write_text("", encoding="utf-8")
        with pytest.raises(CorpusError, match="empty"):
            load_dataset(path)

    def test_unlabeled_rejected(self, tmp_path):
        path = tmp_path / "c.tsv"
        _write_corpus(path, [("1", "a", "")])
        with pytest.raises(CorpusError, match="unlabeled"):
            load_dataset(path)


class TestSplitDataset:
    def test_100_docs(self):
        split = split_dataset([str(i) for i in range(100)], seed=0)
        assert (len(split.train), len(split.validation), len(split.test)) == (60, 20, 20)

    def test_101_docs_remainder_to_train(self):
        split = split_dataset([str(i) for i in range(101)], seed=0)
        assert (len(split.train), len(split.validation), len(split.test)) == (61, 20, 20)

    def test_same_seed_identical(self):
        ids = [str(i) for i in range(57)]
        assert split_dataset(ids, seed=3) == split_dataset(ids, seed=3)

    def test_too_few(self):
        with pytest.raises(ValueError, match="at least 5"):
            split_dataset(["a", "b", "c", "d"], seed=0)

    @settings(max_examples=60, deadline=None)
    @given(n=st.integers(min_value=5, max_value=3000), seed=st.integers(0, 2**31))
    def test_disjoint_covering_property(self, n, seed):
        ids = [f"d{i}" for i in range(n)]
        split = split_dataset(ids, seed=seed)
        parts = [set(split.train), set(split.validation), set(split.test)]
        assert parts[0] | parts[1] | parts[2] == set(ids)
        assert len(split.train) + len(split.validation) + len(split.test) == n
        # every part within one document of the exact 60/20/20 proportion
        assert abs(len(split.train) - 0.6 * n) <= 1
        assert abs(len(split.validation) - 0.2 * n) <= 1
        assert abs(len(split.test) - 0.2 * n) <= 1

    def test_large_corpus(self):
        ids = [str(i) for i in range(100_000)]
        split = split_dataset(ids, seed=1)
        assert len(split.train) == 60_000
        assert len(set(split.train) & set(split.test)) == 0

    def test_predefined_split_honored(self):
        ids = ["a", "b", "c", "d", "e"]
        given_split = {"train": ["a", "b", "c"], "validation": ["d"], "test": ["e"]}
        split = split_dataset(ids, seed=9, given_split=given_split)
        assert split.train == ("a", "b", "c")
        assert split.seed is None

    def test_predefined_split_must_cover(self):
        with pytest.raises(ValueError, match="cover"):
            split_dataset(["a", "b"], given_split={"train": ["a"], "validation": [], "test": []})

    def test_overlapping_split_rejected(self):
        with pytest.raises(ValueError, match="overlap"):
            DatasetSplit(train=("a",), validation=("a",), test=("b",))


class TestReportArithmetic:
    def test_hand_computed_stats(self):
        mean, best, sd = summarize_errors([2.0, 1.9, 1.8, 1.7, 1.6])
        assert mean == pytest.approx(1.8)
        assert best == pytest.approx(1.6)
        assert sd == pytest.approx(0.158113883, abs=1e-4)

    def test_single_run_sd_zero_and_flagged(self):
        mean, best, sd = summarize_errors([3.0])
        assert (mean, best, sd) == (3.0, 3.0, 0.0)
        report = RunReport(model="dt", errors=(3.0,), seeds=(0,),
                           mean=3.0, best=3.0, sd=0.0)
        assert report.single_run

    def test_error_rate_matches_confusion_matrix(self):
        rng = np.random.default_rng(0)
        truth = rng.random(500) > 0.5
        pred = truth.copy()
        flip = rng.choice(500, size=60, replace=False)
        pred[flip] = ~pred[flip]
        tp = np.sum(pred & truth)
        tn = np.sum(~pred & ~truth)
        accuracy = (tp + tn) / len(truth)
        assert error_rate(pred, truth) == pytest.approx(100.0 * (1.0 - accuracy))

    def test_best_cannot_exceed_mean(self):
        with pytest.raises(ValueError):
            RunReport(model="x", errors=(1.0,), seeds=(0,), mean=1.0, best=2.0, sd=0.0)

    def test_empty_errors_refused(self):
        with pytest.raises(ValueError):
            summarize_errors([])


class _FakeComparison:
    def __init__(self, plain, fused):
        self.plain = plain
        self.fused = fused

    @property
    def improvement_pct(self):
        return (self.plain.mean - self.fused.mean) / self.plain.mean * 100.0


def _report(name, errors):
    mean, best, sd = summarize_errors(errors)
    return RunReport(model=name, errors=tuple(errors), seeds=tuple(range(len(errors))),
                     mean=mean, best=best, sd=sd)


class TestRenderReport:
    def test_single_report_no_improvement_column(self):
        text = render_report([_report("gbdt", [2.0, 1.8])])
        assert "Improvement" not in text
        assert "gbdt" in text and "1.90" in text and "1.80" in text

    def test_paired_reports_print_improvement(self):
        plain = _report("head (plain)", [2.11, 2.11])
        fused = _report("head (fused)", [1.81, 1.81])
        text = render_report([_FakeComparison(plain, fused)])
        assert "Improvement" in text
        assert "14.2" in text  # 14.218 rendered at one decimal

    def test_csv_rendering(self):
        csv_text = render_report_csv([_report("dt", [2.0, 1.0])])
        lines = csv_text.splitlines()
        assert lines[0].startswith("model,mean,best,sd")
        assert lines[1].startswith("dt,1.5000,1.0000,")

    def test_empty_refused(self):
        with pytest.raises(ValueError):
            render_report([])


class TestRunExperiment:
    def _corpus(self, tmp_path, n=60):
        rng = np.random.default_rng(0)
        rows = []
        for i in range(n):
            fake = i % 2 == 0
            words = ["never trust them ! awful lies !"] if fake else \
                    ["officials reported steady figures today ."]
            rows.append((f"d{i}", " ".join(words * (1 + int(rng.integers(0, 2)))),
                         "fake" if fake else "real"))
        path = tmp_path / "corpus.tsv"
        _write_corpus(path, rows)
        return path

    def test_full_run_and_provenance_replay(self, tmp_path):
        config = {
            "dataset": str(self._corpus(tmp_path)),
            "model": "dt",
            "params": {"max_depth": 3},
            "runs": 2,
        }
        report, models, norm = run_experiment(config)
        assert len(report.errors) == 2
        assert report.best <= report.mean
        replay, _, _ = run_experiment(report.provenance["config"])
        assert replay.errors == report.errors
        assert replay.provenance["config_sha256"] == report.provenance["config_sha256"]

    def test_grid_search_selects_on_validation(self, tmp_path):
        config = {
            "dataset": str(self._corpus(tmp_path)),
            "model": "dt",
            "grid": {"max_depth": [1, 3]},
            "runs": 1,
        }
        report, models, _ = run_experiment(config)
        chosen = report.provenance["chosen_params"][0]
        assert chosen["max_depth"] in (1, 3)
        # ties prefer the smaller model
        assert chosen["max_depth"] == 1 or report.errors[0] >= 0.0

    def test_unknown_model_rejected(self):
        with pytest.raises(ExperimentError, match="unknown model"):
            run_experiment({"model": "nope", "features": "x.csv"})

    def test_unknown_config_key_rejected(self):
        with pytest.raises(ExperimentError, match="unknown config keys"):
            run_experiment({"model": "dt", "dataset": "x", "typo_key": 1})

    def test_stage_identified_on_failure(self, tmp_path):
        config = {"dataset": str(tmp_path / "missing.tsv"), "model": "dt"}
        with pytest.raises(ExperimentError, match="stage 'load'"):
            run_experiment(config)

    def test_split_file_honored(self, tmp_path):
        corpus = self._corpus(tmp_path, n=10)
        ids = [f"d{i}" for i in range(10)]
        split_path = tmp_path / "split.json"
        split_path.write_text(json.dumps({
            "train": ids[:6], "validation": ids[6:8], "test": ids[8:],
        }))
        config = {
            "dataset": str(corpus), "model": "dt", "runs": 1,
            "split_file": str(split_path), "params": {"max_depth": 2},
        }
        report, _, _ = run_experiment(config)
        assert report.provenance["split_sizes"] == [6, 2, 2]

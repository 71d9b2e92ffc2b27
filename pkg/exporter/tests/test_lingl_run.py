"""Full two-stage run: export embeddings with a local checkpoint, then
drive the detection package's fusion comparison off the emitted file.
The report shape (mean/best/SD over 5 seeds plus improvement) is the
gate; the error values themselves are not."""

import csv

import pytest

from embed_exporter import ExporterConfig, export_embeddings

newslex_cli = pytest.importorskip("newslex.cli")


def _write_corpus(path, n=50):
    fake_texts = [
        "shocking secret cure covid !",
        "bad news the secret cure !",
        "covid cure shocking news !",
    ]
    real_texts = [
        "official report today",
        "city study report good today",
        "good official study news",
    ]
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, delimiter="\t", lineterminator="\n")
        writer.writerow(["id", "text", "label"])
        for i in range(n):
            fake = i % 2 == 0
            texts = fake_texts if fake else real_texts
            writer.writerow([f"n{i:03d}", texts[i % 3], "fake" if fake else "real"])


def test_full_fused_run_emits_report_shape(tiny_checkpoint, tmp_path, monkeypatch,
                                           capsys):
    corpus = tmp_path / "corpus.tsv"
    _write_corpus(corpus)

    embeddings = tmp_path / "emb.jsonl"
    config = ExporterConfig(checkpoint=tiny_checkpoint, batch_size=8, max_length=16)
    dim, count = export_embeddings(corpus, config, embeddings)
    assert count == 50

    monkeypatch.chdir(tmp_path)
    assert newslex_cli.main(["preprocess", "--input", str(corpus),
                             "--output", "clean.tsv"]) == 0
    assert newslex_cli.main(["extract", "--input", "clean.tsv",
                             "--output", "feats.csv"]) == 0
    assert newslex_cli.main([
        "fuse", "--features", "feats.csv", "--embeddings", str(embeddings),
        "--runs", "5", "--validate-every", "3", "--out", "lingl",
    ]) == 0

    stdout = capsys.readouterr().out
    assert "Improvement" in stdout
    report_lines = (tmp_path / "lingl.report.csv").read_text().splitlines()
    assert report_lines[0] == "model,mean,best,sd,improvement,runs,seeds"
    plain, fused = report_lines[1].split(","), report_lines[2].split(",")
    assert plain[5] == fused[5] == "5"  # five seeded runs each
    assert float(plain[2]) <= float(plain[1])  # best <= mean
    assert float(fused[2]) <= float(fused[1])
    assert fused[4] != ""  # improvement column filled on the fused row

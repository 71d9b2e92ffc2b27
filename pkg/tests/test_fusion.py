import numpy as np
import pytest

from conftest import (
    complementary_bayes_errors,
    complementary_corpus,
)
from newslex.documents import CleanDocument
from newslex.features import N_FEATURES, FeatureTable
from newslex.fusion import (
    EmbeddingFormatError,
    EmbeddingManifest,
    EmbeddingRecord,
    compare_fusion,
    encode_corpus,
    fuse,
    load_embeddings,
    relative_improvement,
    toy_encoder,
    train_fusion_head,
    write_embeddings,
)
from newslex.harness import split_dataset
from newslex.normalize import FeatureNormalizer


def _write_lines(path, lines):
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


class TestLoadEmbeddings:
    MANIFEST = '{"model": "m", "dim": 4, "pooling": "mean"}'

    def test_valid_file(self, tmp_path):
        path = tmp_path / "e.jsonl"
        _write_lines(path, [
            self.MANIFEST,
            '{"id": "a", "vec": [1.0, 0.0, 0.0, 0.0]}',
            '{"id": "b", "vec": [0.0, 1.0, 0.0, 0.0]}',
        ])
        manifest, records = load_embeddings(path)
        assert manifest.dim == 4 and manifest.pooling == "mean"
        assert set(records) == {"a", "b"}

    def test_dim_mismatch_names_id(self, tmp_path):
        path = tmp_path / "e.jsonl"
        _write_lines(path, [self.MANIFEST, '{"id": "bad", "vec": [1.0, 2.0, 3.0]}'])
        with pytest.raises(EmbeddingFormatError, match="bad"):
            load_embeddings(path)

    def test_duplicate_id_rejected(self, tmp_path):
        path = tmp_path / "e.jsonl"
        rec = '{"id": "a", "vec": [0.0, 0.0, 0.0, 0.0]}'
        _write_lines(path, [self.MANIFEST, rec, rec])
        with pytest.raises(EmbeddingFormatError, match="duplicate"):
            load_embeddings(path)

    def test_malformed_line_reports_number(self, tmp_path):
        path = tmp_path / "e.jsonl"
        _write_lines(path, [self.MANIFEST, "not json"])
        with pytest.raises(EmbeddingFormatError, match=":2"):
            load_embeddings(path)

    def test_bad_manifest(self, tmp_path):
        path = tmp_path / "e.jsonl"
        _write_lines(path, ['{"dim": 4}'])
        with pytest.raises(EmbeddingFormatError, match=":1"):
            load_embeddings(path)
        with pytest.raises(EmbeddingFormatError):
            EmbeddingManifest(model="m", dim=0, pooling="mean")
        with pytest.raises(EmbeddingFormatError):
            EmbeddingManifest(model="m", dim=4, pooling="max")

    def test_write_read_roundtrip(self, tmp_path):
        manifest = EmbeddingManifest(model="toy", dim=8, pooling="cls")
        records = [EmbeddingRecord(id="x", vec=np.arange(8, dtype=np.float64))]
        path = tmp_path / "out.jsonl"
        write_embeddings(manifest, records, path)
        back_manifest, back = load_embeddings(path)
        assert back_manifest == manifest
        assert np.array_equal(back["x"].vec, records[0].vec)


class TestToyEncoder:
    def test_deterministic(self):
        doc = CleanDocument(id="d", text="the same text twice")
        a = toy_encoder(doc, dim=32)
        b = toy_encoder(doc, dim=32)
        assert np.array_equal(a.vec, b.vec)

    def test_empty_text_zero_vector(self):
        rec = toy_encoder(CleanDocument(id="d", text=""), dim=16)
        assert np.all(rec.vec == 0.0)

    def test_unit_norm(self):
        rec = toy_encoder(CleanDocument(id="d", text="some words here"), dim=32)
        assert np.linalg.norm(rec.vec) == pytest.approx(1.0)

    def test_disjoint_vocab_less_similar_than_identical(self):
        a = toy_encoder(CleanDocument(id="a", text="alpha beta gamma"), dim=64)
        b = toy_encoder(CleanDocument(id="b", text="delta epsilon zeta"), dim=64)
        same = toy_encoder(CleanDocument(id="c", text="alpha beta gamma"), dim=64)
        assert float(a.vec @ same.vec) == pytest.approx(1.0)
        assert float(a.vec @ b.vec) < 1.0

    def test_min_dim(self):
        with pytest.raises(ValueError):
            toy_encoder(CleanDocument(id="d", text="x"), dim=4)


class TestFuse:
    def test_layout(self):
        emb = EmbeddingRecord(id="a", vec=np.arange(10, dtype=np.float64))
        features = np.arange(100, 100 + N_FEATURES, dtype=np.float64)
        fused = fuse(emb, features, label=True, features_id="a")
        assert len(fused.fused) == 10 + N_FEATURES
        assert np.array_equal(fused.fused[:10], emb.vec)
        assert np.array_equal(fused.fused[10:], features)
        assert fused.label is True

    def test_zero_inputs(self):
        fused = fuse(EmbeddingRecord(id="a", vec=np.zeros(8)), np.zeros(N_FEATURES))
        assert np.all(fused.fused == 0.0) and len(fused.fused) == 8 + N_FEATURES

    def test_id_mismatch(self):
        emb = EmbeddingRecord(id="a", vec=np.zeros(8))
        with pytest.raises(ValueError, match="mismatch"):
            fuse(emb, np.zeros(N_FEATURES), features_id="b")

    def test_wrong_feature_width(self):
        emb = EmbeddingRecord(id="a", vec=np.zeros(8))
        with pytest.raises(ValueError, match="features"):
            fuse(emb, np.zeros(5))


class TestFusionHead:
    def test_linearly_separable_fused_slot(self):
        # label = sign of the first fused coordinate, kept off the
        # boundary by a small margin; a linear probe separates this
        # exactly, so the head must get down to a couple of errors
        rng = np.random.default_rng(70)
        n = 1200
        X = rng.normal(size=(n, 24))
        X[:, 0] += np.where(X[:, 0] >= 0, 0.1, -0.1)
        y = X[:, 0] > 0.0
        # separability certificate: the hyperplane x0 = 0 classifies every
        # sample correctly with margin >= 0.1
        assert np.all(np.abs(X[:, 0]) >= 0.1)
        assert np.array_equal(X[:, 0] > 0, y)
        head = train_fusion_head(
            X[:800], y[:800], X[800:1000], y[800:1000],
            seed=0, validate_every=10,
        )
        err = float(np.mean(head.predict(X[1000:]) != y[1000:]))
        assert err <= 0.02

    def test_same_seed_identical(self):
        rng = np.random.default_rng(71)
        X = rng.normal(size=(300, 16))
        y = rng.random(300) > 0.5
        kwargs = dict(hidden=(16,), max_epochs=3)
        a = train_fusion_head(X[:200], y[:200], X[200:], y[200:], seed=4, **kwargs)
        b = train_fusion_head(X[:200], y[:200], X[200:], y[200:], seed=4, **kwargs)
        for wa, wb in zip(a.weights_, b.weights_):
            assert np.array_equal(wa, wb)

    def test_empty_split_rejected(self):
        with pytest.raises(ValueError, match="empty"):
            train_fusion_head(np.empty((0, 4)), np.empty(0), np.zeros((2, 4)),
                              np.array([True, False]))


def _fusion_setup(n=1600, seed=80, zero_features=False):
    ids, texts, X, y = complementary_corpus(n, seed=seed)
    docs = [CleanDocument(id=i, text=t) for i, t in zip(ids, texts)]
    _, recs = encode_corpus(docs, dim=64)
    records = {r.id: r for r in recs}
    split = split_dataset(ids, seed=0)
    index = {doc_id: k for k, doc_id in enumerate(ids)}
    train_rows = [index[i] for i in split.train]
    norm = FeatureNormalizer().fit(X[train_rows])
    Xn = np.zeros_like(X) if zero_features else norm.transform(X)
    table = FeatureTable(ids=ids, X=Xn, labels=[bool(v) for v in y])
    return records, table, split


class TestCompareFusion:
    def test_improvement_formula(self):
        assert relative_improvement(2.11, 1.81) == pytest.approx(14.218, abs=1e-3)
        assert relative_improvement(2.0, 2.0) == 0.0

    def test_complementary_signal_fused_wins(self):
        text_bayes, combined_bayes = complementary_bayes_errors()
        assert combined_bayes < text_bayes  # generator sanity via oracle
        records, table, split = _fusion_setup()
        comparison = compare_fusion(
            records, table, split, runs=5, base_seed=0,
            validate_every=50, max_epochs=6,
        )
        assert comparison.fused.mean < comparison.plain.mean
        assert comparison.plain.mean < 50.0
        assert comparison.fused.mean < 50.0
        assert comparison.improvement_pct >= 5.0

    def test_null_fusion_robustness(self):
        records, table, split = _fusion_setup(zero_features=True)
        comparison = compare_fusion(
            records, table, split, runs=3, base_seed=0,
            validate_every=50, max_epochs=6,
        )
        assert abs(comparison.fused.mean - comparison.plain.mean) < 2.0

    def test_runs_minimum(self):
        records, table, split = _fusion_setup(n=50)
        with pytest.raises(ValueError, match="2 runs"):
            compare_fusion(records, table, split, runs=1)

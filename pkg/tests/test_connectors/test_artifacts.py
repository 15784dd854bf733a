import json
import os

import numpy as np
import pytest

from frugal.connectors import artifacts
from frugal.errors import DatasetError
from frugal.models import Cue, Direction, ExitPolicy, FrugalTree, Goal, LdaConfig, RunRecord
from frugal.services.features import lda_fit, tfidf
from frugal.services.svm import svm_fit


def test_write_text_leaves_only_target(tmp_path):
    target = artifacts.write_text(tmp_path / "nested" / "out.txt", "hello\n")
    assert target.read_text() == "hello\n"
    assert os.listdir(tmp_path / "nested") == ["out.txt"]


def test_failed_write_keeps_previous_file(tmp_path, monkeypatch):
    """An interrupted write must not clobber the existing artifact or leave temp files."""
    target = artifacts.write_text(tmp_path / "out.txt", "old")

    def broken_replace(src, dst):
        raise OSError("disk full")

    monkeypatch.setattr(artifacts.os, "replace", broken_replace)
    with pytest.raises(OSError):
        artifacts.write_text(target, "new")

    assert target.read_text() == "old"
    assert os.listdir(tmp_path) == ["out.txt"]


def test_tree_with_pass_through_cue(tmp_path):
    tree = FrugalTree(
        policy=ExitPolicy.from_string("01"),
        cues=[Cue(feature=2, direction=Direction.LE, threshold=0.25),
              Cue(feature=0, direction=Direction.GT, threshold=float("inf"))],
        goal=Goal.PRECISION,
        training_score=0.75,
        n_features=3,
    )
    path = artifacts.save_tree(tmp_path / "tree.json", tree)
    assert "Infinity" in path.read_text()
    assert artifacts.load_tree(path) == tree


def test_svm_file_layout(tmp_path):
    rng = np.random.default_rng(0)
    X = rng.random((20, 3))
    model = svm_fit(X, X[:, 0] > 0.5, lam=0.01, epochs=3, seed=2)
    path = artifacts.save_svm(tmp_path / "svm.json", model)
    assert set(json.loads(path.read_text())) == {"weights", "bias", "lambda", "epochs", "seed"}

    loaded = artifacts.load_svm(path)
    np.testing.assert_allclose(loaded.weights, model.weights)
    assert (loaded.bias, loaded.lam, loaded.epochs, loaded.seed) == (model.bias, 0.01, 3, 2)


def test_topic_model_file(tmp_path, theme_corpus):
    model = lda_fit(theme_corpus, LdaConfig(k=2, alpha=0.1, iterations=5, seed=1))
    loaded = artifacts.load_topic_model(artifacts.save_topic_model(tmp_path / "lda.json", model))
    np.testing.assert_array_equal(loaded.topic_word_counts, model.topic_word_counts)
    np.testing.assert_allclose(loaded.doc_topic, model.doc_topic)
    assert loaded.vocabulary.terms == model.vocabulary.terms
    assert loaded.config == model.config


def test_results_csv(tmp_path):
    records = [
        RunRecord(dataset="d", method="tfidf_svm", repeat=0, fold=1, metric=Goal.RECALL, value=0.5, runtime_ms=3.0),
        RunRecord(dataset="d", method="fft_k10", repeat=0, fold=0, metric=Goal.PRECISION, value=1.0, runtime_ms=2.0),
    ]
    path = artifacts.save_results(tmp_path / "results.csv", records)
    assert path.read_text().splitlines()[0] == "dataset,method,repeat,fold,metric,value,runtime_ms"
    assert artifacts.load_results(path) == sorted(records, key=lambda r: r.sort_key())


def test_features_header(theme_corpus):
    frame = artifacts.features_frame(tfidf(theme_corpus))
    assert list(frame.columns[:3]) == ["doc_id", "f0", "f1"]
    assert list(frame["doc_id"]) == theme_corpus.doc_ids()


def test_corrupt_artifact(tmp_path):
    path = tmp_path / "tree.json"
    path.write_text("{not json")
    with pytest.raises(DatasetError, match="corrupt"):
        artifacts.load_tree(path)

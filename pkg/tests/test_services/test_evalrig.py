import pytest

from frugal.errors import ConfigError
from frugal.models import FoldPlan, Goal, RawDocument, RunRecord
from frugal.services import evalrig
from frugal.services.corpus import build_corpus
from frugal.services.evalrig import method_runtimes, parse_method, run_cell, run_matrix, stratified_folds


@pytest.mark.parametrize("name,features,classifier,k", [
    ("tfidf_svm", "tfidf", "svm", None),
    ("fft_k10", "lda", "fft", 10),
    ("svm_k25", "lda", "svm", 25),
    ("ldade_svm", "ldade", "svm", None),
    ("ldade_fft", "ldade", "fft", None),
])
def test_parse_method(name, features, classifier, k):
    spec = parse_method(name)
    assert (spec.features, spec.classifier, spec.k) == (features, classifier, k)


@pytest.mark.parametrize("name", ["fft", "fft_k0", "tfidf_fft", "knn_k5", ""])
def test_parse_method_rejects_unknown(name):
    with pytest.raises(ConfigError):
        parse_method(name)


def _without_runtime(records):
    return [r.model_dump(exclude={"runtime_ms"}) for r in records]


def test_record_count_and_order(synthetic_corpus, fast_config):
    plan = stratified_folds(synthetic_corpus.labels(), fast_config.repeats, fast_config.bins, fast_config.seed)
    records = run_matrix(synthetic_corpus, ["tfidf_svm", "fft_k3"], plan, None, fast_config)
    # two methods x 1 repeat x 3 folds x 2 metrics
    assert len(records) == 12
    assert records == sorted(records, key=lambda r: r.sort_key())
    assert {r.dataset for r in records} == {"synthetic"}
    assert all(0.0 <= r.value <= 1.0 for r in records)
    assert all(r.runtime_ms >= 0.0 for r in records)


def test_same_seed_same_values(synthetic_corpus, fast_config):
    """Everything except wall-clock time is reproducible."""
    plan = stratified_folds(synthetic_corpus.labels(), 1, 3, fast_config.seed)
    first = run_matrix(synthetic_corpus, ["fft_k3"], plan, Goal.RECALL, fast_config)
    second = run_matrix(synthetic_corpus, ["fft_k3"], plan, Goal.RECALL, fast_config)
    assert _without_runtime(first) == _without_runtime(second)


def test_training_never_sees_test_documents(synthetic_corpus, fast_config, monkeypatch):
    """Every fit (LDA or TF-IDF) only receives documents outside the held-out bin."""
    plan = stratified_folds(synthetic_corpus.labels(), 1, 3, fast_config.seed)
    seen = []

    real_lda_fit, real_tfidf = evalrig.lda_fit, evalrig.tfidf

    def spy_lda_fit(corpus, cfg, *args, **kwargs):
        seen.append(set(corpus.doc_ids()))
        return real_lda_fit(corpus, cfg, *args, **kwargs)

    def spy_tfidf(corpus):
        seen.append(set(corpus.doc_ids()))
        return real_tfidf(corpus)

    monkeypatch.setattr(evalrig, "lda_fit", spy_lda_fit)
    monkeypatch.setattr(evalrig, "tfidf", spy_tfidf)

    ids = synthetic_corpus.doc_ids()
    for method in ("tfidf_svm", "fft_k3"):
        for fold in range(3):
            seen.clear()
            run_cell(synthetic_corpus, parse_method(method), plan, 0, fold, Goal.RECALL, fast_config, "synthetic")
            held_out = {ids[i] for i in plan.test_indices(0, fold)}
            assert seen
            for fitted in seen:
                assert not fitted & held_out


def test_ldade_tunes_without_test_bin(synthetic_corpus, fast_config, monkeypatch):
    """LDADE fits on bins other than the test and validation bins."""
    plan = stratified_folds(synthetic_corpus.labels(), 1, 3, fast_config.seed)
    seen = []
    real_optimize = evalrig.DifferentialEvolution.optimize

    def spy_optimize(self, corpus=None, fitness=None):
        seen.append(set(corpus.doc_ids()))
        return real_optimize(self, corpus, fitness)

    monkeypatch.setattr(evalrig.DifferentialEvolution, "optimize", spy_optimize)
    records = run_cell(synthetic_corpus, parse_method("ldade_fft"), plan, 0, 0, Goal.PRECISION, fast_config, "s")

    ids = synthetic_corpus.doc_ids()
    excluded = {ids[i] for i in plan.test_indices(0, 0)} | {ids[i] for i in plan.test_indices(0, 1)}
    assert len(seen) == 1
    assert not seen[0] & excluded
    assert [r.metric for r in records] == [Goal.PRECISION, Goal.RECALL]


def test_single_class_training_fold_skipped(synthetic_corpus, fast_config):
    """A training fold with one class yields no records instead of failing."""
    labels = synthetic_corpus.labels()
    plan = FoldPlan(repeats=1, bins=2, seed=0, assignments=[[0 if y else 1 for y in labels]])
    assert run_cell(synthetic_corpus, parse_method("tfidf_svm"), plan, 0, 0, None, fast_config, "s") == []


def test_plan_for_other_corpus_rejected(synthetic_corpus, tiny_corpus, fast_config):
    plan = stratified_folds(synthetic_corpus.labels(), 1, 3, 1)
    with pytest.raises(ConfigError):
        run_matrix(tiny_corpus, ["tfidf_svm"], plan, None, fast_config)


def test_method_runtimes_count_each_cell_once():
    records = [
        RunRecord(dataset="d", method="m", repeat=0, fold=f, metric=metric, value=0.5, runtime_ms=100.0 * (f + 1))
        for f in range(2)
        for metric in (Goal.PRECISION, Goal.RECALL)
    ]
    assert method_runtimes(records) == {("d", "m"): 300.0}


@pytest.mark.parametrize("method", ["tfidf_svm", "fft_k2"])
def test_training_fold_without_terms_skipped(fast_config, method):
    """Every training document is stop words only: the cell is skipped, not fatal."""
    raw = [RawDocument(id="0", text="packet crash overflow", severity="1")] + [
        RawDocument(id=str(i), text="the and of", severity="1" if i % 2 else "2") for i in range(1, 7)
    ]
    corpus = build_corpus(raw, name="stopwords")
    plan = FoldPlan(repeats=1, bins=2, seed=0, assignments=[[0, 1, 1, 1, 1, 1, 1]])
    assert run_cell(corpus, parse_method(method), plan, 0, 0, None, fast_config, "s") == []

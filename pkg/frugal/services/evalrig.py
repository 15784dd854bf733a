import logging
import re
import time
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict

from frugal.config import ExperimentConfig
from frugal.errors import ConfigError, DegenerateDataError
from frugal.models import (
    Candidate, ConfusionMatrix, Corpus, DEConfig, Document, FitnessMode, FoldPlan, Goal, LdaConfig, RunRecord,
    Vocabulary,
)
from frugal.services import fft, svm
from frugal.services.corpus import encode, restrict
from frugal.services.features import lda_fit, lda_transform_many, tfidf, tfidf_transform
from frugal.services.tuner import DifferentialEvolution

logger = logging.getLogger(__name__)


class MethodSpec(BaseModel):
    """
    features: tfidf | lda | ldade; classifier: svm | fft.
    """
    name: str
    features: str
    classifier: str
    k: Optional[int] = None


_FIXED_METHODS = {
    "tfidf_svm": ("tfidf", "svm"),
    "ldade_svm": ("ldade", "svm"),
    "ldade_fft": ("ldade", "fft"),
}
_LDA_METHOD = re.compile(r"^(fft|svm)_k(\d+)$")


def parse_method(name: str) -> MethodSpec:
    if name in _FIXED_METHODS:
        features, classifier = _FIXED_METHODS[name]
        return MethodSpec(name=name, features=features, classifier=classifier)
    m = _LDA_METHOD.match(name)
    if m and int(m.group(2)) >= 1:
        return MethodSpec(name=name, features="lda", classifier=m.group(1), k=int(m.group(2)))
    raise ConfigError(f"unknown method: {name}")


# --- folds and metrics ---

def stratified_folds(labels: Sequence[bool], repeats: int = 5, bins: int = 5, seed: int = 1) -> FoldPlan:
    """
    Per repeat: shuffle each class, then deal its members round-robin into the
    bins. The second class continues where the first stopped, so bin sizes
    differ by at most one.
    """
    labels = np.asarray(labels, dtype=bool)
    if bins < 2:
        raise ConfigError(f"need at least 2 bins, got {bins}")
    classes = [np.flatnonzero(labels), np.flatnonzero(~labels)]
    if min(len(c) for c in classes) < bins:
        raise DegenerateDataError(
            f"cannot stratify: {len(classes[0])} positive / {len(classes[1])} negative documents into {bins} bins"
        )

    rng = np.random.default_rng(seed)
    assignments = []
    for _ in range(repeats):
        row = np.empty(len(labels), dtype=np.int64)
        offset = 0
        for members in classes:
            shuffled = rng.permutation(members)
            row[shuffled] = (np.arange(len(shuffled)) + offset) % bins
            offset = (offset + len(shuffled)) % bins
        assignments.append(row.tolist())
    return FoldPlan(repeats=repeats, bins=bins, seed=seed, assignments=assignments)


def metrics(cm: ConfusionMatrix) -> Dict[str, float]:
    """Recall = TP/(TP+FN), precision = TP/(TP+FP); an empty denominator scores 0."""
    recall_denom = cm.tp + cm.fn
    precision_denom = cm.tp + cm.fp
    return {
        "precision": cm.tp / precision_denom if precision_denom else 0.0,
        "recall": cm.tp / recall_denom if recall_denom else 0.0,
    }


# --- one (method, repeat, fold) cell ---

def _cell_seed(seed: int, repeat: int, fold: int) -> int:
    return int(np.random.SeedSequence([seed, repeat, fold]).generate_state(1)[0])


def _is_degenerate(y: np.ndarray) -> bool:
    return len(y) == 0 or bool(y.all()) or not bool(y.any())


class _Split(BaseModel):
    X_train: np.ndarray
    y_train: np.ndarray
    X_test: np.ndarray

    model_config = ConfigDict(arbitrary_types_allowed=True)


def _lda_split(train: Corpus, test: Sequence[Document], corpus_vocab: Vocabulary, cfg: ExperimentConfig,
               lda_cfg: LdaConfig, seed: int) -> _Split:
    model = lda_fit(train, lda_cfg)
    test_docs = [encode(d, corpus_vocab, train.vocabulary) for d in test]
    X_test = lda_transform_many(model, test_docs, cfg.fold_in_iterations, seed=seed).values
    return _Split(X_train=model.doc_topic, y_train=train.labels(), X_test=X_test)


def _tfidf_split(train: Corpus, test: Sequence[Document], corpus_vocab: Vocabulary) -> _Split:
    test_docs = [encode(d, corpus_vocab, train.vocabulary) for d in test]
    return _Split(
        X_train=tfidf(train).values,
        y_train=train.labels(),
        X_test=tfidf_transform(train.vocabulary, test_docs).values,
    )


def _classify(split: _Split, classifier: str, goals: List[Goal], cfg: ExperimentConfig,
              seed: int) -> Dict[Goal, np.ndarray]:
    """Predictions on the test rows, keyed by the metric they will be scored on."""
    if classifier == "svm":
        model = svm.svm_fit(split.X_train, split.y_train, cfg.svm_lambda, cfg.svm_epochs, seed)
        predicted = svm.svm_predict_many(model, split.X_test)
        return {g: predicted for g in goals}

    out = {}
    for g in goals:
        tree = fft.train_best(split.X_train, split.y_train, cfg.fft_depth, g)
        out[g] = fft.predict_many(tree, split.X_test)
    return out


def _tune(corpus: Corpus, tune: Corpus, validation: Sequence[Document], classifier: str, goal: Goal,
          cfg: ExperimentConfig, seed: int) -> Candidate:
    de_cfg: DEConfig = cfg.de_config(seed=seed)
    tuner = DifferentialEvolution(de_cfg)
    hook = None
    if de_cfg.fitness == FitnessMode.CLASSIFICATION:
        def hook(cand: Candidate) -> float:
            lda_cfg = LdaConfig(k=cand.k, alpha=cand.alpha, beta=cand.beta,
                                iterations=de_cfg.lda_iterations, seed=seed)
            split = _lda_split(tune, validation, corpus.vocabulary, cfg, lda_cfg, seed)
            predicted = _classify(split, classifier, [goal], cfg, seed)[goal]
            actual = np.array([d.label for d in validation], dtype=bool)
            return metrics(ConfusionMatrix.from_predictions(actual, predicted))[goal.value]

    best = tuner.optimize(tune, hook)
    logger.info(f"LDADE picked K={best.k} alpha={best.alpha:.3f} beta={best.beta:.3f} "
                f"(fitness {best.fitness:.3f}, {tuner.fit_count} stability fits)")
    return best


def run_cell(corpus: Corpus, spec: MethodSpec, plan: FoldPlan, repeat: int, fold: int,
             goal: Optional[Goal], cfg: ExperimentConfig, dataset: str) -> List[RunRecord]:
    """
    Fits on the training bins only and scores the held-out bin. Returns one
    record per metric, or nothing when the training data is single-class or
    has no terms.
    """
    started = time.perf_counter()
    seed = _cell_seed(cfg.seed, repeat, fold)
    goals = [goal] if goal else [Goal.PRECISION, Goal.RECALL]

    test = [corpus.documents[i] for i in plan.test_indices(repeat, fold)]
    if spec.features == "ldade":
        validation_bin = (fold + 1) % plan.bins
        fit_bins = [b for b in range(plan.bins) if b not in (fold, validation_bin)]
        train = restrict(corpus, plan.bin_indices(repeat, fit_bins))
    else:
        train = restrict(corpus, plan.train_indices(repeat, fold))

    if _is_degenerate(train.labels()):
        logger.warning(f"[{dataset}] {spec.name} r{repeat} f{fold}: degenerate training fold, skipped")
        return []
    if train.total_tokens == 0:
        logger.warning(f"[{dataset}] {spec.name} r{repeat} f{fold}: training fold has no terms, skipped")
        return []

    if spec.features == "tfidf":
        split = _tfidf_split(train, test, corpus.vocabulary)
    elif spec.features == "lda":
        lda_cfg = LdaConfig.with_defaults(spec.k, cfg.lda_alpha, cfg.lda_beta, cfg.lda_iterations, seed)
        split = _lda_split(train, test, corpus.vocabulary, cfg, lda_cfg, seed)
    else:
        validation = [corpus.documents[i] for i in plan.test_indices(repeat, validation_bin)]
        best = _tune(corpus, train, validation, spec.classifier, goals[-1], cfg, seed)
        lda_cfg = LdaConfig(k=best.k, alpha=best.alpha, beta=best.beta, iterations=cfg.lda_iterations, seed=seed)
        split = _lda_split(train, test, corpus.vocabulary, cfg, lda_cfg, seed)

    predictions = _classify(split, spec.classifier, goals, cfg, seed)
    runtime_ms = (time.perf_counter() - started) * 1000.0

    actual = np.array([d.label for d in test], dtype=bool)
    records = []
    for metric in (Goal.PRECISION, Goal.RECALL):
        predicted = predictions[metric] if metric in predictions else predictions[goals[0]]
        value = metrics(ConfusionMatrix.from_predictions(actual, predicted))[metric.value]
        records.append(RunRecord(dataset=dataset, method=spec.name, repeat=repeat, fold=fold,
                                 metric=metric, value=value, runtime_ms=runtime_ms))
    return records


def run_matrix(corpus: Corpus, methods: Sequence[str], fold_plan: FoldPlan, goal: Optional[Goal],
               config: ExperimentConfig, dataset: Optional[str] = None) -> List[RunRecord]:
    """
    Every method on every (repeat, fold) cell of the plan. Records come back
    sorted by (dataset, method, repeat, fold, metric).
    """
    if len(fold_plan.assignments) and len(fold_plan.assignments[0]) != corpus.n_docs:
        raise ConfigError("fold plan was built for a different corpus")
    dataset = dataset or corpus.name
    specs = [parse_method(m) for m in methods]

    records: List[RunRecord] = []
    for spec in specs:
        logger.info(f"[{dataset}] running {spec.name} over {fold_plan.repeats}x{fold_plan.bins} folds")
        for repeat in range(fold_plan.repeats):
            for fold in range(fold_plan.bins):
                records.extend(run_cell(corpus, spec, fold_plan, repeat, fold, goal, config, dataset))
    return sorted(records, key=lambda r: r.sort_key())


def method_runtimes(records: Sequence[RunRecord]) -> Dict[Tuple[str, str], float]:
    """Total wall-clock ms per (dataset, method); both metric records of a cell share one timing."""
    cells: Dict[Tuple[str, str, int, int], float] = {}
    for r in records:
        cells[(r.dataset, r.method, r.repeat, r.fold)] = r.runtime_ms
    totals: Dict[Tuple[str, str], float] = {}
    for (dataset, method, _, _), ms in cells.items():
        totals[(dataset, method)] = totals.get((dataset, method), 0.0) + ms
    return totals

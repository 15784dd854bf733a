import logging
from typing import Callable, List, Optional, Sequence

import numpy as np

from frugal.errors import ConfigError, DatasetError
from frugal.models import (
    Corpus, Document, FeatureKind, FeatureMatrix, LdaConfig, TopicModel, Vocabulary,
)

logger = logging.getLogger(__name__)

SweepCallback = Callable[[int, np.ndarray, np.ndarray], None]


# --- TFIDF ---

def _term_counts(documents: Sequence[Document], n_terms: int) -> np.ndarray:
    counts = np.zeros((len(documents), n_terms), dtype=np.float64)
    for i, doc in enumerate(documents):
        ids = [t for t in doc.token_ids if 0 <= t < n_terms]
        if ids:
            np.add.at(counts[i], ids, 1.0)
    return counts


def tfidf_transform(vocabulary: Vocabulary, documents: Sequence[Document]) -> FeatureMatrix:
    """
    (w / W) * ln(D / d): w = count of the term in the document, W = the
    document's token count, D and d come from `vocabulary` (the fitting corpus).
    Documents must already be encoded in `vocabulary`.
    """
    n_terms = vocabulary.size
    if n_terms < 1:
        raise DatasetError("TFIDF needs a non-empty vocabulary")

    counts = _term_counts(documents, n_terms)
    lengths = counts.sum(axis=1, keepdims=True)
    tf = np.divide(counts, lengths, out=np.zeros_like(counts), where=lengths > 0)
    idf = np.log(vocabulary.total_docs / np.asarray(vocabulary.doc_freq, dtype=np.float64))
    return FeatureMatrix(
        kind=FeatureKind.TFIDF,
        doc_ids=[d.id for d in documents],
        values=tf * idf,
        feature_names=list(vocabulary.terms),
    )


def tfidf(corpus: Corpus) -> FeatureMatrix:
    return tfidf_transform(corpus.vocabulary, corpus.documents)


# --- LDA (collapsed Gibbs) ---

def check_lda_config(cfg: LdaConfig) -> None:
    if cfg.k < 1:
        raise ConfigError(f"LDA needs K >= 1, got {cfg.k}")
    if cfg.alpha <= 0 or cfg.beta <= 0:
        raise ConfigError(f"LDA priors must be positive (alpha={cfg.alpha}, beta={cfg.beta})")
    if cfg.iterations < 1:
        raise ConfigError(f"LDA needs at least one sweep, got {cfg.iterations}")


def _draw(cum: np.ndarray, u: float) -> int:
    k = int(np.searchsorted(cum, u * cum[-1], side="right"))
    return min(k, cum.shape[0] - 1)


def _sweep(doc_of: List[int], word_of: List[int], z: List[int], ndk: np.ndarray, nwk: np.ndarray,
           nk: np.ndarray, alpha: float, beta: float, v_beta: float, u: List[float]) -> None:
    for i in range(len(z)):
        d = doc_of[i]
        w = word_of[i]
        k = z[i]
        ndk[d, k] -= 1
        nwk[w, k] -= 1
        nk[k] -= 1

        p = (ndk[d] + alpha) * (nwk[w] + beta) / (nk + v_beta)
        k = _draw(np.cumsum(p), u[i])

        z[i] = k
        ndk[d, k] += 1
        nwk[w, k] += 1
        nk[k] += 1


def lda_fit(corpus: Corpus, cfg: LdaConfig, on_sweep: Optional[SweepCallback] = None) -> TopicModel:
    """
    Collapsed Gibbs sampling with random seeded initialization. The state after
    the last sweep is read directly (no burn-in discard, no averaging).

    on_sweep(sweep, doc_topic_counts, topic_word_counts) is called after every sweep.
    """
    check_lda_config(cfg)
    n_terms = corpus.vocabulary.size
    if n_terms < 1:
        raise DatasetError("LDA needs a non-empty vocabulary")
    if corpus.total_tokens == 0:
        raise DatasetError("LDA needs at least one non-empty document")

    k_topics = cfg.k
    rng = np.random.default_rng(cfg.seed)

    doc_of: List[int] = []
    word_of: List[int] = []
    for d, doc in enumerate(corpus.documents):
        doc_of.extend([d] * len(doc.token_ids))
        word_of.extend(doc.token_ids)

    z_init = rng.integers(k_topics, size=len(word_of))
    ndk = np.zeros((corpus.n_docs, k_topics), dtype=np.int64)
    nwk = np.zeros((n_terms, k_topics), dtype=np.int64)
    np.add.at(ndk, (np.asarray(doc_of), z_init), 1)
    np.add.at(nwk, (np.asarray(word_of), z_init), 1)
    nk = np.bincount(z_init, minlength=k_topics).astype(np.int64)
    z = z_init.tolist()

    v_beta = n_terms * cfg.beta
    for sweep in range(cfg.iterations):
        u = rng.random(len(z)).tolist()
        _sweep(doc_of, word_of, z, ndk, nwk, nk, cfg.alpha, cfg.beta, v_beta, u)
        if on_sweep is not None:
            on_sweep(sweep, ndk, nwk.T)

    lengths = ndk.sum(axis=1, keepdims=True)
    doc_topic = (ndk + cfg.alpha) / (lengths + k_topics * cfg.alpha)
    logger.debug(f"LDA fit K={k_topics} alpha={cfg.alpha:.4f} beta={cfg.beta:.4f} "
                 f"on {corpus.n_docs} docs / {len(z)} tokens")
    return TopicModel(
        config=cfg,
        topic_word_counts=np.ascontiguousarray(nwk.T),
        doc_topic=doc_topic,
        vocabulary=corpus.vocabulary,
    )


def lda_transform(model: TopicModel, doc: Document, fold_in_iterations: int = 20, seed: int = 1) -> np.ndarray:
    """
    Fold-in Gibbs: only the new document's assignments move, topic-word counts
    stay frozen. Token ids outside the training vocabulary are skipped.
    """
    k_topics = model.k
    alpha = model.config.alpha
    beta = model.config.beta
    n_terms = model.vocabulary.size

    words = [t for t in doc.token_ids if 0 <= t < n_terms]
    if not words:
        return np.full(k_topics, 1.0 / k_topics)

    topic_word = model.topic_word_counts
    nk = topic_word.sum(axis=1)
    phi = (topic_word[:, words].T + beta) / (nk + n_terms * beta)

    rng = np.random.default_rng(seed)
    z = rng.integers(k_topics, size=len(words)).tolist()
    nd = np.bincount(z, minlength=k_topics).astype(np.int64)
    for _ in range(fold_in_iterations):
        u = rng.random(len(words)).tolist()
        for i in range(len(words)):
            nd[z[i]] -= 1
            k = _draw(np.cumsum((nd + alpha) * phi[i]), u[i])
            z[i] = k
            nd[k] += 1

    return (nd + alpha) / (len(words) + k_topics * alpha)


def lda_transform_many(model: TopicModel, documents: Sequence[Document], fold_in_iterations: int = 20,
                       seed: int = 1) -> FeatureMatrix:
    rows = [
        lda_transform(model, doc, fold_in_iterations, seed=seed + i)
        for i, doc in enumerate(documents)
    ]
    values = np.vstack(rows) if rows else np.zeros((0, model.k))
    return topic_features(model, [d.id for d in documents], values)


def topic_features(model: TopicModel, doc_ids: List[str], values: Optional[np.ndarray] = None) -> FeatureMatrix:
    return FeatureMatrix(
        kind=FeatureKind.TOPIC,
        doc_ids=doc_ids,
        values=model.doc_topic if values is None else values,
        feature_names=[f"topic {i}" for i in range(model.k)],
    )


def top_words(model: TopicModel, topic: int, n: int) -> List[str]:
    """Highest-count terms of a topic; ties go to the lower term id."""
    if not 0 <= topic < model.k:
        raise ConfigError(f"topic {topic} out of range for K={model.k}")
    if n <= 0:
        return []
    counts = model.topic_word_counts[topic]
    order = np.lexsort((np.arange(counts.shape[0]), -counts))
    return [model.vocabulary.term(int(t)) for t in order[:n]]

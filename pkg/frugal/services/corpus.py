import logging
import re
from collections import Counter
from functools import lru_cache
from pathlib import Path
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence

from nltk.stem.porter import PorterStemmer

from frugal.errors import DatasetError
from frugal.models import Corpus, Document, RawDocument, Vocabulary

logger = logging.getLogger(__name__)

STOPWORDS_PATH = Path(__file__).resolve().parent.parent / "data" / "stopwords.txt"
MIN_TOKEN_LENGTH = 2

_NON_ALPHA = re.compile(r"[^a-z]+")
_stemmer = PorterStemmer(mode=PorterStemmer.ORIGINAL_ALGORITHM)


def load_stopwords(path: Optional[Path] = None) -> FrozenSet[str]:
    """
    Reads a stop-word file: one lowercase word per line, '#' starts a comment.
    """
    path = Path(path) if path else STOPWORDS_PATH
    words = set()
    with open(path, "r", encoding="utf-8") as f:
        for line in f:
            word = line.split("#", 1)[0].strip().lower()
            if word:
                words.add(word)
    return frozenset(words)


@lru_cache(maxsize=1)
def default_stopwords() -> FrozenSet[str]:
    return load_stopwords(STOPWORDS_PATH)


def tokenize(text: str) -> List[str]:
    # Any non-alphabetic character separates tokens; 1-letter tokens are noise.
    if not text:
        return []
    return [t for t in _NON_ALPHA.split(text.lower()) if len(t) >= MIN_TOKEN_LENGTH]


def remove_stopwords(tokens: Sequence[str], stopwords: Optional[Iterable[str]] = None) -> List[str]:
    stop = default_stopwords() if stopwords is None else stopwords
    return [t for t in tokens if t not in stop]


@lru_cache(maxsize=65536)
def stem(token: str) -> str:
    """Porter (1980) suffix stripping. Tokens of length <= 2 are left alone."""
    if len(token) <= 2:
        return token
    return _stemmer.stem(token)


def preprocess(text: str, stopwords: Optional[Iterable[str]] = None) -> List[str]:
    return [stem(t) for t in remove_stopwords(tokenize(text), stopwords)]


def binarize_labels(severity_counts: Dict[str, int]) -> str:
    """
    The most frequent severity becomes the positive class.
    Ties go to the lexicographically smallest severity string.
    """
    if not severity_counts:
        raise DatasetError("no labels")
    return min(severity_counts, key=lambda s: (-severity_counts[s], s))


def build_vocabulary(token_lists: Sequence[Sequence[str]], min_doc_freq: int = 1) -> Vocabulary:
    doc_freq: Counter = Counter()
    for tokens in token_lists:
        doc_freq.update(set(tokens))

    # Ids follow sorted term order so rebuilding is reproducible.
    terms = sorted(t for t, df in doc_freq.items() if df >= min_doc_freq)
    kept = set(terms)
    total_terms = sum(1 for tokens in token_lists for t in tokens if t in kept)
    return Vocabulary(
        terms=terms,
        doc_freq=[doc_freq[t] for t in terms],
        total_docs=len(token_lists),
        total_terms=total_terms,
    )


def build_corpus(
    raw: Sequence[RawDocument],
    name: str = "corpus",
    min_doc_freq: int = 1,
    stopwords: Optional[Iterable[str]] = None,
) -> Corpus:
    """
    tokenize -> remove_stopwords -> stem, then vocabulary and binary labels.
    Documents left empty by preprocessing are kept with no tokens.
    """
    if not raw:
        raise DatasetError("no documents")

    seen = set()
    for doc in raw:
        if doc.id in seen:
            raise DatasetError(f"duplicate document id: {doc.id}")
        seen.add(doc.id)

    stop = frozenset(stopwords) if stopwords is not None else default_stopwords()
    token_lists = [preprocess(doc.text, stop) for doc in raw]
    vocabulary = build_vocabulary(token_lists, min_doc_freq=min_doc_freq)

    positive_class = binarize_labels(Counter(doc.severity for doc in raw))

    documents = []
    for doc, tokens in zip(raw, token_lists):
        ids = [vocabulary.term_id(t) for t in tokens]
        documents.append(Document(
            id=doc.id,
            token_ids=[i for i in ids if i is not None],
            label=doc.severity == positive_class,
        ))

    positives = sum(1 for d in documents if d.label)
    corpus = Corpus(
        name=name,
        documents=documents,
        vocabulary=vocabulary,
        positive_class=positive_class,
        positive_fraction=positives / len(documents),
    )
    logger.info(f"Built corpus '{name}': {summary(corpus)}")
    return corpus


def encode(document: Document, source: Vocabulary, target: Vocabulary) -> Document:
    """Re-map a document into another vocabulary, dropping terms the target lacks."""
    ids = [target.term_id(source.term(t)) for t in document.token_ids]
    return Document(id=document.id, token_ids=[i for i in ids if i is not None], label=document.label)


def restrict(corpus: Corpus, indices: Sequence[int]) -> Corpus:
    """
    Sub-corpus over the selected documents with its own dense vocabulary.
    Nothing about documents outside `indices` survives in the result.
    """
    selected = [corpus.documents[i] for i in indices]
    vocab = corpus.vocabulary
    token_lists = [[vocab.term(t) for t in d.token_ids] for d in selected]
    sub_vocab = build_vocabulary(token_lists)

    documents = [
        Document(id=d.id, token_ids=[sub_vocab.term_id(t) for t in tokens], label=d.label)
        for d, tokens in zip(selected, token_lists)
    ]
    positives = sum(1 for d in documents if d.label)
    return Corpus(
        name=corpus.name,
        documents=documents,
        vocabulary=sub_vocab,
        positive_class=corpus.positive_class,
        positive_fraction=positives / len(documents) if documents else 0.0,
    )


def summary(corpus: Corpus) -> str:
    """One line per dataset: documents, vocabulary size, severe %."""
    return (
        f"{corpus.n_docs} documents, {corpus.vocabulary.size} terms, "
        f"{round(100 * corpus.positive_fraction)}% severe"
    )

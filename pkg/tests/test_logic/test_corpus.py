"""
Corpus Tests
Tokenizer, stop words, Porter stemming, label binarization and vocabulary building.
"""
import pytest
from hypothesis import given, settings, strategies as st

from frugal.errors import DatasetError
from frugal.models import RawDocument
from frugal.services.corpus import (
    binarize_labels, build_corpus, default_stopwords, encode, load_stopwords, preprocess, remove_stopwords,
    restrict, stem, summary, tokenize,
)


def _raw(*texts, severity="1"):
    return [RawDocument(id=str(i), text=t, severity=severity) for i, t in enumerate(texts)]


class TestTokenize:
    """Lowercase alphabetic tokens only."""

    def test_empty_text(self):
        assert tokenize("") == []

    def test_punctuation_and_case(self):
        assert tokenize("Fix, the BUG!") == ["fix", "the", "bug"]

    def test_hyphen_and_parens_split(self):
        assert tokenize("byte-order (ptr)") == ["byte", "order", "ptr"]

    def test_digits_and_single_letters_dropped(self):
        assert tokenize("x = 42 in v2") == ["in"]

    @given(st.text(max_size=200))
    def test_tokens_are_lowercase_alpha(self, text):
        for token in tokenize(text):
            assert token.isascii() and token.isalpha() and token == token.lower()
            assert len(token) >= 2


class TestStopwords:
    def test_shipped_list_size(self):
        assert len(default_stopwords()) == 127

    def test_all_stopwords_removed(self):
        assert remove_stopwords(["the", "in", "that"]) == []

    def test_order_preserved(self):
        assert remove_stopwords(["the", "packet", "in", "buffer"]) == ["packet", "buffer"]

    def test_non_stopword_kept(self):
        assert remove_stopwords(["packet"]) == ["packet"]

    def test_custom_file_with_comments(self, tmp_path):
        path = tmp_path / "stop.txt"
        path.write_text("# custom list\npacket\nbuffer  # trailing comment\n\n", encoding="utf-8")
        assert load_stopwords(path) == frozenset({"packet", "buffer"})


class TestStem:
    @pytest.mark.parametrize("token,expected", [
        ("the", "the"),
        ("caresses", "caress"),
        ("computation", "comput"),
        ("ponies", "poni"),
        ("running", "run"),
        ("is", "is"),
    ])
    def test_porter_outputs(self, token, expected):
        assert stem(token) == expected

    def test_second_pass_can_strip_further(self):
        """Porter is not idempotent: 'agreed' stems to 'agre', which stems again to 'agr'."""
        assert stem("agreed") == "agre"
        assert stem("agre") == "agr"

    def test_vocabulary_terms_mostly_stable_under_restemming(self):
        corpus = build_corpus(_raw("agreed operational generalizations relational packets crashing"))
        terms = corpus.vocabulary.terms
        assert "agre" in terms
        assert [t for t in terms if stem(t) != t] == ["agre"]

    def test_preprocess_pipeline_order(self):
        assert preprocess("The packets are crashing in the buffer") == ["packet", "crash", "buffer"]


class TestBinarizeLabels:
    def test_strict_maximum(self):
        assert binarize_labels({"3": 50, "4": 40, "2": 10}) == "3"

    def test_tie_goes_to_smallest_string(self):
        assert binarize_labels({"b": 5, "a": 5}) == "a"

    def test_empty_map_raises(self):
        with pytest.raises(DatasetError, match="no labels"):
            binarize_labels({})


class TestBuildCorpus:
    def test_all_stopword_document_kept(self):
        corpus = build_corpus(_raw("the the the"))
        assert corpus.n_docs == 1
        assert corpus.total_tokens == 0
        assert corpus.vocabulary.size == 0

    def test_hand_counted_vocabulary(self):
        corpus = build_corpus(_raw("packet error", "packet loss"))
        vocab = corpus.vocabulary
        assert vocab.size == 3
        assert vocab.doc_freq[vocab.term_id("packet")] == 2
        assert vocab.total_docs == 2
        assert vocab.total_terms == 4

    def test_duplicate_id_named(self):
        raw = [RawDocument(id="dup", text="a b", severity="1"), RawDocument(id="dup", text="c d", severity="2")]
        with pytest.raises(DatasetError, match="dup"):
            build_corpus(raw)

    def test_no_documents(self):
        with pytest.raises(DatasetError, match="no documents"):
            build_corpus([])

    def test_labels_and_fraction(self, tiny_corpus):
        assert tiny_corpus.positive_class == "4"
        assert tiny_corpus.labels().tolist() == [True, True, False]
        assert tiny_corpus.positive_fraction == pytest.approx(2 / 3)

    def test_vocabulary_round_trip(self, tiny_corpus):
        vocab = tiny_corpus.vocabulary
        for i, term in enumerate(vocab.terms):
            assert vocab.term_id(term) == i
            assert vocab.term(i) == term

    def test_token_ids_in_range(self, synthetic_corpus):
        v = synthetic_corpus.vocabulary.size
        assert all(0 <= t < v for d in synthetic_corpus.documents for t in d.token_ids)
        assert synthetic_corpus.vocabulary.total_terms == synthetic_corpus.total_tokens

    def test_rebuild_is_identical(self, tiny_raw):
        assert build_corpus(tiny_raw).model_dump() == build_corpus(tiny_raw).model_dump()

    def test_min_doc_freq_prunes(self):
        corpus = build_corpus(_raw("packet error", "packet loss"), min_doc_freq=2)
        assert corpus.vocabulary.terms == ["packet"]
        assert [len(d.token_ids) for d in corpus.documents] == [1, 1]

    def test_summary_line(self, tiny_corpus):
        assert summary(tiny_corpus) == f"3 documents, {tiny_corpus.vocabulary.size} terms, 67% severe"


class TestRestrict:
    def test_sub_vocabulary_only_sees_selected_documents(self, tiny_corpus):
        sub = restrict(tiny_corpus, [2])
        assert sub.n_docs == 1
        assert "parser" not in sub.vocabulary.terms
        assert sub.vocabulary.total_docs == 1

    def test_terms_preserved_through_reindexing(self, tiny_corpus):
        sub = restrict(tiny_corpus, [0, 2])
        for original, restricted in zip([tiny_corpus.documents[0], tiny_corpus.documents[2]], sub.documents):
            assert [tiny_corpus.vocabulary.term(t) for t in original.token_ids] == \
                   [sub.vocabulary.term(t) for t in restricted.token_ids]

    def test_encode_drops_unseen_terms(self, tiny_corpus):
        sub = restrict(tiny_corpus, [2])
        moved = encode(tiny_corpus.documents[0], tiny_corpus.vocabulary, sub.vocabulary)
        assert moved.token_ids == []
        assert moved.label is True

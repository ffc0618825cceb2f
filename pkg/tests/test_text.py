import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from kgxir.text import (
    EmbedderModel,
    cosine,
    embed,
    fit_embedder,
    split_sentences,
    tokenize,
    tokenize_with_spans,
)


class TestTokenize:
    def test_lowercases_and_drops_punctuation(self):
        assert tokenize("Heart Disease!") == ["heart", "disease"]

    def test_empty_input(self):
        assert tokenize("") == []

    def test_hyphen_splits(self):
        assert tokenize("obesity-related risk") == ["obesity", "related", "risk"]

    def test_underscore_is_a_separator(self):
        assert tokenize("a_b") == ["a", "b"]

    def test_unicode_letters_kept(self):
        assert tokenize("Crème brûlée 10ml") == ["crème", "brûlée", "10ml"]

    def test_spans_point_into_original_text(self):
        text = "Heart Disease!"
        spans = tokenize_with_spans(text)
        assert [(t, text[s:e].lower()) for t, s, e in spans] == [
            ("heart", "heart"),
            ("disease", "disease"),
        ]

    @given(st.text(max_size=120))
    def test_idempotent_on_joined_output(self, text):
        tokens = tokenize(text)
        assert tokenize(" ".join(tokens)) == tokens


class TestSplitSentences:
    def covered(self, text):
        return [(s.start, s.end, s.text_of(text)) for s in split_sentences(text)]

    def test_two_sentences(self):
        assert self.covered("A b. C d.") == [(0, 4, "A b."), (5, 9, "C d.")]

    def test_no_terminator_is_one_span(self):
        assert self.covered("no terminator") == [(0, 13, "no terminator")]

    def test_abbreviations_split_naively(self):
        assert [t for _, _, t in self.covered("Dr. Who?")] == ["Dr.", "Who?"]

    def test_terminator_mid_token_does_not_split(self):
        assert [t for _, _, t in self.covered("v1.2 is out! Get it.")] == [
            "v1.2 is out!",
            "Get it.",
        ]

    def test_empty_and_whitespace_only(self):
        assert split_sentences("") == []
        assert split_sentences("  \n\t ") == []

    def test_indices_are_ordinal(self):
        spans = split_sentences("One. Two! Three?")
        assert [s.index for s in spans] == [0, 1, 2]

    @given(st.text(max_size=200))
    def test_spans_cover_all_non_whitespace_without_overlap(self, text):
        spans = split_sentences(text)
        prev_end = -1
        covered = set()
        for span in spans:
            assert span.start < span.end
            assert span.start > prev_end
            prev_end = span.end
            covered.update(range(span.start, span.end))
        for pos, ch in enumerate(text):
            if not ch.isspace():
                assert pos in covered


class TestEmbedder:
    def test_fit_counts_document_frequency(self):
        model = fit_embedder(["a b", "b c"])
        assert model.vocabulary == ["a", "b", "c"]
        assert model.document_frequency == {"a": 1, "b": 2, "c": 1}
        assert model.n_docs == 2

    def test_fit_single_doc_repeated_term(self):
        model = fit_embedder(["x x x"])
        assert model.vocabulary == ["x"]
        assert model.document_frequency == {"x": 1}
        assert model.n_docs == 1

    def test_fit_same_term_in_every_doc(self):
        model = fit_embedder(["a", "a"])
        assert model.document_frequency == {"a": 2}

    def test_fit_empty_corpus_raises(self):
        with pytest.raises(ValueError):
            fit_embedder([])

    def test_idf_values(self):
        model = fit_embedder(["a b", "b c"])
        # df(b)=2, N=2: ln(3/3)+1 = 1; df(a)=1: ln(3/2)+1
        assert model.idf[model.term_index["b"]] == pytest.approx(1.0, abs=1e-12)
        assert model.idf[model.term_index["a"]] == pytest.approx(
            math.log(1.5) + 1.0, abs=1e-12
        )
        assert model.idf[model.term_index["a"]] == pytest.approx(1.405465, abs=1e-6)

    def test_out_of_vocabulary_text_embeds_to_zero(self):
        model = fit_embedder(["a b", "b c"])
        assert not embed("zebra quux", model).any()

    def test_nonzero_vectors_are_unit_norm(self):
        model = fit_embedder(["a b", "b c", "c d a"])
        for text in ["a", "a b c", "d d d b", "c a"]:
            vec = embed(text, model)
            assert abs(np.linalg.norm(vec) - 1.0) < 1e-9

    def test_weights_proportional_to_tf_times_idf(self):
        model = fit_embedder(["a b", "b c"])
        vec = embed("a a b", model)
        idf_a = math.log(1.5) + 1.0
        raw = np.zeros(3)
        raw[model.term_index["a"]] = 2 * idf_a
        raw[model.term_index["b"]] = 1 * 1.0
        expected = raw / np.linalg.norm(raw)
        np.testing.assert_allclose(vec, expected, atol=1e-12)

    def test_fit_then_embed_bit_identical_across_runs(self):
        corpus = ["the quick brown fox", "jumps over the lazy dog", "foxes and dogs"]
        first = [embed(t, fit_embedder(corpus)) for t in corpus]
        second = [embed(t, fit_embedder(corpus)) for t in corpus]
        for a, b in zip(first, second):
            assert np.array_equal(a, b)

    def test_model_rejects_nothing_but_df_invariants_hold(self):
        model = fit_embedder(["a b", "b c", "a"])
        for term in model.vocabulary:
            assert 1 <= model.document_frequency[term] <= model.n_docs
        assert len(set(model.vocabulary)) == len(model.vocabulary)


class TestCosine:
    def test_identical_vector_scores_one(self):
        v = np.array([0.6, 0.8])
        assert cosine(v, v) == pytest.approx(1.0, abs=1e-12)

    def test_orthogonal_vectors_score_zero(self):
        assert cosine(np.array([1.0, 0.0]), np.array([0.0, 1.0])) == 0.0

    def test_forty_five_degrees(self):
        a = np.array([1.0, 1.0]) / math.sqrt(2)
        b = np.array([1.0, 0.0])
        assert cosine(a, b) == pytest.approx(0.707107, abs=1e-6)

    def test_zero_vector_scores_zero(self):
        assert cosine(np.zeros(3), np.array([1.0, 2.0, 3.0])) == 0.0

    def test_dimension_mismatch_raises(self):
        with pytest.raises(ValueError):
            cosine(np.zeros(3), np.zeros(4))

    def test_symmetry_is_exact(self):
        model = fit_embedder(["a b c", "c d e", "e f g"])
        a = embed("a c e g", model)
        b = embed("b c d", model)
        assert cosine(a, b) == cosine(b, a)


def test_embedder_model_dimension_property():
    model = EmbedderModel(vocabulary=["x", "y"], document_frequency={"x": 1, "y": 2}, n_docs=2)
    assert model.dimension == 2

import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lrlkit.errors import DataError
from lrlkit.retriever import build_index, query, sample_random, score_one, tokenize

from helpers import bm25_brute_force

TOY_POOL = [
    "the cat sat on the mat",
    "a dog chased the cat",
    "birds fly over the river",
]


class TestBuildIndex:
    def test_fixture_pool_size(self, sib_dataset):
        pool = [ex.text_target for ex in sib_dataset.split("train")]
        index = build_index(pool)
        assert index.n_docs == 701

    def test_single_document_avgdl(self):
        index = build_index(["three word doc"])
        assert index.avgdl == 3.0

    def test_toy_pool_term_statistics_by_hand(self):
        # Hand counts: df(the)=3, df(cat)=2, df(dog)=1; doc0 tf(the)=2.
        index = build_index(TOY_POOL)
        assert index.doc_freq["the"] == 3
        assert index.doc_freq["cat"] == 2
        assert index.doc_freq["dog"] == 1
        assert index.doc_term_freqs[0]["the"] == 2
        assert index.doc_lengths == (6, 5, 5)
        assert index.avgdl == pytest.approx(16 / 3)

    def test_empty_pool_rejected(self):
        with pytest.raises(DataError, match="empty pool"):
            build_index([])

    def test_bad_parameters_rejected(self):
        with pytest.raises(DataError):
            build_index(TOY_POOL, k1=-0.1)
        with pytest.raises(DataError):
            build_index(TOY_POOL, b=1.5)

    def test_tokenless_pool_rejected(self):
        with pytest.raises(DataError, match="no tokens"):
            build_index([" ", "  "])


class TestQuery:
    def test_self_retrieval_ranks_first(self):
        index = build_index(TOY_POOL)
        for doc_id, doc in enumerate(TOY_POOL):
            assert query(index, doc, top_k=1)[0][0] == doc_id

    def test_no_overlap_all_zero_in_id_order(self):
        index = build_index(TOY_POOL)
        ranked = query(index, "zebra quark", top_k=3)
        assert ranked == [(0, 0.0), (1, 0.0), (2, 0.0)]

    def test_scores_match_brute_force(self):
        index = build_index(TOY_POOL, k1=1.2, b=0.75)
        for q in ("the cat", "dog river", "cat cat mat", "the the the fly"):
            expected = bm25_brute_force(TOY_POOL, q, k1=1.2, b=0.75)
            got = {doc_id: s for doc_id, s in query(index, q, top_k=3)}
            for doc_id, exp in enumerate(expected):
                assert got[doc_id] == pytest.approx(exp, abs=1e-9)

    def test_top_k_truncates(self):
        index = build_index(TOY_POOL)
        assert len(query(index, "the cat", top_k=2)) == 2
        assert len(query(index, "the cat", top_k=50)) == 3

    def test_top_k_must_be_positive(self):
        index = build_index(TOY_POOL)
        with pytest.raises(DataError):
            query(index, "the", top_k=0)

    def test_term_frequency_monotonicity(self):
        # Same length, same df for "x"; higher tf must not score lower.
        pool = ["x y z", "x x z", "filler doc here"]
        index = build_index(pool)
        scores = dict(query(index, "x", top_k=3))
        assert scores[1] >= scores[0]

    def test_duplicate_documents_tie_break_by_id(self):
        pool = ["same text twice", "same text twice", "other words"]
        index = build_index(pool)
        ranked = query(index, "same text", top_k=3)
        assert ranked[0][1] == pytest.approx(ranked[1][1], abs=1e-12)
        assert (ranked[0][0], ranked[1][0]) == (0, 1)

    @settings(max_examples=100)
    @given(
        docs=st.lists(
            st.lists(st.sampled_from("abcde"), min_size=1, max_size=6).map(" ".join),
            min_size=1,
            max_size=6,
        ),
        q=st.lists(st.sampled_from("abcdef"), min_size=1, max_size=4).map(" ".join),
    )
    def test_idf_floor_keeps_scores_nonnegative(self, docs, q):
        index = build_index(docs)
        for term in set(tokenize(q)):
            assert index.idf(term) > 0.0
        for _, score in query(index, q, top_k=len(docs)):
            assert score >= 0.0

    @settings(max_examples=100)
    @given(
        base=st.lists(st.sampled_from("abc"), min_size=1, max_size=5),
        extra=st.integers(min_value=1, max_value=3),
    )
    def test_more_matches_never_score_lower(self, base, extra):
        # Two docs of equal length: doc B replaces `extra` non-query tokens
        # with the query term, holding everything else equal.
        padded = base + ["z"] * extra
        doc_a = " ".join(padded)
        doc_b = " ".join(base + ["q"] * extra)
        pool = [doc_a, doc_b]
        index = build_index(pool)
        scores = dict(query(index, "q", top_k=2))
        assert scores[1] >= scores[0]


class TestSampleRandom:
    def test_full_selection_is_set_equal(self):
        pool = list("abcdefgh")
        ids = sample_random(pool, len(pool), seed=99)
        assert sorted(ids) == list(range(len(pool)))

    def test_same_seed_identical(self):
        pool = list(range(50))
        assert sample_random(pool, 10, seed=5) == sample_random(pool, 10, seed=5)

    def test_frozen_reference_trace(self):
        # Frozen once from the documented partial Fisher-Yates algorithm.
        assert sample_random(list(range(10)), 3, seed=7) == [3, 2, 7]
        assert sample_random(list(range(5)), 5, seed=123) == [0, 1, 3, 2, 4]

    def test_k_out_of_range(self):
        with pytest.raises(DataError):
            sample_random([1, 2, 3], 4, seed=0)
        with pytest.raises(DataError):
            sample_random([1, 2, 3], 0, seed=0)

    @settings(max_examples=50)
    @given(
        n=st.integers(min_value=1, max_value=40),
        seed=st.integers(min_value=0, max_value=2**31),
        data=st.data(),
    )
    def test_distinct_ids_within_bounds(self, n, seed, data):
        k = data.draw(st.integers(min_value=1, max_value=n))
        ids = sample_random(list(range(n)), k, seed)
        assert len(ids) == len(set(ids)) == k
        assert all(0 <= i < n for i in ids)


class TestScoreOne:
    def test_matches_query_path(self):
        index = build_index(TOY_POOL)
        tokens = tokenize("the cat")
        via_query = dict(query(index, "the cat", top_k=3))
        for doc_id in range(3):
            assert score_one(index, tokens, doc_id) == via_query[doc_id]

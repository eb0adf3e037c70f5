"""BM25 retrieval over the training pool, plus seeded random sampling.

Okapi BM25 with the +1-smoothed IDF:

    idf(t)     = ln(1 + (N - n_t + 0.5) / (n_t + 0.5))
    score(D,Q) = sum over query tokens t of
                 idf(t) * tf(t,D) * (k1 + 1) / (tf(t,D) + k1 * (1 - b + b * |D| / avgdl))

Query tokens are counted with multiplicity. Documents and queries share
plain whitespace tokenization (no stemming, no case folding); text is
indexed raw. The smoothed IDF is strictly positive, so scores are >= 0 and
a query with no overlapping terms yields all-zero scores.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from collections import Counter
from typing import Sequence

from .errors import DataError


def tokenize(text: str) -> list[str]:
    return text.split()


@dataclass(frozen=True)
class Bm25Index:
    doc_term_freqs: tuple[Counter, ...]
    doc_lengths: tuple[int, ...]
    doc_freq: dict[str, int]
    n_docs: int
    avgdl: float
    k1: float
    b: float

    def idf(self, term: str) -> float:
        n_t = self.doc_freq.get(term, 0)
        return math.log(1.0 + (self.n_docs - n_t + 0.5) / (n_t + 0.5))


def build_index(pool: Sequence[str], k1: float = 1.2, b: float = 0.75) -> Bm25Index:
    """Index a pool of texts; doc ids are positions in the pool."""
    if not pool:
        raise DataError("build_index: empty pool")
    if k1 < 0:
        raise DataError("build_index: k1 must be >= 0")
    if not 0.0 <= b <= 1.0:
        raise DataError("build_index: b must be in [0, 1]")
    term_freqs = tuple(Counter(tokenize(doc)) for doc in pool)
    lengths = tuple(sum(tf.values()) for tf in term_freqs)
    avgdl = sum(lengths) / len(pool)
    if avgdl == 0:
        raise DataError("build_index: pool contains no tokens")
    doc_freq: dict[str, int] = {}
    for tf in term_freqs:
        for term in tf:
            doc_freq[term] = doc_freq.get(term, 0) + 1
    return Bm25Index(
        doc_term_freqs=term_freqs,
        doc_lengths=lengths,
        doc_freq=doc_freq,
        n_docs=len(pool),
        avgdl=avgdl,
        k1=k1,
        b=b,
    )


def score_one(index: Bm25Index, query_tokens: Sequence[str], doc_id: int) -> float:
    tf = index.doc_term_freqs[doc_id]
    dl = index.doc_lengths[doc_id]
    norm = index.k1 * (1.0 - index.b + index.b * dl / index.avgdl)
    total = 0.0
    for term in query_tokens:
        f = tf.get(term, 0)
        if f == 0:
            continue
        total += index.idf(term) * f * (index.k1 + 1.0) / (f + norm)
    return total


def query(index: Bm25Index, text: str, top_k: int) -> list[tuple[int, float]]:
    """Rank documents for a query; descending score, ties by ascending id."""
    if top_k < 1:
        raise DataError("query: top_k must be >= 1")
    tokens = tokenize(text)
    scored = [(doc_id, score_one(index, tokens, doc_id)) for doc_id in range(index.n_docs)]
    scored.sort(key=lambda pair: (-pair[1], pair[0]))
    return scored[: min(top_k, index.n_docs)]


def sample_random(pool: Sequence, k: int, seed: int) -> list[int]:
    """Select k distinct doc ids reproducibly for a given seed.

    Fixed, documented algorithm so frozen fixtures stay valid: a partial
    Fisher-Yates shuffle over ids 0..len(pool)-1 whose i-th swap index is
    i + floor(r * (len(pool) - i)) with r drawn from the seeded Mersenne
    Twister's random() stream (the only generator method with a
    cross-version reproducibility guarantee).
    """
    n = len(pool)
    if not 1 <= k <= n:
        raise DataError(f"sample_random: k must be in [1, {n}], got {k}")
    rng = random.Random(seed)
    ids = list(range(n))
    for i in range(k):
        j = i + int(rng.random() * (n - i))
        if j >= n:  # guard the r == 1.0 edge
            j = n - 1
        ids[i], ids[j] = ids[j], ids[i]
    return ids[:k]

"""Shared test helpers: synthetic data generators and independent oracles.

The oracles here deliberately re-derive results from definitions (full
enumeration, per-query recounting) rather than calling the library's own
code paths, so they stay independent of what they check.
"""

from __future__ import annotations

import asyncio
import itertools
import math
import random
from dataclasses import dataclass

import httpx

from lrlkit.aligner import NULL_WORD, AlignmentModel
from lrlkit.corpus import ParallelCorpus


class SyncASGITransport(httpx.BaseTransport):
    """Serve an ASGI app to a synchronous httpx.Client, for in-process
    end-to-end tests of the HTTP wire format."""

    def __init__(self, app):
        self._transport = httpx.ASGITransport(app=app)

    def handle_request(self, request: httpx.Request) -> httpx.Response:
        async def call() -> httpx.Response:
            response = await self._transport.handle_async_request(request)
            body = b"".join([chunk async for chunk in response.stream])
            return httpx.Response(
                status_code=response.status_code, headers=response.headers, content=body
            )

        return asyncio.run(call())


@dataclass
class SyntheticAlignmentData:
    corpus: ParallelCorpus
    gold_links: list[set[tuple[int, int]]]
    true_lexicon: dict[str, str]


def generate_model2_corpus(
    n_sentences: int = 500,
    n_types: int = 20,
    seed: int = 42,
    tension: float = 4.0,
    dominant: float = 0.95,
) -> SyntheticAlignmentData:
    """Sample a corpus from a known Model-2 parameter set (null prob 0).

    Every English token carries a gold link to the source position that
    generated it, and every source word type has a dominant translation.
    """
    rng = random.Random(seed)
    f_types = [f"f{i:02d}" for i in range(n_types)]
    e_types = [f"e{i:02d}" for i in range(n_types)]
    true_t: dict[str, dict[str, float]] = {}
    for i, f in enumerate(f_types):
        spread = (1.0 - dominant) / 2.0
        true_t[f] = {
            e_types[i]: dominant,
            e_types[(i + 1) % n_types]: spread,
            e_types[(i + 2) % n_types]: spread,
        }
    sentences = []
    gold = []
    for _ in range(n_sentences):
        n = rng.randint(3, 8)
        # Distinct types within a sentence: a repeated type would make its
        # generating position unrecoverable in principle.
        f_words = rng.sample(f_types, k=n)
        m = n
        e_words = []
        sent_links = set()
        for j in range(1, m + 1):
            weights = [math.exp(tension * -abs(i / n - j / m)) for i in range(1, n + 1)]
            a = rng.choices(range(1, n + 1), weights=weights)[0]
            dist = true_t[f_words[a - 1]]
            e = rng.choices(list(dist), weights=list(dist.values()))[0]
            e_words.append(e)
            sent_links.add((a - 1, j - 1))
        sentences.append((" ".join(f_words), " ".join(e_words)))
        gold.append(sent_links)
    return SyntheticAlignmentData(
        corpus=ParallelCorpus(tuple(sentences), "syn_Test"),
        gold_links=gold,
        true_lexicon={f_types[i]: e_types[i] for i in range(n_types)},
    )


def brute_force_posteriors(model: AlignmentModel, pair: tuple[str, str]) -> list[list[float]]:
    """Exact link posteriors by enumerating every alignment function."""
    f_words = pair[0].split()
    e_words = pair[1].split()
    n, m = len(f_words), len(e_words)

    def delta(i: int, j: int) -> float:
        if i == 0:
            return model.null_prob
        z = sum(math.exp(model.tension * -abs(ii / n - j / m)) for ii in range(1, n + 1))
        return (1.0 - model.null_prob) * math.exp(model.tension * -abs(i / n - j / m)) / z

    def tprob(i: int, e: str) -> float:
        source = NULL_WORD if i == 0 else f_words[i - 1]
        return model.translation_prob(source, e)

    total = 0.0
    marginals = [[0.0] * (n + 1) for _ in range(m)]
    for assignment in itertools.product(range(n + 1), repeat=m):
        p = 1.0
        for j, i in enumerate(assignment, start=1):
            p *= delta(i, j) * tprob(i, e_words[j - 1])
        total += p
        for j, i in enumerate(assignment):
            marginals[j][i] += p
    return [[v / total for v in row] for row in marginals]


def bm25_brute_force(pool: list[str], query_text: str, k1: float = 1.2, b: float = 0.75) -> list[float]:
    """Straight recomputation of the scoring formula, one doc at a time."""
    docs = [d.split() for d in pool]
    n_docs = len(docs)
    avgdl = sum(len(d) for d in docs) / n_docs
    scores = []
    for doc in docs:
        score = 0.0
        for term in query_text.split():
            tf = doc.count(term)
            if tf == 0:
                continue
            df = sum(1 for other in docs if term in other)
            idf = math.log(1.0 + (n_docs - df + 0.5) / (df + 0.5))
            score += idf * tf * (k1 + 1.0) / (tf + k1 * (1.0 - b + b * len(doc) / avgdl))
        scores.append(score)
    return scores

"""Word alignment via IBM Model 2 with a diagonal-tension distortion prior,
trained by EM, plus dictionary induction from the trained translation table.

The generative story: given a target-language sentence f_1..f_n, each
English position j in 1..m picks an alignment a_j — the null word with
probability p0, otherwise source position i with probability proportional
to exp(tension * h(i, j, m, n)) where h(i, j, m, n) = -|i/n - j/m| — and
then emits e_j ~ t(e_j | f_{a_j}). Conditioning English on the target
language makes dictionary extraction a direct argmax per target word.

Alignments factorize over English positions, so E-step posteriors are
exact; the tension parameter is re-optimized each iteration by a bracketed
golden-section search on its concave expected-log-likelihood term.
Training is deterministic: no randomness, fixed corpus-order reduction.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

from .corpus import ParallelCorpus
from .errors import DataError

NULL_WORD = "<null>"

MIN_TENSION = 0.1
MAX_TENSION = 14.0
MAX_SENTENCE_TOKENS = 200
_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class AlignerOptions:
    iterations: int = 5
    null_prob: float = 0.08
    tension: float = 4.0
    optimize_tension: bool = True
    smoothing_alpha: float = 0.01

    def __post_init__(self):
        if self.iterations < 1:
            raise DataError("iterations must be >= 1")
        if not 0.0 <= self.null_prob < 1.0:
            raise DataError("null_prob must be in [0, 1)")
        if self.tension <= 0.0:
            raise DataError("tension must be > 0")
        if self.smoothing_alpha < 0.0:
            raise DataError("smoothing_alpha must be >= 0")


@dataclass(frozen=True)
class SentenceAlignment:
    """Set of (source_index, target_index) links, 0-based.

    Source indexes the target-language sentence, target indexes the English
    sentence; Viterbi decoding links each English position at most once.
    """

    links: frozenset[tuple[int, int]]

    def sorted_links(self) -> list[tuple[int, int]]:
        return sorted(self.links, key=lambda l: (l[1], l[0]))


@dataclass
class Dictionary:
    """Single-best target-to-English lexicon induced from a trained model."""

    entries: dict[str, tuple[str, float]]
    coverage: float

    def lookup(self, word: str) -> str | None:
        entry = self.entries.get(word)
        return entry[0] if entry else None

    def to_tsv(self, path: str | Path) -> None:
        with Path(path).open("w", encoding="utf-8") as f:
            for tgt in sorted(self.entries):
                eng, prob = self.entries[tgt]
                f.write(f"{tgt}\t{eng}\t{prob:.10g}\n")

    @classmethod
    def from_tsv(cls, path: str | Path, coverage: float = 1.0) -> "Dictionary":
        entries: dict[str, tuple[str, float]] = {}
        p = Path(path)
        if not p.exists():
            raise DataError(f"dictionary file not found: {p}")
        for lineno, line in enumerate(p.read_text(encoding="utf-8").splitlines(), 1):
            if not line.strip():
                continue
            parts = line.split("\t")
            if len(parts) != 3:
                raise DataError(f"{p}:{lineno}: expected 'target<TAB>english<TAB>prob'")
            entries[parts[0]] = (parts[1], float(parts[2]))
        if not entries:
            raise DataError(f"{p}: empty dictionary")
        return cls(entries=entries, coverage=coverage)


@dataclass
class AlignmentModel:
    """Trained translation table plus distortion parameters.

    ``log_likelihoods`` records the observed-data log-likelihood entering
    each EM iteration; ``penalized_log_likelihoods`` adds the smoothing
    prior term alpha * sum(log t). EM guarantees the penalized sequence
    never decreases; with alpha = 0 the two sequences coincide.
    """

    t_table: dict[str, dict[str, float]]
    tension: float
    null_prob: float
    smoothing_alpha: float
    english_vocab_size: int
    log_likelihoods: list[float] = field(default_factory=list)
    penalized_log_likelihoods: list[float] = field(default_factory=list)
    direction: str = "target_to_english"

    def translation_prob(self, source_word: str, english_word: str) -> float:
        """t(english | source) with uniform fallback for unseen words."""
        uniform = 1.0 / max(self.english_vocab_size, 1)
        row = self.t_table.get(source_word)
        if row is None:
            return uniform
        prob = row.get(english_word)
        if prob is None:
            # English word never co-occurred with this source word; unseen
            # English words fall back to uniform rather than zeroing out.
            return uniform if english_word not in self._english_vocab() else 0.0
        return prob

    def _english_vocab(self) -> set[str]:
        cached = getattr(self, "_english_vocab_cache", None)
        if cached is None:
            cached = set()
            for row in self.t_table.values():
                cached.update(row)
            self._english_vocab_cache = cached
        return cached

    def to_json(self, path: str | Path) -> None:
        payload = {
            "direction": self.direction,
            "tension": self.tension,
            "null_prob": self.null_prob,
            "smoothing_alpha": self.smoothing_alpha,
            "english_vocab_size": self.english_vocab_size,
            "log_likelihoods": self.log_likelihoods,
            "penalized_log_likelihoods": self.penalized_log_likelihoods,
            "t_table": self.t_table,
        }
        Path(path).write_text(
            json.dumps(payload, ensure_ascii=False, sort_keys=True, indent=None),
            encoding="utf-8",
        )

    @classmethod
    def from_json(cls, path: str | Path) -> "AlignmentModel":
        p = Path(path)
        if not p.exists():
            raise DataError(f"model file not found: {p}")
        d = json.loads(p.read_text(encoding="utf-8"))
        return cls(
            t_table=d["t_table"],
            tension=d["tension"],
            null_prob=d["null_prob"],
            smoothing_alpha=d["smoothing_alpha"],
            english_vocab_size=d["english_vocab_size"],
            log_likelihoods=list(d.get("log_likelihoods", [])),
            penalized_log_likelihoods=list(d.get("penalized_log_likelihoods", [])),
            direction=d.get("direction", "target_to_english"),
        )


def _diag_feature(i: int, j: int, m: int, n: int) -> float:
    # 1-based positions; i over the source (target-language) sentence of
    # length n, j over the English sentence of length m.
    return -abs(i / n - j / m)


def _log_z(j: int, m: int, n: int, tension: float) -> float:
    return math.log(math.fsum(math.exp(tension * _diag_feature(i, j, m, n)) for i in range(1, n + 1)))


def _distortion_row(j: int, m: int, n: int, tension: float, p0: float) -> list[float]:
    """P(a_j = i | j, m, n) for i = 0..n; index 0 is the null word."""
    weights = [math.exp(tension * _diag_feature(i, j, m, n)) for i in range(1, n + 1)]
    z = math.fsum(weights)
    return [p0] + [(1.0 - p0) * w / z for w in weights]


def _tokenize_corpus(corpus: ParallelCorpus) -> list[tuple[list[str], list[str]]]:
    sentences = []
    for idx, (tgt, eng) in enumerate(corpus):
        f_words = tgt.split()
        e_words = eng.split()
        if not f_words or not e_words:
            raise DataError(
                f"pair {idx} ({tgt!r} ||| {eng!r}): empty token sequence after whitespace split"
            )
        if len(f_words) > MAX_SENTENCE_TOKENS or len(e_words) > MAX_SENTENCE_TOKENS:
            raise DataError(
                f"pair {idx}: sentence exceeds {MAX_SENTENCE_TOKENS} tokens; refusing to truncate"
            )
        sentences.append((f_words, e_words))
    return sentences


def train(corpus: ParallelCorpus, iters: int = 5, opts: AlignerOptions | None = None) -> AlignmentModel:
    """Run EM over a parallel corpus and return the fitted model.

    Each iteration records the observed-data log-likelihood under the
    parameters entering it and asserts that the EM objective (likelihood
    plus the smoothing prior term) never decreases.
    """
    if opts is None:
        opts = AlignerOptions(iterations=iters)
    elif iters != opts.iterations:
        opts = AlignerOptions(
            iterations=iters,
            null_prob=opts.null_prob,
            tension=opts.tension,
            optimize_tension=opts.optimize_tension,
            smoothing_alpha=opts.smoothing_alpha,
        )
    if len(corpus) == 0:
        raise DataError("train: empty corpus")
    sentences = _tokenize_corpus(corpus)

    english_vocab: dict[str, None] = {}
    for _, e_words in sentences:
        for e in e_words:
            english_vocab.setdefault(e)
    v_e = len(english_vocab)

    # Uniform initialization over co-occurring pairs; the null word
    # co-occurs with every English token.
    t_table: dict[str, dict[str, float]] = {NULL_WORD: {}}
    for f_words, e_words in sentences:
        for e in e_words:
            t_table[NULL_WORD].setdefault(e, 1.0 / v_e)
            for f in f_words:
                t_table.setdefault(f, {}).setdefault(e, 1.0 / v_e)

    tension = opts.tension
    p0 = opts.null_prob
    alpha = opts.smoothing_alpha
    log_likelihoods: list[float] = []
    penalized: list[float] = []

    def prior_term(table: dict[str, dict[str, float]]) -> float:
        if alpha == 0.0:
            return 0.0
        return alpha * math.fsum(math.log(p) for row in table.values() for p in row.values())

    for iteration in range(opts.iterations):
        counts: dict[str, dict[str, float]] = {}
        emp_feat = 0.0
        # Non-null posterior mass per (n, m, j): the exact coefficient of
        # log Z_lambda(j, m, n) in the tension part of the EM objective.
        z_weights: dict[tuple[int, int], list[float]] = {}
        ll = 0.0

        for f_words, e_words in sentences:
            n, m = len(f_words), len(e_words)
            weights = z_weights.setdefault((n, m), [0.0] * m)
            for j, e in enumerate(e_words, start=1):
                delta = _distortion_row(j, m, n, tension, p0)
                scores = [delta[0] * t_table[NULL_WORD].get(e, 0.0)]
                for i, f in enumerate(f_words, start=1):
                    scores.append(delta[i] * t_table[f].get(e, 0.0))
                total = math.fsum(scores)
                if total <= 0.0:
                    raise DataError(f"zero-probability token {e!r}; corpus/model mismatch")
                ll += math.log(total)
                null_post = scores[0] / total
                weights[j - 1] += 1.0 - null_post
                counts.setdefault(NULL_WORD, {})
                counts[NULL_WORD][e] = counts[NULL_WORD].get(e, 0.0) + null_post
                for i, f in enumerate(f_words, start=1):
                    post = scores[i] / total
                    row = counts.setdefault(f, {})
                    row[e] = row.get(e, 0.0) + post
                    emp_feat += post * _diag_feature(i, j, m, n)

        # EM's guarantee covers the smoothing-penalized objective; the raw
        # log-likelihood coincides with it at alpha = 0 and tracks it
        # closely otherwise.
        objective = ll + prior_term(t_table)
        if penalized and objective < penalized[-1] - 1e-9 * max(1.0, abs(penalized[-1])):
            raise RuntimeError(
                f"EM objective decreased at iteration {iteration}: "
                f"{penalized[-1]} -> {objective}"
            )
        log_likelihoods.append(ll)
        penalized.append(objective)

        # M-step: normalize rows with additive smoothing over observed support.
        new_table: dict[str, dict[str, float]] = {}
        for f, row in counts.items():
            total = math.fsum(row.values()) + alpha * len(row)
            new_table[f] = {e: (c + alpha) / total for e, c in row.items()}
        t_table = new_table

        if opts.optimize_tension:
            tension = _optimize_tension(tension, emp_feat, z_weights)

    return AlignmentModel(
        t_table=t_table,
        tension=tension,
        null_prob=p0,
        smoothing_alpha=alpha,
        english_vocab_size=v_e,
        log_likelihoods=log_likelihoods,
        penalized_log_likelihoods=penalized,
    )


def _tension_objective(lam: float, emp_feat: float, z_weights: dict[tuple[int, int], list[float]]) -> float:
    z_total = 0.0
    for (n, m), weights in z_weights.items():
        z_total += math.fsum(
            w * _log_z(j, m, n, lam) for j, w in enumerate(weights, start=1) if w > 0.0
        )
    return lam * emp_feat - z_total


def _optimize_tension(current: float, emp_feat: float, z_weights: dict[tuple[int, int], list[float]]) -> float:
    """8-step golden-section search on the concave tension objective.

    The current value stays a candidate so the M-step can never lower the
    expected complete-data objective (generalized-EM guarantee).
    """

    def g(lam: float) -> float:
        return _tension_objective(lam, emp_feat, z_weights)

    lo, hi = MIN_TENSION, MAX_TENSION
    x1 = hi - _GOLDEN * (hi - lo)
    x2 = lo + _GOLDEN * (hi - lo)
    g1, g2 = g(x1), g(x2)
    for _ in range(8):
        if g1 >= g2:
            hi, x2, g2 = x2, x1, g1
            x1 = hi - _GOLDEN * (hi - lo)
            g1 = g(x1)
        else:
            lo, x1, g1 = x1, x2, g2
            x2 = lo + _GOLDEN * (hi - lo)
            g2 = g(x2)
    best = (x1 + x2) / 2.0
    return best if g(best) > g(current) else current


def link_posteriors(model: AlignmentModel, pair: tuple[str, str]) -> list[list[float]]:
    """Posterior P(a_j = i | pair) as a matrix of shape m x (n + 1).

    Row j (English position, 0-based) holds the distribution over i = 0..n
    where column 0 is the null word. Because alignments factorize over
    positions these are exact.
    """
    f_words = pair[0].split()
    e_words = pair[1].split()
    if not f_words or not e_words:
        raise DataError("link_posteriors: empty sentence after whitespace split")
    n, m = len(f_words), len(e_words)
    out = []
    for j, e in enumerate(e_words, start=1):
        delta = _distortion_row(j, m, n, model.tension, model.null_prob)
        scores = [delta[0] * model.translation_prob(NULL_WORD, e)]
        for i, f in enumerate(f_words, start=1):
            scores.append(delta[i] * model.translation_prob(f, e))
        total = math.fsum(scores)
        if total <= 0.0:
            # Fully out-of-vocabulary position: fall back to the distortion
            # prior itself.
            out.append(delta[:])
        else:
            out.append([s / total for s in scores])
    return out


def log_likelihood(model: AlignmentModel, corpus: ParallelCorpus) -> float:
    """Observed-data log-likelihood of a corpus under the model."""
    total = 0.0
    for f_words, e_words in _tokenize_corpus(corpus):
        n, m = len(f_words), len(e_words)
        for j, e in enumerate(e_words, start=1):
            delta = _distortion_row(j, m, n, model.tension, model.null_prob)
            scores = [delta[0] * model.translation_prob(NULL_WORD, e)]
            for i, f in enumerate(f_words, start=1):
                scores.append(delta[i] * model.translation_prob(f, e))
            s = math.fsum(scores)
            if s <= 0.0:
                raise DataError(f"token {e!r} has zero probability under the model")
            total += math.log(s)
    return total


def viterbi_align(model: AlignmentModel, pair: tuple[str, str]) -> SentenceAlignment:
    """Best link per English position; null decisions are omitted.

    For each English position j the argmax over source positions i
    (including null) of the distortion times the translation probability,
    with uniform fallback for out-of-vocabulary words. Ties resolve to the
    lowest i, so decoding is deterministic.
    """
    f_words = pair[0].split()
    e_words = pair[1].split()
    if not f_words or not e_words:
        raise DataError("viterbi_align: empty sentence after whitespace split")
    if len(f_words) > MAX_SENTENCE_TOKENS or len(e_words) > MAX_SENTENCE_TOKENS:
        raise DataError(f"viterbi_align: sentence exceeds {MAX_SENTENCE_TOKENS} tokens")
    n, m = len(f_words), len(e_words)
    links = set()
    for j, e in enumerate(e_words, start=1):
        delta = _distortion_row(j, m, n, model.tension, model.null_prob)
        best_i, best_score = 0, delta[0] * model.translation_prob(NULL_WORD, e)
        for i, f in enumerate(f_words, start=1):
            score = delta[i] * model.translation_prob(f, e)
            if score > best_score:
                best_i, best_score = i, score
        if best_i > 0:
            links.add((best_i - 1, j - 1))
    return SentenceAlignment(links=frozenset(links))


def pharaoh_format(alignment: SentenceAlignment) -> str:
    """Space-separated ``i-j`` pairs sorted by target (English) index."""
    return " ".join(f"{i}-{j}" for i, j in alignment.sorted_links())


def extract_dictionary(model: AlignmentModel, corpus: ParallelCorpus) -> Dictionary:
    """Pick the argmax English word per target word type in the corpus.

    Target words without a usable translation row (e.g. unseen by the
    model, or evidence only under the null word) are excluded from the
    entries but counted in the coverage denominator. Probability ties break
    to the lexicographically smallest English word.
    """
    if not model.t_table or set(model.t_table) <= {NULL_WORD}:
        raise DataError("extract_dictionary: model has no translation rows")
    vocab: dict[str, None] = {}
    for tgt, _ in corpus:
        for w in tgt.split():
            vocab.setdefault(w)
    if not vocab:
        raise DataError("extract_dictionary: corpus has no target-side tokens")
    entries: dict[str, tuple[str, float]] = {}
    for word in vocab:
        row = model.t_table.get(word)
        if not row:
            continue
        best_word, best_prob = min(row.items(), key=lambda kv: (-kv[1], kv[0]))
        entries[word] = (best_word, best_prob)
    return Dictionary(entries=entries, coverage=len(entries) / len(vocab))

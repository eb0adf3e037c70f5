"""Evaluation harness: drive a backend over a dataset split with a chosen
prompt variant, parse predictions, and score accuracy.

Retrieval (for alignment pairs and demonstrations) always draws from the
training split, never from the split under evaluation; every run asserts
the pool and the evaluated ids are disjoint. Requests may run concurrently
up to a bound, but records are assembled in dataset order so reports are
deterministic for a deterministic backend (latency fields aside).

Examples that still fail at the transport level after the backend's
retries are excluded from the accuracy denominator and counted; a run with
more than 1% such failures is flagged non-comparable. Unparseable model
output is scored as incorrect (never retried) and counted separately.
"""

from __future__ import annotations

import hashlib
import re
import time
import zlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Protocol, runtime_checkable

from . import promptkit, retriever
from .corpus import Dataset, LabeledExample, MultiChoiceExample, TaskLabelSet
from .errors import BackendError, DataError, LeakageError
from .promptkit import CHOICE_LETTERS, PromptSpec, RenderedPrompt
from .tokmetrics import ScoreResult

DEFAULT_MAX_TOKENS = {"classification": 16, "multichoice": 4}
MAX_FAILURE_RATE = 0.01


@runtime_checkable
class Backend(Protocol):
    """Full backend contract: greedy generation plus teacher-forced scoring."""

    @property
    def identity(self) -> str: ...

    def generate(self, prompt: str, max_tokens: int, greedy: bool = True) -> str: ...

    def score(self, text: str) -> ScoreResult: ...


@dataclass(frozen=True)
class RetrievalConfig:
    mode: str = "bm25"  # "bm25" | "random"
    seed: int = 0

    def __post_init__(self):
        if self.mode not in ("bm25", "random"):
            raise DataError(f"unknown retrieval mode {self.mode!r}")


@dataclass(frozen=True)
class EvalRecord:
    example_id: str
    prompt_sha256: str
    raw_output: str
    parsed_label: str | None
    gold_label: str
    correct: bool
    latency_ms: int
    failed: bool = False

    def __post_init__(self):
        if self.correct and self.parsed_label != self.gold_label:
            raise DataError("record marked correct but parsed label differs from gold")

    def to_dict(self) -> dict:
        return {
            "example_id": self.example_id,
            "prompt_sha256": self.prompt_sha256,
            "raw_output": self.raw_output,
            "parsed_label": self.parsed_label,
            "gold_label": self.gold_label,
            "correct": self.correct,
            "failed": self.failed,
            "latency_ms": self.latency_ms,
        }


@dataclass
class EvalReport:
    accuracy: float
    n: int
    correct_count: int
    majority_vote_baseline: float
    confusion: dict[str, dict[str, int]]
    parse_failure_count: int
    transport_failure_count: int
    flagged: bool
    backend_identity: str
    config: dict
    records: list[EvalRecord] = field(default_factory=list)

    def to_dict(self, include_records: bool = False) -> dict:
        d = {
            "accuracy": self.accuracy,
            "n": self.n,
            "correct_count": self.correct_count,
            "majority_vote_baseline": self.majority_vote_baseline,
            "confusion": self.confusion,
            "parse_failure_count": self.parse_failure_count,
            "transport_failure_count": self.transport_failure_count,
            "flagged": self.flagged,
            "backend": self.backend_identity,
            "config": self.config,
        }
        if include_records:
            d["records"] = [r.to_dict() for r in self.records]
        return d


def parse_label(raw_output: str, labels: TaskLabelSet) -> str | None:
    """First label (by output position) occurring in the normalized output.

    Ties at the same position go to the longest label, so
    "science/technology" beats "science" when both are labels.
    """
    haystack = raw_output.lower()
    best: tuple[int, int, str] | None = None
    for label in labels:
        idx = haystack.find(label)
        if idx < 0:
            continue
        key = (idx, -len(label), label)
        if best is None or key < best:
            best = key
    return best[2] if best else None


def parse_choice(raw_output: str, n_choices: int = 4) -> int | None:
    """Index of the first standalone choice letter, case-insensitive."""
    if not 1 <= n_choices <= len(CHOICE_LETTERS):
        raise DataError(f"n_choices must be in [1, {len(CHOICE_LETTERS)}]")
    letters = CHOICE_LETTERS[:n_choices]
    match = re.search(rf"\b([{letters}{letters.lower()}])\b", raw_output)
    if not match:
        return None
    return letters.index(match.group(1).upper())


def _prompt_hash(prompt: RenderedPrompt) -> str:
    return hashlib.sha256(prompt.text.encode("utf-8")).hexdigest()


def _example_seed(base_seed: int, example_id: str) -> int:
    # Stable across runs and platforms, unlike hash().
    return base_seed ^ zlib.crc32(example_id.encode("utf-8"))


class _Retriever:
    """Per-run retrieval state over the training pool."""

    def __init__(self, pool_examples: list, spec: PromptSpec, config: RetrievalConfig):
        self.config = config
        self.spec = spec
        if spec.task == "multichoice":
            candidates = [
                ex for ex in pool_examples
                if isinstance(ex, MultiChoiceExample) and ex.passage_english
            ]
            texts = [ex.passage_target for ex in candidates]
        elif spec.variant in ("sentence_alignment", "fewshot_aligned"):
            candidates = [ex for ex in pool_examples if getattr(ex, "text_english", None)]
            texts = [ex.text_target for ex in candidates]
        else:
            candidates = list(pool_examples)
            texts = [ex.text_target for ex in candidates]
        self.candidates = candidates
        self._index = None
        if spec.k >= 1 or spec.task == "multichoice":
            if not candidates:
                raise DataError(
                    f"variant {spec.variant!r} needs retrievable training examples "
                    "(with English sides where alignment is involved)"
                )
            if config.mode == "bm25":
                self._index = retriever.build_index(texts)

    def select(self, query_text: str, example_id: str, k: int) -> list:
        if k < 1:
            return []
        k = min(k, len(self.candidates))
        if self.config.mode == "bm25":
            ranked = retriever.query(self._index, query_text, top_k=k)
            return [self.candidates[doc_id] for doc_id, _ in ranked]
        ids = retriever.sample_random(
            self.candidates, k, _example_seed(self.config.seed, example_id)
        )
        return [self.candidates[i] for i in ids]


def render_for_example(
    spec: PromptSpec,
    example,
    pool_retriever: _Retriever | None = None,
    dictionary=None,
) -> RenderedPrompt:
    """Render the prompt for one example under a spec, retrieving as needed."""
    if spec.task == "multichoice":
        alignment = None
        demos = None
        if spec.variant == "sentence_alignment":
            chosen = pool_retriever.select(example.passage_target, example.id, 1)
            ex = chosen[0]
            alignment = (ex.passage_target, ex.passage_english)
        elif spec.variant in ("fewshot_plain", "fewshot_aligned"):
            demos = pool_retriever.select(example.passage_target, example.id, spec.k)
        return promptkit.render_multichoice(spec, example, alignment, demos)

    text = example.text_target
    if spec.variant == "baseline_zero":
        return promptkit.render_baseline(spec, text, input_id=example.id)
    if spec.variant == "word_alignment":
        if dictionary is None:
            raise DataError("word_alignment requires a dictionary")
        return promptkit.render_word_alignment(spec, text, dictionary, input_id=example.id)
    if spec.variant == "word_translation":
        if dictionary is None:
            raise DataError("word_translation requires a dictionary")
        return promptkit.render_word_translation(spec, text, dictionary, input_id=example.id)
    if spec.variant == "sentence_alignment":
        chosen = pool_retriever.select(text, example.id, spec.k)
        pairs = [(ex.text_target, ex.text_english) for ex in chosen]
        return promptkit.render_sentence_alignment(spec, text, pairs, input_id=example.id)
    if spec.variant in ("fewshot_plain", "fewshot_aligned"):
        demos = pool_retriever.select(text, example.id, spec.k)
        return promptkit.render_fewshot(
            spec, text, demos, with_alignment=spec.variant == "fewshot_aligned", input_id=example.id
        )
    raise DataError(f"unknown variant {spec.variant!r}")


def _gold_label(example) -> str:
    if isinstance(example, MultiChoiceExample):
        return CHOICE_LETTERS[example.answer_index].lower()
    return example.label


def _parse_output(raw: str, spec: PromptSpec) -> str | None:
    if spec.task == "multichoice":
        idx = parse_choice(raw)
        return CHOICE_LETTERS[idx].lower() if idx is not None else None
    return parse_label(raw, spec.label_set)


def run_eval(
    dataset: Dataset,
    spec: PromptSpec,
    backend: Backend,
    retrieval: RetrievalConfig = RetrievalConfig(),
    dictionary=None,
    split: str = "test",
    pool: list | None = None,
    max_tokens: int | None = None,
    concurrency: int = 4,
) -> EvalReport:
    """Evaluate one prompt variant over a dataset split."""
    eval_examples = dataset.split(split)
    if not eval_examples:
        raise DataError(f"split {split!r} is empty")
    pool_examples = list(pool) if pool is not None else dataset.split("train")

    pool_ids = {ex.id for ex in pool_examples}
    eval_ids = {ex.id for ex in eval_examples}
    overlap = pool_ids & eval_ids
    if overlap:
        raise LeakageError(
            f"retrieval pool intersects the {split!r} split on {len(overlap)} ids "
            f"(e.g. {sorted(overlap)[:3]}); refusing to evaluate"
        )

    needs_retrieval = spec.k >= 1 or (
        spec.task == "multichoice" and spec.variant == "sentence_alignment"
    )
    pool_retriever = _Retriever(pool_examples, spec, retrieval) if needs_retrieval else None
    if max_tokens is None:
        max_tokens = DEFAULT_MAX_TOKENS[spec.task]

    def evaluate_one(example) -> EvalRecord:
        prompt = render_for_example(spec, example, pool_retriever, dictionary)
        gold = _gold_label(example)
        start = time.monotonic()
        try:
            raw = backend.generate(prompt.text, max_tokens=max_tokens, greedy=True)
        except BackendError:
            return EvalRecord(
                example_id=example.id,
                prompt_sha256=_prompt_hash(prompt),
                raw_output="",
                parsed_label=None,
                gold_label=gold,
                correct=False,
                latency_ms=int((time.monotonic() - start) * 1000),
                failed=True,
            )
        parsed = _parse_output(raw, spec)
        return EvalRecord(
            example_id=example.id,
            prompt_sha256=_prompt_hash(prompt),
            raw_output=raw,
            parsed_label=parsed,
            gold_label=gold,
            correct=parsed is not None and parsed == gold,
            latency_ms=int((time.monotonic() - start) * 1000),
        )

    if concurrency > 1:
        with ThreadPoolExecutor(max_workers=concurrency) as executor:
            records = list(executor.map(evaluate_one, eval_examples))
    else:
        records = [evaluate_one(ex) for ex in eval_examples]

    scored = [r for r in records if not r.failed]
    transport_failures = len(records) - len(scored)
    if not scored:
        raise BackendError(f"all {len(records)} examples failed at the transport level")
    correct_count = sum(1 for r in scored if r.correct)
    parse_failures = sum(1 for r in scored if r.parsed_label is None)

    gold_counts: dict[str, int] = {}
    for r in scored:
        gold_counts[r.gold_label] = gold_counts.get(r.gold_label, 0) + 1
    majority = max(gold_counts.values()) / len(scored)

    confusion: dict[str, dict[str, int]] = {}
    for r in scored:
        row = confusion.setdefault(r.gold_label, {})
        predicted = r.parsed_label if r.parsed_label is not None else ""
        row[predicted] = row.get(predicted, 0) + 1

    config = {
        "variant": spec.variant,
        "task": spec.task,
        "language_name": spec.language_name,
        "k": spec.k,
        "description_position": spec.description_position,
        "labels": list(spec.label_set) if spec.task == "classification" else list(CHOICE_LETTERS.lower()),
        "retrieval_mode": retrieval.mode,
        "seed": retrieval.seed,
        "split": split,
        "max_tokens": max_tokens,
    }
    return EvalReport(
        accuracy=correct_count / len(scored),
        n=len(scored),
        correct_count=correct_count,
        majority_vote_baseline=majority,
        confusion=confusion,
        parse_failure_count=parse_failures,
        transport_failure_count=transport_failures,
        flagged=transport_failures / len(records) > MAX_FAILURE_RATE,
        backend_identity=backend.identity,
        config=config,
        records=records,
    )


def select_description_position(
    dataset: Dataset,
    spec: PromptSpec,
    backend: Backend,
    retrieval: RetrievalConfig = RetrievalConfig(),
    dictionary=None,
    concurrency: int = 4,
) -> str:
    """Pick the task-description position by dev-set accuracy; ties keep it first."""
    if spec.k < 1:
        raise DataError("description position only matters for k >= 1 variants")
    if not dataset.split("dev"):
        raise DataError("dev split is empty; cannot select a description position")
    accuracies = {}
    for position in promptkit.POSITIONS:
        candidate = replace(spec, description_position=position)
        report = run_eval(
            dataset, candidate, backend,
            retrieval=retrieval, dictionary=dictionary, split="dev", concurrency=concurrency,
        )
        accuracies[position] = report.accuracy
    if accuracies["after_examples"] > accuracies["before_examples"]:
        return "after_examples"
    return "before_examples"

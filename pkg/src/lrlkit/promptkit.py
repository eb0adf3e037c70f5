"""Prompt construction for every in-context-learning variant, byte-exact.

Six variants over two tasks (topic classification and passage-based
multiple choice): a plain zero-shot baseline, word-level alignment (per-word
English glosses appended after the input), word-level translation (the
input replaced by its concatenated glosses), sentence-level alignment
(unlabeled parallel pairs placed before the task), and labeled few-shot
demonstrations with or without English alignment. Few-shot prompts support
both task-description positions: before the demonstrations or after them,
which measurably changes accuracy on some backends.

Every rendering carries provenance: an ordered list of segments whose
texts concatenate exactly to the prompt, each tagged with a kind and the
id of its source (template, example, pair, or token). Golden fixtures
under the test suite define the canonical bytes of each variant.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .aligner import Dictionary
from .corpus import (
    DEFAULT_LABEL_SET,
    LabeledExample,
    MultiChoiceExample,
    TaskLabelSet,
)
from .errors import DataError

VARIANTS = (
    "baseline_zero",
    "word_alignment",
    "word_translation",
    "sentence_alignment",
    "fewshot_plain",
    "fewshot_aligned",
)
ZERO_K_VARIANTS = ("baseline_zero", "word_alignment", "word_translation")
POSITIONS = ("before_examples", "after_examples")
TASKS = ("classification", "multichoice")

CHOICE_LETTERS = "ABCD"

_NUMBER_WORDS = {
    1: "one", 2: "two", 3: "three", 4: "four", 5: "five",
    6: "six", 7: "seven", 8: "eight", 9: "nine", 10: "ten",
}


@dataclass(frozen=True)
class PromptSegment:
    kind: str
    source_id: str
    text: str


@dataclass(frozen=True)
class RenderedPrompt:
    text: str
    provenance: tuple[PromptSegment, ...]

    def __post_init__(self):
        joined = "".join(seg.text for seg in self.provenance)
        if joined != self.text:
            raise DataError("provenance segments do not concatenate to the prompt text")

    @classmethod
    def from_segments(cls, segments: list[PromptSegment]) -> "RenderedPrompt":
        return cls(text="".join(s.text for s in segments), provenance=tuple(segments))


@dataclass(frozen=True)
class PromptSpec:
    """Declarative description of one prompt variant."""

    variant: str
    language_name: str
    task: str = "classification"
    k: int = 0
    description_position: str = "before_examples"
    label_set: TaskLabelSet = field(default=DEFAULT_LABEL_SET)

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise DataError(f"unknown variant {self.variant!r}")
        if self.task not in TASKS:
            raise DataError(f"unknown task {self.task!r}")
        if self.description_position not in POSITIONS:
            raise DataError(f"unknown description_position {self.description_position!r}")
        if self.variant in ZERO_K_VARIANTS:
            if self.k != 0:
                raise DataError(f"variant {self.variant} takes no examples (k must be 0)")
        else:
            if self.k < 1:
                raise DataError(f"variant {self.variant} requires k >= 1")
        if self.variant == "sentence_alignment" and self.k > 5:
            raise DataError("sentence_alignment supports at most 5 pairs (k <= 5)")
        if not self.language_name:
            raise DataError("language_name must be non-empty")


def _number_word(n: int) -> str:
    return _NUMBER_WORDS.get(n, str(n))


def _options_enumeration(label_set: TaskLabelSet) -> str:
    quoted = [f'"{label}"' for label in label_set]
    if len(quoted) == 1:
        return quoted[0]
    if len(quoted) == 2:
        return f"{quoted[0]} and {quoted[1]}"
    return ", ".join(quoted[:-1]) + f", and {quoted[-1]}"


def classification_task_header(language_name: str, label_set: TaskLabelSet) -> str:
    return (
        f"What is the topic discussed in the following {language_name} text? "
        f"There are {_number_word(len(label_set))} options: {_options_enumeration(label_set)}. "
        "Now complete the following example without explanations."
    )


def _require_classification(spec: PromptSpec, variant: str) -> None:
    if spec.variant != variant:
        raise DataError(f"spec variant is {spec.variant!r}, expected {variant!r}")
    if spec.task != "classification":
        raise DataError(f"{variant} renders the classification task only")


def _header_segment(spec: PromptSpec, trailing: str) -> PromptSegment:
    return PromptSegment(
        kind="task_description",
        source_id="template:classification",
        text=classification_task_header(spec.language_name, spec.label_set) + trailing,
    )


def _input_segments(input_target: str, input_id: str) -> list[PromptSegment]:
    return [
        PromptSegment("input", input_id, f"Text: {input_target}."),
        PromptSegment("answer_anchor", "template:classification", " Topic option is:"),
    ]


def render_baseline(spec: PromptSpec, input_target: str, input_id: str = "input") -> RenderedPrompt:
    """Task description plus the raw target-language input."""
    _require_classification(spec, "baseline_zero")
    if not input_target:
        raise DataError("render_baseline: empty input")
    segments = [_header_segment(spec, " ")]
    segments += _input_segments(input_target, input_id)
    return RenderedPrompt.from_segments(segments)


def render_word_alignment(
    spec: PromptSpec,
    input_target: str,
    dictionary: Dictionary,
    input_id: str = "input",
) -> RenderedPrompt:
    """Input followed by one gloss clause per whitespace token, in order.

    Tokens missing from the dictionary contribute no clause; the omission
    is recorded as an empty audit segment rather than glossed as unknown.
    """
    _require_classification(spec, "word_alignment")
    if not input_target:
        raise DataError("render_word_alignment: empty input")
    if not dictionary.entries:
        raise DataError("render_word_alignment: empty dictionary")
    segments = [
        _header_segment(spec, " "),
        PromptSegment(
            "word_instruction",
            "template:word_alignment",
            "Please use the provided English translation of each word to help you "
            f"understand the {spec.language_name} text. ",
        ),
        PromptSegment("input", input_id, f"Text: {input_target}."),
    ]
    tokens = input_target.split()
    glossed = [(tok, dictionary.lookup(tok)) for tok in tokens]
    clauses = [(tok, eng) for tok, eng in glossed if eng is not None]
    clause_segments: list[PromptSegment] = []
    clause_idx = 0
    for tok, eng in glossed:
        if eng is None:
            clause_segments.append(PromptSegment("oov_omitted", tok, ""))
            continue
        clause_idx += 1
        tail = "." if clause_idx == len(clauses) else "; "
        clause_segments.append(
            PromptSegment("word_clause", tok, f"{tok} means {eng} in English{tail}")
        )
    if clauses:
        segments.append(PromptSegment("separator", "template:word_alignment", " "))
    segments += clause_segments
    segments.append(PromptSegment("answer_anchor", "template:classification", " Topic option is:"))
    return RenderedPrompt.from_segments(segments)


def render_word_translation(
    spec: PromptSpec,
    input_target: str,
    dictionary: Dictionary,
    input_id: str = "input",
) -> RenderedPrompt:
    """Input replaced by its per-word English glosses, in target order."""
    _require_classification(spec, "word_translation")
    if not input_target:
        raise DataError("render_word_translation: empty input")
    if not dictionary.entries:
        raise DataError("render_word_translation: empty dictionary")
    tokens = input_target.split()
    translated = [dictionary.lookup(tok) for tok in tokens]
    kept = [t for t in translated if t is not None]
    if not kept:
        raise DataError("render_word_translation: every input token is out of vocabulary")
    segments = [
        _header_segment(spec, " "),
        PromptSegment("translated_input", input_id, f"Text: {' '.join(kept)}."),
        PromptSegment("answer_anchor", "template:classification", " Topic option is:"),
    ]
    return RenderedPrompt.from_segments(segments)


def _pair_segment(language_name: str, pair: tuple[str, str], idx: int) -> PromptSegment:
    tgt, eng = pair
    return PromptSegment(
        "alignment_pair",
        f"pair:{idx}",
        f"{language_name}: {tgt}; English: {eng}\n",
    )


def render_sentence_alignment(
    spec: PromptSpec,
    input_target: str,
    pairs: list[tuple[str, str]],
    input_id: str = "input",
) -> RenderedPrompt:
    """Unlabeled parallel pairs placed before the task description."""
    _require_classification(spec, "sentence_alignment")
    if not input_target:
        raise DataError("render_sentence_alignment: empty input")
    if not 1 <= len(pairs) <= 5:
        raise DataError(f"render_sentence_alignment: need 1..5 pairs, got {len(pairs)}")
    lang = spec.language_name
    segments = [
        PromptSegment(
            "alignment_instruction",
            "template:sentence_alignment",
            f"Use the following pairs of {lang} texts and their English translations "
            f"to help you understand {lang}.\n",
        )
    ]
    segments += [_pair_segment(lang, pair, i) for i, pair in enumerate(pairs)]
    segments.append(
        PromptSegment(
            "alignment_bridge",
            "template:sentence_alignment",
            "Now based on your understanding, answer the question below without explanation.\n",
        )
    )
    segments.append(_header_segment(spec, " "))
    segments += _input_segments(input_target, input_id)
    return RenderedPrompt.from_segments(segments)


def _demo_segment(demo: LabeledExample, with_alignment: bool) -> PromptSegment:
    if not demo.label:
        raise DataError(f"demonstration {demo.id!r} has no label")
    if with_alignment:
        if not demo.text_english:
            raise DataError(f"demonstration {demo.id!r} lacks an English side for alignment")
        body = f"Text: {demo.text_target} means {demo.text_english} in English. Topic option is: {demo.label}.\n"
    else:
        body = f"Text: {demo.text_target}. Topic option is: {demo.label}.\n"
    return PromptSegment("demonstration", demo.id, body)


def render_fewshot(
    spec: PromptSpec,
    input_target: str,
    demos: list[LabeledExample],
    with_alignment: bool,
    input_id: str = "input",
) -> RenderedPrompt:
    """Labeled demonstrations, optionally glossed with their English sides.

    The description position toggles only the order of the task-description
    segment relative to the demonstration block; segment contents are
    identical either way.
    """
    expected = "fewshot_aligned" if with_alignment else "fewshot_plain"
    _require_classification(spec, expected)
    if not input_target:
        raise DataError("render_fewshot: empty input")
    if not demos:
        raise DataError("render_fewshot: need at least one demonstration")
    demo_segments = [_demo_segment(d, with_alignment) for d in demos]
    header = _header_segment(spec, "\n")
    if spec.description_position == "before_examples":
        segments = [header, *demo_segments]
    else:
        segments = [*demo_segments, header]
    segments += _input_segments(input_target, input_id)
    return RenderedPrompt.from_segments(segments)


def multichoice_task_header() -> str:
    return (
        "Refer to the following passage and answer the question. "
        "Respond with only the letter of the correct answer."
    )


def _multichoice_block(
    passage: str, question: str, choices: tuple[str, ...], source_id: str, answer: str | None
) -> PromptSegment:
    lines = [f"Passage: {passage}", f"Question: {question}"]
    lines += [f"{CHOICE_LETTERS[i]}. {choice}" for i, choice in enumerate(choices)]
    lines.append("Answer:" if answer is None else f"Answer: {answer}")
    kind = "item" if answer is None else "demonstration"
    tail = "" if answer is None else "\n"
    return PromptSegment(kind, source_id, "\n".join(lines) + tail)


def render_multichoice(
    spec: PromptSpec,
    example: MultiChoiceExample,
    passage_alignment: tuple[str, str] | None = None,
    demos: list[MultiChoiceExample] | None = None,
) -> RenderedPrompt:
    """Passage, question, and lettered choices, ending at the answer anchor.

    ``passage_alignment`` is a (target passage, English passage) pair —
    typically the closest training passage and its translation — rendered
    before the task. Demonstrations, when given, show their answer letter.
    """
    if spec.task != "multichoice":
        raise DataError("render_multichoice requires a multichoice spec")
    if len(example.choices) != 4:
        raise DataError(f"example {example.id!r}: expected 4 choices")
    lang = spec.language_name
    segments: list[PromptSegment] = []
    if passage_alignment is not None:
        tgt_passage, eng_passage = passage_alignment
        if not tgt_passage or not eng_passage:
            raise DataError("passage_alignment sides must be non-empty")
        segments.append(
            PromptSegment(
                "alignment_instruction",
                "template:passage_alignment",
                f"Use the following pair of {lang} text and its English translation "
                f"to help you understand {lang}.\n",
            )
        )
        segments.append(
            PromptSegment(
                "alignment_pair",
                "pair:0",
                f"{lang}: {tgt_passage}; English: {eng_passage}\n",
            )
        )
        segments.append(
            PromptSegment(
                "alignment_bridge",
                "template:passage_alignment",
                "Now based on your understanding, answer the question below without explanation.\n",
            )
        )
    header = PromptSegment("task_description", "template:multichoice", multichoice_task_header() + "\n")
    demo_segments = []
    for demo in demos or []:
        if len(demo.choices) != 4:
            raise DataError(f"demonstration {demo.id!r}: expected 4 choices")
        demo_segments.append(
            _multichoice_block(
                demo.passage_target,
                demo.question,
                demo.choices,
                demo.id,
                CHOICE_LETTERS[demo.answer_index],
            )
        )
    if spec.description_position == "before_examples" or not demo_segments:
        segments += [header, *demo_segments]
    else:
        segments += [*demo_segments, header]
    segments.append(
        _multichoice_block(example.passage_target, example.question, example.choices, example.id, None)
    )
    return RenderedPrompt.from_segments(segments)

"""Canonical render calls behind the golden prompt fixtures.

Shared by the fixture-regeneration script and the golden tests so both
always agree on what each fixture contains. Inputs are fixed NKo-script
strings; the dictionary and demonstrations are small hand-written stubs.
"""

from __future__ import annotations

from lrlkit.aligner import Dictionary
from lrlkit.corpus import LabeledExample, MultiChoiceExample, TaskLabelSet
from lrlkit.promptkit import (
    PromptSpec,
    RenderedPrompt,
    render_baseline,
    render_fewshot,
    render_multichoice,
    render_sentence_alignment,
    render_word_alignment,
    render_word_translation,
)

DICTIONARY = Dictionary(
    entries={
        "ߞߊ": ("dog", 0.9),
        "ߙߏ": ("runs", 0.8),
        "ߡߌ": ("water", 0.7),
        "ߛߊ": ("sun", 0.6),
    },
    coverage=0.8,
)

PAIRS = [
    ("ߛߊ ߕߎ ߞߐ", "the sun rises today"),
    ("ߡߌ ߘߐ ߢߌ", "the water is clear"),
    ("ߞߊ ߙߏ ߓߊ", "the dog runs fast"),
    ("ߕߎ ߛߊ ߡߌ", "morning light on water"),
    ("ߢߌ ߓߊ ߘߐ", "a calm day outside"),
]

def _demo(i, text, english, label):
    return LabeledExample(
        id=f"demo-{i}", text_target=text, text_english=english, label=label, split="train"
    )


DEMOS = [
    _demo(1, "ߞߊ ߙߏ ߞߐ ߓߊ", "the dog runs very fast", "sports"),
    _demo(2, "ߡߌ ߘߐ ߛߊ ߢߌ", "clear water under the sun", "geography"),
    _demo(3, "ߕߎ ߞߵߊ ߘߋ ߡߊ", "a new clinic opened here", "health"),
    _demo(4, "ߛߊ ߡߌ ߞߊ ߕߎ", "sunny weather for the match", "sports"),
    _demo(5, "ߢߌ ߘߐ ߞߵߊ ߛߊ", "the council voted at noon", "politics"),
]

MC_EXAMPLE = MultiChoiceExample(
    id="mc-q1",
    passage_target="ߔߊ ߛߊߖ ߘߐ ߞߐ ߡߌ ߕߎ ߢߌ ߓߊ",
    passage_english="The harbor town grew around its freshwater spring.",
    question="ߞߵߊ ߡߎ ߢߌ ߛߊ",
    choices=("ߡߌ ߘߐ", "ߞߊ ߙߏ", "ߛߊ ߕߎ", "ߢߌ ߓߊ"),
    answer_index=0,
    split="test",
)

MC_DEMO = MultiChoiceExample(
    id="mc-d1",
    passage_target="ߞߊ ߙߏ ߓߊ ߕߎ ߛߊ ߡߌ",
    passage_english="The race started at dawn by the river.",
    question="ߡߎ ߞߵߊ ߙߏ",
    choices=("ߕߎ ߛߊ", "ߓߊ ߘߐ", "ߞߊ ߡߌ", "ߘߐ ߢߌ"),
    answer_index=2,
    split="train",
)

MC_ALIGNMENT = (
    "ߛߊߖ ߘߐ ߡߌ ߕߎ ߞߐ ߢߌ",
    "The spring feeds the old town wells.",
)

INPUT = "ߞߊ ߙߏ ߡߌ"
INPUT_WITH_OOV = "ߞߊ ߖߖ ߙߏ"

CUSTOM_LABELS = TaskLabelSet(("positive", "negative", "neutral"))


def _spec(variant, k=0, position="before_examples", task="classification",
          language="Nko", label_set=None):
    kwargs = {}
    if label_set is not None:
        kwargs["label_set"] = label_set
    return PromptSpec(
        variant=variant, language_name=language, task=task, k=k,
        description_position=position, **kwargs,
    )


def golden_cases() -> list[tuple[str, RenderedPrompt]]:
    cases = [
        ("baseline_nko", render_baseline(_spec("baseline_zero"), INPUT)),
        ("baseline_santali", render_baseline(_spec("baseline_zero", language="Santali"), "ᱚᱞ ᱪᱤᱠᱤ")),
        (
            "baseline_custom_labels",
            render_baseline(_spec("baseline_zero", label_set=CUSTOM_LABELS), INPUT),
        ),
        ("word_alignment_full", render_word_alignment(_spec("word_alignment"), INPUT, DICTIONARY)),
        ("word_alignment_oov", render_word_alignment(_spec("word_alignment"), INPUT_WITH_OOV, DICTIONARY)),
        ("word_alignment_single", render_word_alignment(_spec("word_alignment"), "ߞߊ", DICTIONARY)),
        ("word_translation", render_word_translation(_spec("word_translation"), INPUT, DICTIONARY)),
        ("word_translation_single", render_word_translation(_spec("word_translation"), "ߞߊ", DICTIONARY)),
        ("sentence_alignment_k1", render_sentence_alignment(_spec("sentence_alignment", k=1), INPUT, PAIRS[:1])),
        ("sentence_alignment_k2", render_sentence_alignment(_spec("sentence_alignment", k=2), INPUT, PAIRS[:2])),
        ("sentence_alignment_k5", render_sentence_alignment(_spec("sentence_alignment", k=5), INPUT, PAIRS)),
        (
            "fewshot_plain_k1_before",
            render_fewshot(_spec("fewshot_plain", k=1), INPUT, DEMOS[:1], with_alignment=False),
        ),
        (
            "fewshot_plain_k1_after",
            render_fewshot(
                _spec("fewshot_plain", k=1, position="after_examples"), INPUT, DEMOS[:1], with_alignment=False
            ),
        ),
        (
            "fewshot_plain_k3_before",
            render_fewshot(_spec("fewshot_plain", k=3), INPUT, DEMOS[:3], with_alignment=False),
        ),
        (
            "fewshot_plain_k5_after",
            render_fewshot(
                _spec("fewshot_plain", k=5, position="after_examples"), INPUT, DEMOS, with_alignment=False
            ),
        ),
        (
            "fewshot_aligned_k1_before",
            render_fewshot(_spec("fewshot_aligned", k=1), INPUT, DEMOS[:1], with_alignment=True),
        ),
        (
            "fewshot_aligned_k3_before",
            render_fewshot(_spec("fewshot_aligned", k=3), INPUT, DEMOS[:3], with_alignment=True),
        ),
        (
            "fewshot_aligned_k1_after",
            render_fewshot(
                _spec("fewshot_aligned", k=1, position="after_examples"), INPUT, DEMOS[:1], with_alignment=True
            ),
        ),
        ("mc_baseline", render_multichoice(_spec("baseline_zero", task="multichoice"), MC_EXAMPLE)),
        (
            "mc_passage_alignment",
            render_multichoice(
                _spec("sentence_alignment", k=1, task="multichoice"), MC_EXAMPLE, passage_alignment=MC_ALIGNMENT
            ),
        ),
        (
            "mc_fewshot_k1_before",
            render_multichoice(_spec("fewshot_plain", k=1, task="multichoice"), MC_EXAMPLE, demos=[MC_DEMO]),
        ),
        (
            "mc_fewshot_k1_after",
            render_multichoice(
                _spec("fewshot_plain", k=1, position="after_examples", task="multichoice"),
                MC_EXAMPLE,
                demos=[MC_DEMO],
            ),
        ),
    ]
    return cases

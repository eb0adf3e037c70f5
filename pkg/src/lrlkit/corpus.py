"""Dataset ingestion: labeled classification data, multiple-choice data, and
parallel target/English corpora.

Canonical interchange format is JSON-lines; TSV with a header row is also
accepted. Files must be UTF-8 without BOM. Datasets are immutable after
load and keep file order, so two loads of the same file yield identical
sequences.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator, Sequence

from .errors import DataError

logger = logging.getLogger(__name__)

SPLITS = ("train", "dev", "test")

#: Default seven-way topic label set.
SIB_TOPICS = (
    "science/technology",
    "travel",
    "politics",
    "sports",
    "health",
    "entertainment",
    "geography",
)


def normalize_label(label: str) -> str:
    """Storage form used for all label comparisons: lowercase + trim."""
    return label.strip().lower()


@dataclass(frozen=True)
class TaskLabelSet:
    """Ordered set of task labels, stored in normalized form."""

    labels: tuple[str, ...]

    def __post_init__(self):
        normalized = tuple(normalize_label(l) for l in self.labels)
        if not normalized:
            raise DataError("label set must not be empty")
        if len(set(normalized)) != len(normalized):
            raise DataError("label set contains duplicates after normalization")
        object.__setattr__(self, "labels", normalized)

    def __contains__(self, label: str) -> bool:
        return normalize_label(label) in self.labels

    def __iter__(self) -> Iterator[str]:
        return iter(self.labels)

    def __len__(self) -> int:
        return len(self.labels)


DEFAULT_LABEL_SET = TaskLabelSet(SIB_TOPICS)


@dataclass(frozen=True)
class LabeledExample:
    id: str
    text_target: str
    label: str
    split: str
    text_english: str | None = None

    def __post_init__(self):
        if not self.text_target:
            raise DataError(f"example {self.id!r}: empty target text")
        if self.split not in SPLITS:
            raise DataError(f"example {self.id!r}: unknown split {self.split!r}")
        object.__setattr__(self, "label", normalize_label(self.label))


@dataclass(frozen=True)
class MultiChoiceExample:
    id: str
    passage_target: str
    question: str
    choices: tuple[str, ...]
    answer_index: int
    split: str
    passage_english: str | None = None

    def __post_init__(self):
        if len(self.choices) != 4:
            raise DataError(
                f"example {self.id!r}: expected exactly 4 choices, got {len(self.choices)}"
            )
        if not 0 <= self.answer_index <= 3:
            raise DataError(f"example {self.id!r}: answer_index out of range")
        if not self.passage_target:
            raise DataError(f"example {self.id!r}: empty passage")
        if self.split not in SPLITS:
            raise DataError(f"example {self.id!r}: unknown split {self.split!r}")
        object.__setattr__(self, "choices", tuple(self.choices))


@dataclass(frozen=True)
class ParallelCorpus:
    """Sentence-aligned (target, english) pairs for one language."""

    pairs: tuple[tuple[str, str], ...]
    language_code: str

    def __post_init__(self):
        for i, (tgt, eng) in enumerate(self.pairs):
            if not tgt or not eng:
                raise DataError(f"parallel pair {i}: both sides must be non-empty")
        object.__setattr__(self, "pairs", tuple(tuple(p) for p in self.pairs))

    def __len__(self) -> int:
        return len(self.pairs)

    def __iter__(self) -> Iterator[tuple[str, str]]:
        return iter(self.pairs)


@dataclass(frozen=True)
class Dataset:
    """Immutable, order-preserving collection of examples."""

    task: str  # "classification" | "multichoice"
    examples: tuple
    label_set: TaskLabelSet | None = None

    def split(self, name: str) -> list:
        if name not in SPLITS:
            raise DataError(f"unknown split {name!r}")
        return [ex for ex in self.examples if ex.split == name]

    def split_sizes(self) -> dict[str, int]:
        return {s: len(self.split(s)) for s in SPLITS}

    def ids(self) -> list[str]:
        return [ex.id for ex in self.examples]

    def __len__(self) -> int:
        return len(self.examples)

    def __iter__(self):
        return iter(self.examples)


_CLS_FIELDS = ("id", "text", "label", "split")
_MC_FIELDS = ("id", "passage", "question", "choices", "answer_index", "split")


def _read_text(path: str | Path) -> str:
    path = Path(path)
    if not path.exists():
        raise DataError(f"dataset file not found: {path}")
    raw = path.read_bytes()
    if raw.startswith(b"\xef\xbb\xbf"):
        raise DataError(f"{path}: UTF-8 BOM not allowed; save the file without a BOM")
    try:
        return raw.decode("utf-8")
    except UnicodeDecodeError as e:
        raise DataError(f"{path}: not valid UTF-8 ({e})") from None


def _split_lines(text: str) -> list[str]:
    # \n-separated only: JSON strings may legally contain U+2028/U+2029,
    # which str.splitlines() would treat as line breaks.
    return [line.rstrip("\r") for line in text.split("\n")]


def _rows_from_jsonl(text: str, path) -> Iterator[tuple[int, dict]]:
    for lineno, line in enumerate(_split_lines(text), start=1):
        if not line.strip():
            continue
        try:
            row = json.loads(line)
        except json.JSONDecodeError as e:
            raise DataError(f"{path}:{lineno}: malformed JSON ({e.msg})") from None
        if not isinstance(row, dict):
            raise DataError(f"{path}:{lineno}: expected a JSON object")
        yield lineno, row


def _rows_from_tsv(text: str, path) -> Iterator[tuple[int, dict]]:
    reader = csv.reader(io.StringIO(text), delimiter="\t")
    try:
        header = next(reader)
    except StopIteration:
        return
    for lineno, values in enumerate(reader, start=2):
        if not any(values):
            continue
        if len(values) != len(header):
            raise DataError(
                f"{path}:{lineno}: expected {len(header)} columns, got {len(values)}"
            )
        yield lineno, dict(zip(header, values))


def _require(row: dict, fields: Sequence[str], path, lineno: int) -> None:
    missing = [f for f in fields if f not in row or row[f] in (None, "")]
    if missing:
        raise DataError(f"{path}:{lineno}: missing required field(s) {missing}")


def load_dataset(
    path: str | Path,
    format: str = "jsonl",
    task: str = "classification",
    label_set: TaskLabelSet | None = None,
) -> Dataset:
    """Load and validate a dataset file.

    Classification rows carry {id, text, text_en, label, split}; multichoice
    rows carry {id, passage, passage_en, question, choices, answer_index,
    split}. In TSV, multichoice choices are spread over columns
    choice_0..choice_3.
    """
    if format not in ("jsonl", "tsv"):
        raise DataError(f"unknown format {format!r}")
    if task not in ("classification", "multichoice"):
        raise DataError(f"unknown task {task!r}")

    text = _read_text(path)
    rows = _rows_from_jsonl(text, path) if format == "jsonl" else _rows_from_tsv(text, path)

    if task == "classification" and label_set is None:
        label_set = DEFAULT_LABEL_SET

    examples = []
    seen_ids: set[str] = set()
    for lineno, row in rows:
        try:
            ex = _parse_row(row, task, format, path, lineno, label_set)
        except DataError:
            raise
        except (TypeError, ValueError) as e:
            raise DataError(f"{path}:{lineno}: malformed row ({e})") from None
        if ex.id in seen_ids:
            raise DataError(f"{path}:{lineno}: duplicate id {ex.id!r}")
        seen_ids.add(ex.id)
        examples.append(ex)

    if not examples:
        raise DataError(f"{path}: no examples")

    return Dataset(
        task=task,
        examples=tuple(examples),
        label_set=label_set if task == "classification" else None,
    )


def _parse_row(row, task, format, path, lineno, label_set):
    if task == "classification":
        _require(row, _CLS_FIELDS, path, lineno)
        label = normalize_label(str(row["label"]))
        if label_set is not None and label not in label_set:
            raise DataError(f"{path}:{lineno}: unknown label {row['label']!r}")
        return LabeledExample(
            id=str(row["id"]),
            text_target=str(row["text"]),
            text_english=str(row["text_en"]) if row.get("text_en") else None,
            label=label,
            split=str(row["split"]),
        )

    if format == "tsv":
        choice_cols = [f"choice_{i}" for i in range(4)]
        _require(row, ("id", "passage", "question", "answer_index", "split", *choice_cols), path, lineno)
        choices = tuple(row[c] for c in choice_cols)
    else:
        _require(row, _MC_FIELDS, path, lineno)
        choices = tuple(str(c) for c in row["choices"])
    return MultiChoiceExample(
        id=str(row["id"]),
        passage_target=str(row["passage"]),
        passage_english=str(row["passage_en"]) if row.get("passage_en") else None,
        question=str(row["question"]),
        choices=choices,
        answer_index=int(row["answer_index"]),
        split=str(row["split"]),
    )


def example_to_row(ex) -> dict:
    """Canonical JSONL row for an example (inverse of load)."""
    if isinstance(ex, LabeledExample):
        row = {"id": ex.id, "text": ex.text_target, "label": ex.label, "split": ex.split}
        if ex.text_english is not None:
            row["text_en"] = ex.text_english
        return row
    if isinstance(ex, MultiChoiceExample):
        row = {
            "id": ex.id,
            "passage": ex.passage_target,
            "question": ex.question,
            "choices": list(ex.choices),
            "answer_index": ex.answer_index,
            "split": ex.split,
        }
        if ex.passage_english is not None:
            row["passage_en"] = ex.passage_english
        return row
    raise TypeError(f"not an example: {type(ex).__name__}")


def save_dataset(dataset: Dataset, path: str | Path) -> None:
    """Write a dataset as JSONL, round-trippable through load_dataset."""
    path = Path(path)
    with path.open("w", encoding="utf-8") as f:
        for ex in dataset:
            f.write(json.dumps(example_to_row(ex), ensure_ascii=False) + "\n")


def make_parallel(
    dataset_or_examples: Dataset | Iterable,
    language_code: str,
) -> ParallelCorpus:
    """Build a (target, english) corpus from examples that carry both sides.

    Examples missing the English side are skipped with a warning; if none
    remain this is an error. Pair order follows dataset order.
    """
    examples = list(dataset_or_examples)
    pairs = []
    skipped = 0
    for ex in examples:
        tgt = getattr(ex, "text_target", None) or getattr(ex, "passage_target", None)
        eng = getattr(ex, "text_english", None) or getattr(ex, "passage_english", None)
        if eng:
            pairs.append((tgt, eng))
        else:
            skipped += 1
    if not pairs:
        raise DataError("no examples with an English side; cannot build a parallel corpus")
    if skipped:
        warnings.warn(
            f"make_parallel: skipped {skipped} of {len(examples)} examples lacking an English side",
            stacklevel=2,
        )
    return ParallelCorpus(pairs=tuple(pairs), language_code=language_code)


def load_pipes(path: str | Path, language_code: str) -> ParallelCorpus:
    """Read the one-pair-per-line ``target ||| english`` corpus format."""
    text = _read_text(path)
    pairs = []
    for lineno, line in enumerate(_split_lines(text), start=1):
        if not line.strip():
            continue
        parts = line.split(" ||| ")
        if len(parts) != 2:
            raise DataError(f"{path}:{lineno}: expected 'target ||| english'")
        tgt, eng = parts[0].strip(), parts[1].strip()
        if not tgt or not eng:
            raise DataError(f"{path}:{lineno}: empty side in parallel pair")
        pairs.append((tgt, eng))
    if not pairs:
        raise DataError(f"{path}: no parallel pairs")
    return ParallelCorpus(pairs=tuple(pairs), language_code=language_code)


def save_pipes(corpus: ParallelCorpus, path: str | Path) -> None:
    with Path(path).open("w", encoding="utf-8") as f:
        for tgt, eng in corpus:
            f.write(f"{tgt} ||| {eng}\n")

#!/usr/bin/env python3
"""Regenerate the vendored assets and test fixture datasets.

Everything here is deterministic (fixed seeds), so committed assets can be
reproduced exactly. Produces:

* src/lrlkit/assets/tokenizer.json — a byte-level BPE tokenizer in the
  standard single-file JSON serialization, trained on synthetic English.
  It compresses English into subwords but has never seen the Ol Chiki or
  NKo scripts, so those fall back to raw bytes — the same regime the
  published multilingual tokenizers exhibit on rare scripts.
* src/lrlkit/assets/sat_sample.txt — 120 Ol Chiki sentences, one per line.
* src/lrlkit/assets/nqo_parallel.tsv — 120 NKo/English pairs (tab-separated).
* tests/fixtures/data/sib_nqo.jsonl — 1004-row seven-topic classification
  fixture with 701/99/204 splits and a 51/204 majority class in test.
* tests/fixtures/data/mc_nqo.jsonl — multiple-choice fixture (40/8/12).
* tests/fixtures/data/echo_nqo.jsonl — small fixture whose texts embed
  their gold label as the first word (for the echo-backend oracle).

Run from the repository root:  python3 scripts/build_assets.py
"""

from __future__ import annotations

import json
import random
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
ASSETS = ROOT / "src" / "lrlkit" / "assets"
FIXTURES = ROOT / "tests" / "fixtures" / "data"

TOPICS = ("science/technology", "travel", "politics", "sports", "health", "entertainment", "geography")

FUNCTION_WORDS = [
    "the", "of", "and", "in", "to", "a", "is", "was", "for", "on", "with",
    "that", "as", "by", "at", "from", "it", "are", "an", "be", "this",
    "which", "or", "has", "its", "were", "also", "their", "most", "one",
]

TOPIC_WORDS = {
    "science/technology": [
        "researchers", "laboratory", "experiment", "software", "computing", "satellite",
        "chemical", "physics", "molecules", "engineering", "innovation", "prototype",
        "measurement", "particles", "telescope", "algorithm", "genome", "neural",
        "processor", "quantum", "microscope", "discovery", "analysis", "reaction",
        "electricity", "machines", "robotics", "spacecraft", "dataset", "theory",
    ],
    "travel": [
        "airport", "journey", "tourists", "luggage", "destination", "hotel",
        "passport", "railway", "harbor", "itinerary", "visitors", "voyage",
        "terminal", "booking", "excursion", "landmark", "museum", "ferry",
        "backpack", "souvenir", "departure", "arrival", "customs", "resort",
        "crossing", "roadside", "camping", "guidebook", "border", "transit",
    ],
    "politics": [
        "parliament", "election", "minister", "government", "policy", "senate",
        "campaign", "coalition", "legislation", "referendum", "diplomat", "treaty",
        "opposition", "candidate", "congress", "cabinet", "governor", "ballot",
        "constitution", "negotiation", "sanctions", "mandate", "assembly", "debate",
        "reform", "protest", "petition", "summit", "voters", "council",
    ],
    "sports": [
        "tournament", "championship", "athlete", "stadium", "football", "olympic",
        "coach", "season", "league", "medal", "marathon", "referee",
        "defender", "striker", "innings", "qualifier", "record", "training",
        "basketball", "cricket", "swimmer", "cyclist", "fixture", "scoreboard",
        "penalty", "victory", "defeat", "transfer", "captain", "finals",
    ],
    "health": [
        "hospital", "patients", "vaccine", "treatment", "disease", "symptoms",
        "surgery", "clinic", "infection", "medicine", "diagnosis", "therapy",
        "nutrition", "epidemic", "antibiotic", "recovery", "physician", "wellness",
        "outbreak", "immunity", "prescription", "ailment", "virus", "bacteria",
        "screening", "dosage", "pandemic", "nursing", "hygiene", "fitness",
    ],
    "entertainment": [
        "concert", "festival", "audience", "theater", "orchestra", "cinema",
        "actress", "premiere", "album", "singer", "drama", "comedy",
        "celebrity", "streaming", "soundtrack", "gallery", "sculpture", "novel",
        "painting", "broadcast", "animation", "scriptwriter", "ticket", "encore",
        "melody", "rehearsal", "spotlight", "costume", "director", "studio",
    ],
    "geography": [
        "mountain", "river", "plateau", "coastline", "desert", "glacier",
        "peninsula", "volcano", "rainforest", "savanna", "archipelago", "valley",
        "lagoon", "estuary", "highlands", "tundra", "canyon", "delta",
        "equator", "basin", "islands", "climate", "erosion", "monsoon",
        "wetland", "prairie", "summit", "ridge", "terrain", "latitude",
    ],
}

SUFFIXES = ["", "", "", "s", "ed", "ing", "al", "ly"]

OLCK_LETTERS = [chr(c) for c in range(0x1C5A, 0x1C78)]  # Ol Chiki letters, 3-byte UTF-8
NKO_LETTERS = [chr(c) for c in range(0x07CA, 0x07EB)]  # NKo letters, 2-byte UTF-8
NKO_MARKS = [chr(c) for c in range(0x07EB, 0x07F3)]  # NKo combining tone marks


class EnglishGenerator:
    def __init__(self, seed: int):
        self.rng = random.Random(seed)
        self._zipf = {
            topic: [1.0 / (rank + 1) for rank in range(len(words))]
            for topic, words in TOPIC_WORDS.items()
        }

    def word(self, topic: str) -> str:
        base = self.rng.choices(TOPIC_WORDS[topic], weights=self._zipf[topic])[0]
        suffix = self.rng.choice(SUFFIXES)
        if suffix and base.endswith("s") and suffix == "s":
            suffix = ""
        return base + suffix

    def sentence(self, topic: str, min_words: int = 9, max_words: int = 17) -> str:
        n = self.rng.randint(min_words, max_words)
        words = []
        for i in range(n):
            if i % 2 == 1 or self.rng.random() < 0.35:
                words.append(self.rng.choice(FUNCTION_WORDS))
            else:
                words.append(self.word(topic))
        words[0] = words[0].capitalize()
        return " ".join(words) + "."


class ScriptMapper:
    """Deterministic word-for-word mapping of Latin text into a rare script."""

    def __init__(self, letters: list[str], marks: list[str], mark_prob: float, seed: int,
                 min_len: int = 3, max_len: int = 8):
        self.letters = letters
        self.marks = marks
        self.mark_prob = mark_prob
        self.rng = random.Random(seed)
        self.min_len = min_len
        self.max_len = max_len
        self._cache: dict[str, str] = {}

    def map_word(self, word: str) -> str:
        key = word.strip(".,").lower()
        if key not in self._cache:
            length = max(self.min_len, min(self.max_len, len(key) - 1))
            chars = []
            for _ in range(length):
                chars.append(self.rng.choice(self.letters))
                if self.marks and self.rng.random() < self.mark_prob:
                    chars.append(self.rng.choice(self.marks))
            self._cache[key] = "".join(chars)
        return self._cache[key]

    def map_sentence(self, sentence: str, terminal: str = "") -> str:
        return " ".join(self.map_word(w) for w in sentence.split()) + terminal


def build_tokenizer(path: Path, seed: int = 101, vocab_size: int = 700) -> None:
    from tokenizers import Tokenizer, decoders, models, pre_tokenizers, trainers

    gen = EnglishGenerator(seed)
    corpus = []
    for i in range(4200):
        topic = TOPICS[i % len(TOPICS)]
        corpus.append(gen.sentence(topic))
    tokenizer = Tokenizer(models.BPE())
    tokenizer.pre_tokenizer = pre_tokenizers.ByteLevel(add_prefix_space=False)
    tokenizer.decoder = decoders.ByteLevel()
    trainer = trainers.BpeTrainer(
        vocab_size=vocab_size,
        special_tokens=[],
        initial_alphabet=pre_tokenizers.ByteLevel.alphabet(),
        show_progress=False,
    )
    tokenizer.train_from_iterator(corpus, trainer)
    path.parent.mkdir(parents=True, exist_ok=True)
    tokenizer.save(str(path))


def build_language_samples(n_sentences: int = 120) -> tuple[list[str], list[tuple[str, str]]]:
    gen = EnglishGenerator(seed=202)
    olck = ScriptMapper(OLCK_LETTERS, [], 0.0, seed=303, min_len=3, max_len=7)
    nko = ScriptMapper(NKO_LETTERS, NKO_MARKS, 0.4, seed=404, min_len=4, max_len=9)

    sat_lines = []
    nqo_pairs = []
    for i in range(n_sentences):
        topic = TOPICS[i % len(TOPICS)]
        eng_a = gen.sentence(topic)
        eng_b = gen.sentence(topic)
        sat_lines.append(olck.map_sentence(eng_a, terminal=" ᱾"))
        nqo_pairs.append((nko.map_sentence(eng_b, terminal=" ߸"), eng_b))
    return sat_lines, nqo_pairs


def build_classification_fixture(path: Path) -> None:
    gen = EnglishGenerator(seed=505)
    nko = ScriptMapper(NKO_LETTERS, NKO_MARKS, 0.4, seed=606, min_len=4, max_len=9)
    majority = "sports"
    others = [t for t in TOPICS if t != majority]

    def label_sequence(majority_count: int, other_counts: list[int]) -> list[str]:
        labels = [majority] * majority_count
        for count, topic in zip(other_counts, others):
            labels += [topic] * count
        return labels

    splits = {
        "train": label_sequence(101, [100] * 6),
        "dev": label_sequence(15, [14] * 6),
        "test": label_sequence(51, [26, 26, 26, 25, 25, 25]),
    }
    rng = random.Random(707)
    rows = []
    idx = 0
    for split, labels in splits.items():
        labels = labels[:]
        rng.shuffle(labels)
        for label in labels:
            eng = gen.sentence(label)
            rows.append(
                {
                    "id": f"sib-{idx:04d}",
                    "text": nko.map_sentence(eng),
                    "text_en": eng,
                    "label": label,
                    "split": split,
                }
            )
            idx += 1
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8") as f:
        for row in rows:
            f.write(json.dumps(row, ensure_ascii=False) + "\n")


def build_multichoice_fixture(path: Path) -> None:
    gen = EnglishGenerator(seed=808)
    nko = ScriptMapper(NKO_LETTERS, NKO_MARKS, 0.4, seed=909, min_len=4, max_len=9)
    rng = random.Random(1010)
    rows = []
    idx = 0
    for split, count in (("train", 40), ("dev", 8), ("test", 12)):
        for _ in range(count):
            topic = TOPICS[idx % len(TOPICS)]
            eng_passage = gen.sentence(topic) + " " + gen.sentence(topic)
            passage = nko.map_sentence(eng_passage)
            question = nko.map_sentence(gen.sentence(topic, 5, 9))
            choices = [nko.map_sentence(gen.sentence(topic, 2, 4)) for _ in range(4)]
            rows.append(
                {
                    "id": f"mc-{idx:03d}",
                    "passage": passage,
                    "passage_en": eng_passage,
                    "question": question,
                    "choices": choices,
                    "answer_index": rng.randrange(4),
                    "split": split,
                }
            )
            idx += 1
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8") as f:
        for row in rows:
            f.write(json.dumps(row, ensure_ascii=False) + "\n")


def build_echo_fixture(path: Path) -> None:
    gen = EnglishGenerator(seed=1111)
    nko = ScriptMapper(NKO_LETTERS, NKO_MARKS, 0.4, seed=1212, min_len=4, max_len=9)
    rows = []
    idx = 0
    for split, count in (("train", 7), ("dev", 7), ("test", 21)):
        for _ in range(count):
            topic = TOPICS[idx % len(TOPICS)]
            eng = gen.sentence(topic, 5, 9)
            rows.append(
                {
                    "id": f"echo-{idx:03d}",
                    "text": f"{topic} {nko.map_sentence(eng)}",
                    "text_en": eng,
                    "label": topic,
                    "split": split,
                }
            )
            idx += 1
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8") as f:
        for row in rows:
            f.write(json.dumps(row, ensure_ascii=False) + "\n")


def report_metrics() -> None:
    sys.path.insert(0, str(ROOT / "src"))
    from lrlkit.tokmetrics import TokenizerHandle, token_to_byte_ratio, tokenizer_parity

    tok = TokenizerHandle.from_file(ASSETS / "tokenizer.json")
    sat_lines = (ASSETS / "sat_sample.txt").read_text(encoding="utf-8").splitlines()
    tbrs = [token_to_byte_ratio(line, tok) for line in sat_lines]
    print(f"sat_Olck mean TBR over {len(tbrs)} sentences: {sum(tbrs)/len(tbrs):.4f}")

    pairs = []
    for line in (ASSETS / "nqo_parallel.tsv").read_text(encoding="utf-8").splitlines():
        tgt, eng = line.split("\t")
        pairs.append((tgt, eng))
    tps = [tokenizer_parity(p, tok) for p in pairs]
    print(f"nqo_Nkoo mean TP over {len(tps)} pairs: {sum(tps)/len(tps):.4f}")
    eng_bytes = sum(len(p[1].encode()) for p in pairs)
    eng_tokens = sum(len(tok.encode(p[1])) for p in pairs)
    print(f"english bytes/token on the parallel sample: {eng_bytes/eng_tokens:.3f}")


def main() -> None:
    build_tokenizer(ASSETS / "tokenizer.json")
    sat_lines, nqo_pairs = build_language_samples()
    (ASSETS / "sat_sample.txt").write_text("\n".join(sat_lines) + "\n", encoding="utf-8")
    with (ASSETS / "nqo_parallel.tsv").open("w", encoding="utf-8") as f:
        for tgt, eng in nqo_pairs:
            f.write(f"{tgt}\t{eng}\n")
    build_classification_fixture(FIXTURES / "sib_nqo.jsonl")
    build_multichoice_fixture(FIXTURES / "mc_nqo.jsonl")
    build_echo_fixture(FIXTURES / "echo_nqo.jsonl")
    print("assets written to", ASSETS)
    print("fixtures written to", FIXTURES)
    report_metrics()


if __name__ == "__main__":
    main()

"""Diagnostic metrics for how well a tokenizer and model represent a language.

Three quantities are computed per (target, english) pair:

* token-to-byte ratio of the target text: tokens emitted per UTF-8 byte.
  Values near 1.0 mean the tokenizer is falling back to raw bytes, i.e. the
  script was effectively unseen during tokenizer training.
* tokenizer parity: English token count over target token count. Low values
  mean the target language inflates sequence length relative to English.
* information parity: English negative log-likelihood over target negative
  log-likelihood under the same model. Low values mean the model struggles
  to represent information in the target language.

The information-parity ratio is oriented english-over-target so that "low
score = poorly supported language" holds; the orientation is recorded in
profile metadata. Per-pair ratios are averaged (not ratios of summed NLLs).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, asdict
from pathlib import Path
from typing import Protocol, runtime_checkable

from .corpus import ParallelCorpus
from .errors import DataError

IP_ORIENTATION = "nll_english_over_nll_target"
IP_AGGREGATION = "mean_of_per_pair_ratios"


@runtime_checkable
class TokenCounter(Protocol):
    """Anything that can segment text into token ids."""

    def encode(self, text: str) -> list[int]: ...


class TokenizerHandle:
    """Immutable wrapper around a serialized tokenizer definition file.

    Loads the single-file JSON serialization (vocabulary + merges +
    normalizer + pre-tokenizer) used by all mainstream open LLM releases.
    Special tokens are never added: metrics must count exactly the tokens
    the text itself produces.
    """

    def __init__(self, tokenizer, identity: str):
        self._tok = tokenizer
        self.identity = identity
        self.byte_level = _detect_byte_level(tokenizer)

    @classmethod
    def from_file(cls, path: str | Path) -> "TokenizerHandle":
        path = Path(path)
        if not path.exists():
            raise DataError(f"tokenizer file not found: {path}")
        from tokenizers import Tokenizer

        return cls(Tokenizer.from_file(str(path)), identity=str(path))

    @classmethod
    def from_url(cls, url: str) -> "TokenizerHandle":
        import httpx
        from tokenizers import Tokenizer

        resp = httpx.get(url, follow_redirects=True, timeout=30.0)
        resp.raise_for_status()
        return cls(Tokenizer.from_str(resp.text), identity=url)

    @classmethod
    def load(cls, path_or_url: str | Path) -> "TokenizerHandle":
        s = str(path_or_url)
        if s.startswith(("http://", "https://")):
            return cls.from_url(s)
        return cls.from_file(path_or_url)

    def encode(self, text: str) -> list[int]:
        return self._tok.encode(text, add_special_tokens=False).ids

    def decode(self, ids: list[int]) -> str:
        return self._tok.decode(ids, skip_special_tokens=False)

    def vocab_size(self) -> int:
        return self._tok.get_vocab_size()


def _detect_byte_level(tokenizer) -> bool:
    try:
        cfg = json.loads(tokenizer.to_str())
    except Exception:
        return False
    pre = cfg.get("pre_tokenizer") or {}
    types = [pre.get("type")] + [p.get("type") for p in pre.get("pretokenizers", [])]
    return "ByteLevel" in types or bool((cfg.get("model") or {}).get("byte_fallback"))


class ByteTokenizer:
    """Pure byte-fallback tokenizer: one token per UTF-8 byte.

    The degenerate regime a byte-level BPE collapses to on unseen scripts;
    useful as a stub and as the analytical worst case (TBR exactly 1.0).
    """

    identity = "byte-fallback-stub"
    byte_level = True

    def encode(self, text: str) -> list[int]:
        return list(text.encode("utf-8"))

    def decode(self, ids: list[int]) -> str:
        return bytes(ids).decode("utf-8", errors="replace")


@dataclass(frozen=True)
class ScoreResult:
    """Teacher-forced scoring output for one text."""

    nll: float
    token_logprobs: tuple[float, ...]


@runtime_checkable
class ScoringBackend(Protocol):
    """Backend capable of teacher-forced log-likelihood scoring."""

    def score(self, text: str) -> ScoreResult: ...


@dataclass
class LanguageProfile:
    """Per-language diagnostic record driving adaptation recommendations."""

    language_code: str
    ip: float
    tbr: float
    tp: float
    sample_count: int
    baseline_accuracy: float | None = None
    skipped: int = 0

    def to_dict(self) -> dict:
        return {
            "language": self.language_code,
            "ip": self.ip,
            "tbr": self.tbr,
            "tp": self.tp,
            "baseline_accuracy": self.baseline_accuracy,
            "n": self.sample_count,
            "skipped": self.skipped,
            "meta": {"ip_orientation": IP_ORIENTATION, "ip_aggregation": IP_AGGREGATION},
        }

    @classmethod
    def from_dict(cls, d: dict) -> "LanguageProfile":
        return cls(
            language_code=d["language"],
            ip=d["ip"],
            tbr=d["tbr"],
            tp=d["tp"],
            baseline_accuracy=d.get("baseline_accuracy"),
            sample_count=d["n"],
            skipped=d.get("skipped", 0),
        )


def token_to_byte_ratio(text: str, tok: TokenCounter) -> float:
    """Tokens per UTF-8 byte for one text."""
    if not text:
        raise DataError("token_to_byte_ratio: empty text")
    n_bytes = len(text.encode("utf-8"))
    return len(tok.encode(text)) / n_bytes


def tokenizer_parity(pair: tuple[str, str], tok: TokenCounter) -> float:
    """English token count over target token count for a parallel pair."""
    target_text, english_text = pair
    if not target_text or not english_text:
        raise DataError("tokenizer_parity: empty side in pair")
    n_target = len(tok.encode(target_text))
    n_english = len(tok.encode(english_text))
    if n_target == 0:
        raise DataError("tokenizer_parity: target side produced zero tokens")
    return n_english / n_target


def information_parity(pair: tuple[str, str], backend: ScoringBackend) -> float:
    """English NLL over target NLL for a parallel pair under one model."""
    target_text, english_text = pair
    if not target_text or not english_text:
        raise DataError("information_parity: empty side in pair")
    nll_english = backend.score(english_text).nll
    nll_target = backend.score(target_text).nll
    if nll_target == 0:
        raise DataError("information_parity: zero target NLL denominator")
    return nll_english / nll_target


def profile_language(
    corpus: ParallelCorpus,
    tok: TokenCounter,
    backend: ScoringBackend,
) -> LanguageProfile:
    """Average the three diagnostics over all pairs of a corpus.

    Pairs failing any sub-metric are skipped and counted rather than
    aborting the whole profile (remote backends fail transiently); the
    profile records how many pairs were actually used.
    """
    if len(corpus) == 0:
        raise DataError("profile_language: empty corpus")
    ips: list[float] = []
    tbrs: list[float] = []
    tps: list[float] = []
    skipped = 0
    for pair in corpus:
        try:
            tbr = token_to_byte_ratio(pair[0], tok)
            tp = tokenizer_parity(pair, tok)
            ip = information_parity(pair, backend)
        except Exception:
            skipped += 1
            continue
        tbrs.append(tbr)
        tps.append(tp)
        ips.append(ip)
    if not ips:
        raise DataError(f"profile_language: all {len(corpus)} pairs failed")
    return LanguageProfile(
        language_code=corpus.language_code,
        ip=math.fsum(ips) / len(ips),
        tbr=math.fsum(tbrs) / len(tbrs),
        tp=math.fsum(tps) / len(tps),
        sample_count=len(ips),
        skipped=skipped,
    )

"""Canonical serialization and content hashing for run artifacts.

Artifacts must hash identically across reruns of an unchanged config, so
volatile fields (wall-clock latencies, timestamps) are stripped before
hashing and dict keys are sorted.
"""

from __future__ import annotations

import hashlib
import json

VOLATILE_KEYS = frozenset({"latency_ms", "timestamp", "started_at", "finished_at", "duration_s"})


def strip_volatile(obj):
    if isinstance(obj, dict):
        return {k: strip_volatile(v) for k, v in obj.items() if k not in VOLATILE_KEYS}
    if isinstance(obj, (list, tuple)):
        return [strip_volatile(v) for v in obj]
    return obj


def canonical_json(obj) -> str:
    return json.dumps(strip_volatile(obj), ensure_ascii=False, sort_keys=True, separators=(",", ":"))


def content_hash(obj) -> str:
    """sha256 of the canonical JSON form, volatile fields excluded."""
    return hashlib.sha256(canonical_json(obj).encode("utf-8")).hexdigest()


def file_content_hash(path) -> str:
    """Hash a JSON or JSONL artifact file, volatile fields excluded."""
    text = open(path, encoding="utf-8").read()
    lines = [line for line in text.splitlines() if line.strip()]
    try:
        parsed = [json.loads(line) for line in lines]
    except json.JSONDecodeError:
        return hashlib.sha256(text.encode("utf-8")).hexdigest()
    if len(parsed) == 1:
        return content_hash(parsed[0])
    return content_hash(parsed)

#!/usr/bin/env python3
"""Rewrite the golden prompt fixtures from the canonical case list.

The fixture files define the byte-exact canonical form of every prompt
variant; regenerate them only when a template change is intentional, and
review the diff. Run from the repository root:

    python3 scripts/update_goldens.py
"""

from __future__ import annotations

import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(ROOT / "tests"))

from golden_cases import golden_cases  # noqa: E402

OUT_DIR = ROOT / "tests" / "fixtures" / "prompts"


def main() -> None:
    OUT_DIR.mkdir(parents=True, exist_ok=True)
    names = set()
    for name, prompt in golden_cases():
        assert name not in names, f"duplicate golden name {name}"
        names.add(name)
        (OUT_DIR / f"{name}.txt").write_text(prompt.text, encoding="utf-8")
    stale = {p.name for p in OUT_DIR.glob("*.txt")} - {f"{n}.txt" for n in names}
    for filename in sorted(stale):
        (OUT_DIR / filename).unlink()
        print(f"removed stale fixture {filename}")
    print(f"wrote {len(names)} golden fixtures to {OUT_DIR}")


if __name__ == "__main__":
    main()

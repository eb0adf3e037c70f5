from __future__ import annotations

from pathlib import Path

import pytest

from lrlkit.backends import MockBackend
from lrlkit.corpus import load_dataset
from lrlkit.tokmetrics import TokenizerHandle

TESTS_DIR = Path(__file__).resolve().parent
FIXTURES = TESTS_DIR / "fixtures"
DATA = FIXTURES / "data"
GOLDEN_PROMPTS = FIXTURES / "prompts"
ASSETS = TESTS_DIR.parent / "src" / "lrlkit" / "assets"


@pytest.fixture(scope="session")
def sib_dataset():
    return load_dataset(DATA / "sib_nqo.jsonl", "jsonl", "classification")


@pytest.fixture(scope="session")
def mc_dataset():
    return load_dataset(DATA / "mc_nqo.jsonl", "jsonl", "multichoice")


@pytest.fixture(scope="session")
def echo_dataset():
    return load_dataset(DATA / "echo_nqo.jsonl", "jsonl", "classification")


@pytest.fixture(scope="session")
def vendored_tokenizer():
    return TokenizerHandle.from_file(ASSETS / "tokenizer.json")


@pytest.fixture()
def mock_backend():
    return MockBackend()

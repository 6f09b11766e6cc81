"""E2E test configuration and fixtures."""
from __future__ import annotations

from pathlib import Path

import pytest

from car_classifier import cli

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"
WORDNET_DIR = FIXTURES / "wordnet"
FREQ_FILE = WORDNET_DIR / "freq.tsv"


@pytest.fixture(autouse=True)
def _no_lexicon_env(monkeypatch):
    """Keep the caller's CAR_* variables out of the runs."""
    monkeypatch.delenv("CAR_WORDNET_DIR", raising=False)
    monkeypatch.delenv("CAR_FREQ_FILE", raising=False)


@pytest.fixture()
def workdir(tmp_path: Path) -> Path:
    return tmp_path


@pytest.fixture()
def corpus_file(workdir: Path) -> Path:
    """60 synthetic 'heads' documents over 3 classes."""
    path = workdir / "corpus.conll"
    assert cli.main(["synth", str(path), "--documents", "60", "--classes", "3"]) == 0
    return path

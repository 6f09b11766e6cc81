"""Shared fixtures for the unit tests.

The fixture lexicon under tests/fixtures/wordnet is a hand-built slice of
WordNet in the Princeton database format: the dalmatian/dog/canid chain, the
two senses of "bank", a few verbs and an instance hypernym (Einstein).
"""
from __future__ import annotations

from pathlib import Path

import pytest

from car_classifier.corpus import Corpus, parse_corpus_text
from car_classifier.mining import Itemset, Transaction
from car_classifier.synthetic import make_corpus
from car_classifier.wordnet import Lexicon, load_lexicon

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"
WORDNET_DIR = FIXTURES / "wordnet"
FREQ_FILE = WORDNET_DIR / "freq.tsv"

JOHN_CORPUS = """\
# newdoc id = d1
# class = GSPO
# sent_id = d1-s1
1\tJohn\tJohn\tNP\t2\tnsubj
2\tgives\tgive\tVVZ\t0\troot
3\tMary\tMary\tNP\t2\tiobj
4\tan\ta\tDT\t5\tdet
5\tapple\tapple\tNN\t2\tdobj
6\t.\t.\tSENT\t2\tpunct
"""


def sentence_block(sent_id: str, rows: list[tuple[str, str, str, int, str]]) -> str:
    """Token lines for ``rows`` of (surface, lemma, pos, head, label)."""
    lines = [f"# sent_id = {sent_id}"]
    for index, (surface, lemma, pos, head, label) in enumerate(rows, start=1):
        lines.append(f"{index}\t{surface}\t{lemma}\t{pos}\t{head}\t{label}")
    return "\n".join(lines) + "\n\n"


def tx(class_label: str, *items: str) -> Transaction:
    return Transaction(Itemset(items), class_label)


@pytest.fixture(scope="session")
def lexicon() -> Lexicon:
    return load_lexicon(WORDNET_DIR, FREQ_FILE)


@pytest.fixture()
def john_corpus() -> Corpus:
    return parse_corpus_text(JOHN_CORPUS)


@pytest.fixture()
def four_tx_db() -> list[Transaction]:
    """[({a,b},c1), ({a},c1), ({b},c2), ({a,b},c2)]"""
    return [tx("c1", "a", "b"), tx("c1", "a"), tx("c2", "b"), tx("c2", "a", "b")]


@pytest.fixture(scope="session")
def heads_corpus() -> Corpus:
    return make_corpus(documents=200, classes=4, seed=42, flavour="heads")


@pytest.fixture(scope="session")
def subjects_corpus() -> Corpus:
    return make_corpus(documents=200, classes=4, seed=42, flavour="subjects")

"""Deterministic synthetic corpora.

``make_corpus`` builds parsed documents whose sentences all have the shape
``subject -nsubj-> VERB <-dobj- object``, with a determiner on the object
and a final period. In the ``heads`` flavour every verb is a marker of the
document's class; in the ``subjects`` flavour verbs come from a shared pool
and the subjects carry the class. ``make_graded_corpus`` is a corpus of
one-word documents whose rule count falls one item at a time as the
support threshold rises.
"""

from __future__ import annotations

import logging
from typing import Literal

import numpy as np

from .corpus import Corpus, Document, Sentence, Token, check_tree
from .handler_wrappers import DomainError

logger = logging.getLogger(__name__)

Flavour = Literal["heads", "subjects"]

MARKERS_PER_CLASS = 3

_SHARED_SUBJECTS = ("company", "market", "government", "bank", "group", "official", "analyst", "board")
_SHARED_VERBS = ("say", "report", "expect", "raise", "cut", "hold", "see", "make")
_SHARED_OBJECTS = ("price", "share", "rate", "deal", "plan", "profit", "loss", "stake")


def class_label(k: int) -> str:
    return f"C{k + 1}"


def marker_verbs(k: int) -> list[str]:
    return [f"c{k + 1}act{j + 1}" for j in range(MARKERS_PER_CLASS)]


def marker_subjects(k: int) -> list[str]:
    return [f"c{k + 1}agent{j + 1}" for j in range(MARKERS_PER_CLASS)]


def _pick(rng: np.random.Generator, pool) -> str:
    return pool[int(rng.integers(len(pool)))]


def _sentence(sentence_id: str, doc_id: str, subject: str, verb: str, obj: str, subject_label: str) -> Sentence:
    tokens = (
        Token(1, subject.capitalize(), subject, "NN", 2, subject_label),
        Token(2, verb + "s", verb, "VBZ", 0, ""),
        Token(3, "the", "the", "DT", 4, "det"),
        Token(4, obj, obj, "NN", 2, "dobj"),
        Token(5, ".", ".", ".", 2, "punct"),
    )
    check_tree(sentence_id, tokens)
    return Sentence(sentence_id, doc_id, tokens)


def make_corpus(
    documents: int = 200,
    classes: int = 4,
    seed: int = 42,
    flavour: Flavour = "heads",
    sentences: tuple[int, int] = (2, 5),
    subject_drop: float = 0.1,
) -> Corpus:
    """Balanced corpus: document i belongs to class ``i mod classes``."""
    if documents < 1 or classes < 1:
        raise DomainError("need at least one document and one class", documents=documents, classes=classes)
    lo, hi = sentences
    if not 1 <= lo <= hi:
        raise DomainError(f"bad sentence range {sentences}")
    if flavour not in ("heads", "subjects"):
        raise DomainError(f"unknown flavour '{flavour}'", hint="Use 'heads' or 'subjects'")

    rng = np.random.default_rng(seed)
    docs = []
    for i in range(documents):
        k = i % classes
        doc_id = f"d{i:04d}"
        built = []
        for n in range(1, int(rng.integers(lo, hi + 1)) + 1):
            if flavour == "heads":
                subject, verb = _pick(rng, _SHARED_SUBJECTS), _pick(rng, marker_verbs(k))
            else:
                subject, verb = _pick(rng, marker_subjects(k)), _pick(rng, _SHARED_VERBS)
            obj = _pick(rng, _SHARED_OBJECTS)
            label = "nsubjpass" if rng.random() < subject_drop else "nsubj"
            built.append(_sentence(f"{doc_id}-s{n}", doc_id, subject, verb, obj, label))
        docs.append(Document(doc_id, class_label(k), tuple(built)))
    logger.info("Built %s corpus: %d documents, %d classes (seed %d)", flavour, documents, classes, seed)
    return Corpus(tuple(docs))


def graded_item(i: int) -> str:
    return f"w{i:03d}"


def make_graded_corpus(items: int = 100, classes: int = 4) -> Corpus:
    """Item ``w_i`` is the only word of ``i`` documents, all of class ``i mod classes``."""
    if items < 1 or classes < 1:
        raise DomainError("need at least one item and one class", items=items, classes=classes)
    docs = []
    for i in range(1, items + 1):
        word = graded_item(i)
        for j in range(i):
            doc_id = f"g{i:03d}-{j:03d}"
            tokens = (Token(1, word, word, "VB", 0, ""),)
            docs.append(Document(doc_id, class_label(i % classes), (Sentence(f"{doc_id}-s1", doc_id, tokens),)))
    return Corpus(tuple(docs))

"""Classification of documents with a class-association-rule set.

Every sentence is pruned and hyperonymized exactly as in training. The
matching rule with the highest rank (confidence, then support, then
itemset) is the sentence's verdict. A document's score for a class is the
sum of the confidences of the verdicts predicting it; the prediction is the
best-scoring class. Variety counts the classes with a positive score and
dispersion is the spread between the best and worst class score.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import AbstractSet, Iterable, Optional, Sequence, Union

from .corpus import Document
from .handler_wrappers import DomainError
from .mining import CAR, Itemset, RuleModel, Strategy, hyperonymizer_for, rule_sort_key
from .pruning import PrunedSentence, SentenceFrequencies, TfidfStrategy, prune
from .wordnet import DisambiguationPolicy, Lexicon

logger = logging.getLogger(__name__)

ItemsLike = Union[Itemset, AbstractSet[str], Iterable[str]]


@dataclass(frozen=True)
class SentenceVerdict:
    sentence_id: str
    rule: Optional[CAR]
    items: tuple[str, ...] = ()

    @property
    def matched(self) -> bool:
        return self.rule is not None

    def to_dict(self) -> dict:
        return {
            "sentence_id": self.sentence_id,
            "items": list(self.items),
            "matched": self.matched,
            "rule": None if self.rule is None else {
                "items": list(self.rule.itemset.items),
                "class": self.rule.class_label,
                "confidence": self.rule.confidence,
                "support": self.rule.support,
            },
        }


@dataclass(frozen=True)
class ClassificationResult:
    predicted_class: Optional[str]
    variety: int
    dispersion: float
    class_scores: dict[str, float]
    verdicts: tuple[SentenceVerdict, ...]
    document_id: Optional[str] = None

    @property
    def abstained(self) -> bool:
        return self.predicted_class is None

    def to_dict(self) -> dict:
        return {
            "document_id": self.document_id,
            "predicted_class": self.predicted_class,
            "variety": self.variety,
            "dispersion": self.dispersion,
            "class_scores": dict(sorted(self.class_scores.items())),
            "verdicts": [v.to_dict() for v in self.verdicts],
        }


def _as_set(itemset: ItemsLike) -> frozenset[str]:
    if isinstance(itemset, Itemset):
        return frozenset(itemset.items)
    return frozenset(itemset)


def match_sentence(rules: Sequence[CAR], itemset: ItemsLike) -> Optional[CAR]:
    """First rule, in rank order, whose itemset is contained in ``itemset``."""
    items = _as_set(itemset)
    for rule in rules:
        if items.issuperset(rule.itemset.items):
            return rule
    return None


class RuleIndex:
    """Ranked rules with item postings; ``match`` equals ``match_sentence``."""

    def __init__(self, rules: Iterable[CAR]) -> None:
        self.rules: tuple[CAR, ...] = tuple(sorted(rules, key=rule_sort_key))
        self._postings: dict[str, list[int]] = {}
        for position, rule in enumerate(self.rules):
            for item in rule.itemset:
                self._postings.setdefault(item, []).append(position)

    def __len__(self) -> int:
        return len(self.rules)

    @property
    def classes(self) -> list[str]:
        return sorted({r.class_label for r in self.rules})

    def match(self, itemset: ItemsLike) -> Optional[CAR]:
        items = _as_set(itemset)
        candidates: set[int] = set()
        for item in items:
            candidates.update(self._postings.get(item, ()))
        for position in sorted(candidates):
            rule = self.rules[position]
            if items.issuperset(rule.itemset.items):
                return rule
        return None


def score_document(
    index: RuleIndex,
    pruned: Sequence[PrunedSentence],
    classes: Optional[Iterable[str]] = None,
    document_id: Optional[str] = None,
) -> ClassificationResult:
    """Aggregate per-sentence verdicts into class scores, variety and dispersion."""
    class_set = set(classes) if classes is not None else set(index.classes)
    contributions: dict[str, list[float]] = {c: [] for c in class_set}
    verdicts = []
    for sentence in pruned:
        rule = index.match(sentence.lemmas) if sentence.items else None
        verdicts.append(SentenceVerdict(sentence.sentence_id, rule, tuple(sorted(sentence.lemmas))))
        if rule is not None:
            contributions.setdefault(rule.class_label, []).append(rule.confidence)
    scores = {c: math.fsum(values) for c, values in contributions.items()}

    best = max(scores.values(), default=0.0)
    predicted = None
    if best > 0:
        predicted = min(c for c, s in scores.items() if s == best)
    variety = sum(1 for s in scores.values() if s > 0)
    dispersion = best - min(scores.values()) if scores else 0.0
    return ClassificationResult(predicted, variety, dispersion, scores, tuple(verdicts), document_id)


def prune_document(
    doc: Document,
    strategy: Strategy,
    hyper_n: int = 0,
    lexicon: Optional[Lexicon] = None,
    *,
    frequencies: Optional[SentenceFrequencies] = None,
    policy: DisambiguationPolicy = "most_frequent",
    pos_filter: Iterable[str] = ("noun", "verb"),
) -> list[PrunedSentence]:
    """The training-time prune and hyperonymize stages applied to one document."""
    if isinstance(strategy, TfidfStrategy) and frequencies is None:
        raise DomainError(
            "tfidf classification needs the training sentence frequencies",
            hint="Use a rule model mined with the same tfidf strategy",
        )
    pruned = prune([(s, None) for s in doc.sentences], strategy, frequencies)
    hyperonymizer = hyperonymizer_for(lexicon, hyper_n, policy, pos_filter)
    if hyperonymizer is not None:
        pruned = hyperonymizer.corpus(pruned)
    return pruned


def classify(
    rules: Sequence[CAR],
    doc: Document,
    strategy: Strategy,
    hyper_n: int = 0,
    lexicon: Optional[Lexicon] = None,
    *,
    frequencies: Optional[SentenceFrequencies] = None,
    classes: Optional[Iterable[str]] = None,
    policy: DisambiguationPolicy = "most_frequent",
    pos_filter: Iterable[str] = ("noun", "verb"),
) -> ClassificationResult:
    """Classify ``doc``; ``predicted_class`` is None when no rule fires.

    ``classes`` is the class set scores range over; it defaults to the
    classes of ``rules``.
    """
    pruned = prune_document(
        doc, strategy, hyper_n, lexicon, frequencies=frequencies, policy=policy, pos_filter=pos_filter
    )
    return score_document(RuleIndex(rules), pruned, classes, doc.id)


class Classifier:
    """A RuleModel bound to its lexicon, with a prebuilt rule index."""

    def __init__(self, model: RuleModel, lexicon: Optional[Lexicon] = None) -> None:
        self.model = model
        self.lexicon = lexicon
        self.index = RuleIndex(model.rules)

    def prune(self, doc: Document) -> list[PrunedSentence]:
        return prune_document(
            doc,
            self.model.strategy,
            self.model.hyper_n,
            self.lexicon,
            frequencies=self.model.frequencies,
            policy=self.model.disambiguation,
            pos_filter=self.model.hyperonymize_pos,
        )

    def classify(self, doc: Document) -> ClassificationResult:
        result = score_document(self.index, self.prune(doc), self.model.classes or None, doc.id)
        logger.debug("Document %s -> %s (beta=%d)", doc.id, result.predicted_class, result.variety)
        return result

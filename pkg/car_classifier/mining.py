"""Class association rule mining.

Transactions are (itemset, class) pairs built from pruned sentences. Apriori
finds the itemsets whose class-agnostic support reaches ``min_support`` and
emits one rule per (frequent itemset, class) whose confidence reaches
``min_confidence``. Counts are kept as integers and thresholds compared as
fractions, so a rule exactly on a threshold is never lost to float rounding.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Iterator, Optional, Sequence, Union

from pydantic import BaseModel, ConfigDict, Field

from .corpus import Corpus, forgetful
from .handler_wrappers import DomainError, HandlerError
from .pruning import (
    DependencyStrategy,
    PrunedSentence,
    SentenceFrequencies,
    TfidfStrategy,
    average_transaction_size,
    prune,
)
from .wordnet import DisambiguationPolicy, Hyperonymizer, Lexicon

logger = logging.getLogger(__name__)

Strategy = Union[TfidfStrategy, DependencyStrategy]


class UndefinedConfidenceError(HandlerError):
    def __init__(self, items: Sequence[str]) -> None:
        super().__init__(
            "confidence undefined: no transaction contains the itemset",
            code="undefined_confidence",
            items=list(items),
        )


# ---------------------------------------------------------------------------
# Mining units
# ---------------------------------------------------------------------------
@dataclass(frozen=True, order=True)
class Itemset:
    """Sorted, duplicate-free tuple of items."""

    items: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "items", tuple(sorted(set(self.items))))

    @classmethod
    def of(cls, *items: str) -> Itemset:
        return cls(tuple(items))

    def __len__(self) -> int:
        return len(self.items)

    def __iter__(self) -> Iterator[str]:
        return iter(self.items)

    def __contains__(self, item: object) -> bool:
        return item in self.items

    def issubset(self, other: Union[Itemset, Iterable[str]]) -> bool:
        pool = other.items if isinstance(other, Itemset) else other
        return set(self.items).issubset(pool)


@dataclass(frozen=True)
class Transaction:
    itemset: Itemset
    class_label: str


@dataclass(frozen=True)
class CAR:
    """Rule ``itemset -> class_label`` with its exact counts.

    ``cover_count`` transactions contain the itemset, ``rule_count`` of them
    carry the class, out of ``n_transactions``.
    """

    itemset: Itemset
    class_label: str
    cover_count: int
    rule_count: int
    n_transactions: int

    @property
    def support_fraction(self) -> Fraction:
        return Fraction(self.cover_count, self.n_transactions)

    @property
    def confidence_fraction(self) -> Fraction:
        return Fraction(self.rule_count, self.cover_count)

    @property
    def support(self) -> float:
        return float(self.support_fraction)

    @property
    def confidence(self) -> float:
        return float(self.confidence_fraction)

    def to_dict(self) -> dict:
        return {
            "items": list(self.itemset.items),
            "class": self.class_label,
            "support": self.support,
            "confidence": self.confidence,
            "cover_count": self.cover_count,
            "rule_count": self.rule_count,
        }


def rule_sort_key(rule: CAR) -> tuple:
    """Descending confidence, descending support, then itemset and class."""
    return (-rule.confidence_fraction, -rule.support_fraction, rule.itemset.items, rule.class_label)


class MiningParams(BaseModel):
    model_config = ConfigDict(frozen=True)

    min_support: float = Field(ge=0.0, le=1.0, description="Minimum itemset support (sigma)")
    min_confidence: float = Field(ge=0.0, le=1.0, description="Minimum rule confidence (kappa)")
    max_itemset_size: int = Field(default=5, ge=1, description="Largest itemset considered")


def exact(value: float) -> Fraction:
    """The decimal a float threshold was written as, as a fraction."""
    return Fraction(str(value))


# ---------------------------------------------------------------------------
# Measures
# ---------------------------------------------------------------------------
def support(itemset: Itemset, db: Sequence[Transaction]) -> Fraction:
    if not db:
        raise DomainError("support over an empty transaction database")
    covered = sum(1 for t in db if itemset.issubset(t.itemset))
    return Fraction(covered, len(db))


def confidence(rule: tuple[Itemset, str], db: Sequence[Transaction]) -> Fraction:
    itemset, class_label = rule
    covering = [t for t in db if itemset.issubset(t.itemset)]
    if not covering:
        raise UndefinedConfidenceError(itemset.items)
    return Fraction(sum(1 for t in covering if t.class_label == class_label), len(covering))


# ---------------------------------------------------------------------------
# Apriori
# ---------------------------------------------------------------------------
def _join(frequent: list[tuple[str, ...]]) -> Iterator[tuple[str, ...]]:
    """Candidates of size k+1 from sorted frequent k-itemsets sharing a k-1 prefix."""
    known = set(frequent)
    for i, left in enumerate(frequent):
        for right in frequent[i + 1:]:
            if left[:-1] != right[:-1]:
                break
            candidate = left + (right[-1],)
            if all(candidate[:j] + candidate[j + 1:] in known for j in range(len(candidate) - 2)):
                yield candidate


def apriori(db: Sequence[Transaction], params: MiningParams) -> list[CAR]:
    """All CARs meeting the thresholds, sorted by ``rule_sort_key``.

    Raises:
        DomainError: empty database.
    """
    if not db:
        raise DomainError("apriori over an empty transaction database")
    n = len(db)
    item_masks: dict[str, int] = {}
    class_masks: dict[str, int] = {}
    for tid, transaction in enumerate(db):
        bit = 1 << tid
        for item in transaction.itemset:
            item_masks[item] = item_masks.get(item, 0) | bit
        class_masks[transaction.class_label] = class_masks.get(transaction.class_label, 0) | bit
    classes = sorted(class_masks)

    min_cover = max(1, math.ceil(exact(params.min_support) * n))
    kappa = exact(params.min_confidence)

    level: dict[tuple[str, ...], int] = {
        (item,): mask for item, mask in sorted(item_masks.items()) if mask.bit_count() >= min_cover
    }
    frequent: dict[tuple[str, ...], int] = dict(level)
    size = 1
    while level and size < params.max_itemset_size:
        next_level: dict[tuple[str, ...], int] = {}
        for candidate in _join(sorted(level)):
            mask = level[candidate[:-1]] & item_masks[candidate[-1]]
            if mask.bit_count() >= min_cover:
                next_level[candidate] = mask
        frequent.update(next_level)
        level = next_level
        size += 1

    rules = []
    for items, mask in frequent.items():
        cover = mask.bit_count()
        for class_label in classes:
            hits = (mask & class_masks[class_label]).bit_count()
            if hits * kappa.denominator >= kappa.numerator * cover:
                rules.append(CAR(Itemset(items), class_label, cover, hits, n))
    rules.sort(key=rule_sort_key)
    logger.debug(
        "apriori: %d transactions, %d frequent itemsets, %d rules (sigma=%s, kappa=%s)",
        n, len(frequent), len(rules), params.min_support, params.min_confidence,
    )
    return rules


# ---------------------------------------------------------------------------
# Training pipeline
# ---------------------------------------------------------------------------
@dataclass(frozen=True)
class PreparedTransactions:
    """Output of the prune -> hyperonymize -> drop-empty stage.

    ``source_doc_ids`` names the documents that contributed at least one
    transaction.
    """

    transactions: tuple[Transaction, ...]
    frequencies: Optional[SentenceFrequencies]
    avg_transaction_size: float
    replaced_fraction: float
    n_sentences: int
    source_doc_ids: frozenset[str] = frozenset()


def hyperonymizer_for(
    lexicon: Optional[Lexicon],
    hyper_n: int,
    policy: DisambiguationPolicy = "most_frequent",
    pos_filter: Iterable[str] = ("noun", "verb"),
) -> Optional[Hyperonymizer]:
    if hyper_n < 0:
        raise DomainError("hyperonymic order must be >= 0", hyper_n=hyper_n)
    if hyper_n == 0:
        return None
    if lexicon is None:
        raise HandlerError(
            f"hyperonymic order {hyper_n} needs a WordNet lexicon",
            hint="Set wordnet_dir and freq_file, or use hyper_n = 0",
            code="config_error",
        )
    return Hyperonymizer(lexicon, hyper_n, policy, pos_filter)


def to_transactions(pruned: Sequence[PrunedSentence]) -> list[Transaction]:
    """Non-empty pruned sentences as transactions."""
    return [
        Transaction(Itemset(tuple(p.lemmas)), p.class_label)
        for p in pruned
        if p.items and p.class_label is not None
    ]


def build_transactions(
    corpus: Corpus,
    strategy: Strategy,
    hyper_n: int = 0,
    lexicon: Optional[Lexicon] = None,
    *,
    policy: DisambiguationPolicy = "most_frequent",
    pos_filter: Iterable[str] = ("noun", "verb"),
) -> PreparedTransactions:
    pairs = forgetful(corpus)
    frequencies = None
    if isinstance(strategy, TfidfStrategy):
        frequencies = SentenceFrequencies.from_sentences(s for s, _ in pairs)
    pruned = prune(pairs, strategy, frequencies)
    hyperonymizer = hyperonymizer_for(lexicon, hyper_n, policy, pos_filter)
    if hyperonymizer is not None:
        pruned = hyperonymizer.corpus(pruned)
    transactions = to_transactions(pruned)
    doc_of = {s.id: s.doc_id for s, _ in pairs}
    sources = frozenset(doc_of[p.sentence_id] for p in pruned if p.items and p.class_label is not None)
    dropped = len(pruned) - len(transactions)
    if dropped:
        logger.debug("Dropped %d of %d sentences with empty itemsets", dropped, len(pruned))
    return PreparedTransactions(
        transactions=tuple(transactions),
        frequencies=frequencies,
        avg_transaction_size=average_transaction_size([t.itemset for t in transactions]) if transactions else 0.0,
        replaced_fraction=hyperonymizer.replaced_fraction if hyperonymizer else 0.0,
        n_sentences=len(pruned),
        source_doc_ids=sources,
    )


@dataclass(frozen=True)
class RuleModel:
    """A mined rule set together with everything needed to apply it."""

    rules: tuple[CAR, ...]
    strategy: Strategy
    hyper_n: int
    params: MiningParams
    classes: tuple[str, ...]
    n_transactions: int
    avg_transaction_size: float = 0.0
    replaced_fraction: float = 0.0
    frequencies: Optional[SentenceFrequencies] = None
    corpus_sha256: Optional[str] = None
    training_doc_ids: frozenset[str] = field(default_factory=frozenset)
    disambiguation: DisambiguationPolicy = "most_frequent"
    hyperonymize_pos: tuple[str, ...] = ("noun", "verb")

    @property
    def rule_count(self) -> int:
        return len(self.rules)


def model_from_transactions(
    prepared: PreparedTransactions,
    params: MiningParams,
    strategy: Strategy,
    hyper_n: int,
    *,
    classes: Iterable[str],
    corpus_sha256: Optional[str] = None,
    policy: DisambiguationPolicy = "most_frequent",
    pos_filter: Iterable[str] = ("noun", "verb"),
) -> RuleModel:
    if not prepared.transactions:
        raise DomainError(
            "no sentence kept any item; nothing to mine",
            hint="Try a strategy with wider coverage",
        )
    rules = apriori(prepared.transactions, params)
    return RuleModel(
        rules=tuple(rules),
        strategy=strategy,
        hyper_n=hyper_n,
        params=params,
        classes=tuple(sorted(classes)),
        n_transactions=len(prepared.transactions),
        avg_transaction_size=prepared.avg_transaction_size,
        replaced_fraction=prepared.replaced_fraction,
        frequencies=prepared.frequencies,
        corpus_sha256=corpus_sha256,
        training_doc_ids=prepared.source_doc_ids,
        disambiguation=policy,
        hyperonymize_pos=tuple(sorted(pos_filter)),
    )


def fit(
    corpus: Corpus,
    params: MiningParams,
    strategy: Strategy,
    hyper_n: int = 0,
    lexicon: Optional[Lexicon] = None,
    *,
    policy: DisambiguationPolicy = "most_frequent",
    pos_filter: Iterable[str] = ("noun", "verb"),
    digest: Optional[str] = None,
) -> RuleModel:
    """Prune, hyperonymize and mine ``corpus`` into a RuleModel."""
    prepared = build_transactions(corpus, strategy, hyper_n, lexicon, policy=policy, pos_filter=pos_filter)
    model = model_from_transactions(
        prepared,
        params,
        strategy,
        hyper_n,
        classes=corpus.classes,
        corpus_sha256=digest,
        policy=policy,
        pos_filter=pos_filter,
    )
    logger.info(
        "Mined %d rules from %d transactions (avg size %.2f)",
        model.rule_count, model.n_transactions, model.avg_transaction_size,
    )
    return model


def train(
    corpus: Corpus,
    params: MiningParams,
    strategy: Strategy,
    hyper_n: int = 0,
    lexicon: Optional[Lexicon] = None,
    **kwargs,
) -> list[CAR]:
    return list(fit(corpus, params, strategy, hyper_n, lexicon, **kwargs).rules)

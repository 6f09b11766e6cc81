"""Sentence pruning: reduce each sentence to a small set of items.

Two families of strategies exist:

* ``tfidf`` keeps the N lemmas with the highest sentence-level tfidf score
  (raw in-sentence count times ``ln(#sentences / #sentences containing it)``).
* ``dependency`` keeps the lemmas of words satisfying a morphosyntactic
  constraint on the dependency tree, e.g. the sentence head (I0) or the
  nominal subject of the head (I1).

Strategies are pydantic models tagged by ``kind`` and have a compact string
form used on the command line and in rule-file headers::

    tfidf:N=10
    dep:I1
    dep:custom(labels=nsubj|dobj,pos=N,head=false)
"""

from __future__ import annotations

import logging
import math
import re
from collections import Counter
from dataclasses import dataclass, field
from enum import Enum
from typing import Annotated, Iterable, Literal, Mapping, Optional, Sequence, Sized, Union

from pydantic import BaseModel, ConfigDict, Field, TypeAdapter, ValidationError, model_validator

from .corpus import Sentence, sentence_root
from .handler_wrappers import DomainError, HandlerError

logger = logging.getLogger(__name__)


class StrategyError(HandlerError):
    def __init__(self, message: str, **data: object) -> None:
        super().__init__(
            message,
            hint="Use tfidf:N=<n>, dep:I0|I1|I1'|I2|I2' or dep:custom(labels=a|b,pos=N,head=false)",
            code="config_error",
            **data,
        )


# Stanford typed dependencies (collapsed) plus common Universal Dependencies
# relations. Only used to warn about likely typos in custom constraints.
KNOWN_DEP_LABELS = frozenset({
    "acomp", "advcl", "advmod", "agent", "amod", "appos", "attr", "aux", "auxpass",
    "cc", "ccomp", "complm", "conj", "cop", "csubj", "csubjpass", "dep", "det",
    "discourse", "dobj", "expl", "goeswith", "iobj", "mark", "mwe", "neg", "nn",
    "npadvmod", "nsubj", "nsubjpass", "num", "number", "parataxis", "partmod",
    "pcomp", "pobj", "poss", "possessive", "preconj", "predet", "prep", "prepc",
    "prt", "punct", "purpcl", "quantmod", "rcmod", "ref", "rel", "root", "tmod",
    "vmod", "xcomp", "xsubj",
    "acl", "case", "clf", "compound", "dislocated", "fixed", "flat", "list", "nmod",
    "nummod", "obj", "obl", "orphan", "reparandum", "vocative",
})
_COLLAPSED_PREFIXES = ("prep_", "prepc_", "conj_")


def is_known_label(label: str) -> bool:
    base = label.split(":", 1)[0]
    return base in KNOWN_DEP_LABELS or base.startswith(_COLLAPSED_PREFIXES)


# ---------------------------------------------------------------------------
# Constraints
# ---------------------------------------------------------------------------
class ConstraintId(str, Enum):
    HEAD_ONLY = "I0"
    NSUBJ_OF_HEAD = "I1"
    CCOMP_OF_HEAD = "I1'"
    NOUNS_DIST1 = "I2"
    VERBS_DIST1 = "I2'"
    CUSTOM = "custom"


class ConstraintSpec(BaseModel):
    """A morphosyntactic constraint on the words of a sentence.

    A word satisfies it when it is the head and ``include_head`` is set, or
    when it depends directly on the head and both filters accept it: its
    label is in ``dep_labels`` (if given) and its POS tag starts with
    ``pos_prefix`` (if given). The POS filter also applies to the head.
    """

    model_config = ConfigDict(frozen=True)

    id: ConstraintId = ConstraintId.CUSTOM
    dep_labels: frozenset[str] = Field(default_factory=frozenset, description="Accepted labels of edges into the head")
    pos_prefix: Optional[str] = Field(default=None, min_length=1, description="Required POS tag prefix, e.g. 'N'")
    include_head: bool = Field(default=False, description="Keep the sentence head itself")

    @model_validator(mode="after")
    def _not_vacuous(self) -> ConstraintSpec:
        if not self.dep_labels and self.pos_prefix is None and not self.include_head:
            raise ValueError("a custom constraint needs labels, a POS prefix or head=true")
        return self

    def accepts(self, sentence: Sentence) -> list[bool]:
        """Per-token truth value of the constraint."""
        root = sentence_root(sentence)
        result = []
        for token in sentence.tokens:
            if self.pos_prefix is not None and not token.pos.startswith(self.pos_prefix):
                result.append(False)
            elif token.head == 0:
                result.append(self.include_head)
            elif token.head == root.index and (self.dep_labels or self.pos_prefix is not None):
                result.append(not self.dep_labels or token.dep_label in self.dep_labels)
            else:
                result.append(False)
        return result


BUILTIN_CONSTRAINTS: dict[ConstraintId, ConstraintSpec] = {
    ConstraintId.HEAD_ONLY: ConstraintSpec(id=ConstraintId.HEAD_ONLY, include_head=True),
    ConstraintId.NSUBJ_OF_HEAD: ConstraintSpec(id=ConstraintId.NSUBJ_OF_HEAD, dep_labels=frozenset({"nsubj"})),
    ConstraintId.CCOMP_OF_HEAD: ConstraintSpec(id=ConstraintId.CCOMP_OF_HEAD, dep_labels=frozenset({"ccomp"})),
    ConstraintId.NOUNS_DIST1: ConstraintSpec(id=ConstraintId.NOUNS_DIST1, pos_prefix="N"),
    ConstraintId.VERBS_DIST1: ConstraintSpec(id=ConstraintId.VERBS_DIST1, pos_prefix="V"),
}

_CONSTRAINT_ALIASES: dict[str, ConstraintId] = {}
for _cid in BUILTIN_CONSTRAINTS:
    _CONSTRAINT_ALIASES[_cid.value.lower()] = _cid
    _CONSTRAINT_ALIASES[_cid.name.lower()] = _cid
    _CONSTRAINT_ALIASES[_cid.value.lower().replace("'", "p")] = _cid


def constraint(cid: Union[ConstraintId, str]) -> ConstraintSpec:
    """Built-in constraint by id (``"I1"``) or name (``"NSUBJ_OF_HEAD"``)."""
    key = cid.value if isinstance(cid, ConstraintId) else cid
    resolved = _CONSTRAINT_ALIASES.get(key.strip().lower())
    if resolved is None:
        raise StrategyError(f"unknown constraint '{cid}'")
    return BUILTIN_CONSTRAINTS[resolved]


def custom_constraint(
    dep_labels: Iterable[str] = (), pos_prefix: Optional[str] = None, include_head: bool = False
) -> ConstraintSpec:
    labels = frozenset(dep_labels)
    for label in sorted(labels):
        if not is_known_label(label):
            logger.warning("Custom constraint uses unknown dependency label '%s'", label)
    try:
        return ConstraintSpec(dep_labels=labels, pos_prefix=pos_prefix, include_head=include_head)
    except ValidationError as exc:
        raise StrategyError(f"invalid custom constraint: {exc.errors()[0]['msg']}") from None


# ---------------------------------------------------------------------------
# Strategies
# ---------------------------------------------------------------------------
class TfidfStrategy(BaseModel):
    model_config = ConfigDict(frozen=True)

    kind: Literal["tfidf"] = "tfidf"
    n: int = Field(ge=1, description="Number of lemmas kept per sentence")


class DependencyStrategy(BaseModel):
    model_config = ConfigDict(frozen=True)

    kind: Literal["dependency"] = "dependency"
    constraint: ConstraintSpec


PruneStrategy = Annotated[Union[TfidfStrategy, DependencyStrategy], Field(discriminator="kind")]
_STRATEGY_ADAPTER: TypeAdapter = TypeAdapter(PruneStrategy)

_TFIDF_RE = re.compile(r"^tfidf:(?:n=)?(\d+)$", re.IGNORECASE)
_CUSTOM_RE = re.compile(r"^custom\((.*)\)$", re.IGNORECASE)


def strategy_from_dict(data: Mapping[str, object]) -> Union[TfidfStrategy, DependencyStrategy]:
    try:
        return _STRATEGY_ADAPTER.validate_python(data)
    except ValidationError as exc:
        raise StrategyError(f"invalid strategy: {exc.errors()[0]['msg']}") from None


def _parse_custom(body: str, text: str) -> ConstraintSpec:
    labels: list[str] = []
    pos_prefix: Optional[str] = None
    include_head = False
    for part in filter(None, (p.strip() for p in body.split(","))):
        key, sep, value = part.partition("=")
        key, value = key.strip().lower(), value.strip()
        if not sep:
            raise StrategyError(f"expected key=value in '{text}'", strategy=text)
        if key == "labels":
            labels = [v.strip() for v in value.split("|") if v.strip()]
        elif key == "pos":
            pos_prefix = value or None
        elif key == "head":
            if value.lower() not in ("true", "false"):
                raise StrategyError(f"head must be true or false in '{text}'", strategy=text)
            include_head = value.lower() == "true"
        else:
            raise StrategyError(f"unknown custom constraint key '{key}'", strategy=text)
    return custom_constraint(labels, pos_prefix, include_head)


def parse_strategy(text: str) -> Union[TfidfStrategy, DependencyStrategy]:
    """Parse ``tfidf:N=10``, ``dep:I1`` or ``dep:custom(...)``."""
    raw = text.strip()
    match = _TFIDF_RE.match(raw)
    if match:
        n = int(match.group(1))
        if n < 1:
            raise StrategyError("tfidf N must be >= 1", strategy=text)
        return TfidfStrategy(n=n)
    kind, sep, rest = raw.partition(":")
    if not sep or kind.lower() not in ("dep", "dependency"):
        raise StrategyError(f"cannot parse strategy '{text}'", strategy=text)
    custom = _CUSTOM_RE.match(rest.strip())
    if custom:
        return DependencyStrategy(constraint=_parse_custom(custom.group(1), text))
    return DependencyStrategy(constraint=constraint(rest))


def format_strategy(strategy: Union[TfidfStrategy, DependencyStrategy]) -> str:
    """Canonical string form; ``parse_strategy`` inverts it."""
    if isinstance(strategy, TfidfStrategy):
        return f"tfidf:N={strategy.n}"
    spec = strategy.constraint
    if spec.id is not ConstraintId.CUSTOM:
        return f"dep:{spec.id.value}"
    parts = []
    if spec.dep_labels:
        parts.append("labels=" + "|".join(sorted(spec.dep_labels)))
    if spec.pos_prefix is not None:
        parts.append(f"pos={spec.pos_prefix}")
    parts.append(f"head={'true' if spec.include_head else 'false'}")
    return f"dep:custom({','.join(parts)})"


# ---------------------------------------------------------------------------
# Pruned sentences
# ---------------------------------------------------------------------------
@dataclass(frozen=True, order=True)
class Item:
    """A lemma; the POS tag rides along for hyperonymization only."""

    lemma: str
    pos: str = field(default="", compare=False)


@dataclass(frozen=True)
class PrunedSentence:
    sentence_id: str
    class_label: Optional[str]
    items: tuple[Item, ...]
    context: frozenset[str] = frozenset()

    @property
    def lemmas(self) -> frozenset[str]:
        return frozenset(item.lemma for item in self.items)

    def __len__(self) -> int:
        return len(self.items)


def _distinct_items(sentence: Sentence, keep: Optional[Sequence[bool]] = None) -> tuple[Item, ...]:
    items: dict[str, Item] = {}
    for position, token in enumerate(sentence.tokens):
        if keep is None or keep[position]:
            items.setdefault(token.lemma, Item(token.lemma, token.pos))
    return tuple(items.values())


@dataclass(frozen=True)
class SentenceFrequencies:
    """Number of sentences containing each lemma, over a fixed sentence set."""

    total: int
    counts: Mapping[str, int]

    @classmethod
    def from_sentences(cls, sentences: Iterable[Sentence]) -> SentenceFrequencies:
        counts: Counter[str] = Counter()
        total = 0
        for sentence in sentences:
            total += 1
            counts.update(set(sentence.lemmas()))
        return cls(total, dict(counts))

    def count(self, lemma: str) -> int:
        return self.counts.get(lemma, 0)

    def idf(self, lemma: str) -> float:
        # Lemmas unseen in the reference set count as occurring once.
        return math.log(self.total / max(self.count(lemma), 1))

    def to_dict(self) -> dict:
        return {"total": self.total, "counts": dict(sorted(self.counts.items()))}

    @classmethod
    def from_dict(cls, data: Mapping[str, object]) -> SentenceFrequencies:
        return cls(int(data["total"]), {str(k): int(v) for k, v in dict(data["counts"]).items()})


def tfidf_score(
    frequencies: Union[SentenceFrequencies, Sequence[Sentence]], sentence: Sentence, lemma: str
) -> float:
    """``count_S(lemma) * ln(total / df(lemma))``.

    ``frequencies`` is either a prepared table or the sentence list it is
    computed from.

    Raises:
        DomainError: ``lemma`` does not occur in ``sentence``.
    """
    if not isinstance(frequencies, SentenceFrequencies):
        frequencies = SentenceFrequencies.from_sentences(frequencies)
    tf = sum(1 for t in sentence.tokens if t.lemma == lemma)
    if tf == 0:
        raise DomainError(f"lemma '{lemma}' does not occur in sentence {sentence.id}", lemma=lemma)
    return tf * frequencies.idf(lemma)


def _context(sentence: Sentence) -> frozenset[str]:
    return frozenset(sentence.lemmas())


def prune_tfidf(
    sentences: Sequence[tuple[Sentence, Optional[str]]],
    n: int,
    frequencies: Optional[SentenceFrequencies] = None,
) -> list[PrunedSentence]:
    """Keep the ``n`` best-scoring distinct lemmas of each sentence.

    Equal scores go to the lemma that occurs first in the sentence. Without
    ``frequencies`` the table is built from ``sentences`` themselves.
    """
    if n < 1:
        raise DomainError("tfidf N must be >= 1", n=n)
    if frequencies is None:
        if not sentences:
            raise DomainError("cannot compute tfidf over an empty sentence set")
        frequencies = SentenceFrequencies.from_sentences(s for s, _ in sentences)
    pruned = []
    for sentence, label in sentences:
        tf = Counter(sentence.lemmas())
        candidates = _distinct_items(sentence)
        ranked = sorted(
            range(len(candidates)),
            key=lambda i: (-tf[candidates[i].lemma] * frequencies.idf(candidates[i].lemma), i),
        )
        chosen = sorted(ranked[:n])
        pruned.append(
            PrunedSentence(sentence.id, label, tuple(candidates[i] for i in chosen), _context(sentence))
        )
    return pruned


def prune_dependency(
    sentences: Sequence[tuple[Sentence, Optional[str]]], spec: ConstraintSpec
) -> list[PrunedSentence]:
    """Keep the lemmas of words satisfying ``spec``; may yield empty itemsets."""
    return [
        PrunedSentence(sentence.id, label, _distinct_items(sentence, spec.accepts(sentence)), _context(sentence))
        for sentence, label in sentences
    ]


def prune(
    sentences: Sequence[tuple[Sentence, Optional[str]]],
    strategy: Union[TfidfStrategy, DependencyStrategy],
    frequencies: Optional[SentenceFrequencies] = None,
) -> list[PrunedSentence]:
    if isinstance(strategy, TfidfStrategy):
        return prune_tfidf(sentences, strategy.n, frequencies)
    return prune_dependency(sentences, strategy.constraint)


def average_transaction_size(itemsets: Sequence[Sized]) -> float:
    """Mean cardinality of the non-empty itemsets.

    Raises:
        DomainError: no non-empty itemset.
    """
    sizes = [len(itemset) for itemset in itemsets if len(itemset)]
    if not sizes:
        raise DomainError("average transaction size of an empty itemset list")
    return sum(sizes) / len(sizes)


def constraint_coverage(sentences: Sequence[Sentence], spec: ConstraintSpec) -> float:
    """Fraction of sentences with at least one word satisfying ``spec``."""
    if not sentences:
        return 0.0
    return sum(1 for s in sentences if any(spec.accepts(s))) / len(sentences)

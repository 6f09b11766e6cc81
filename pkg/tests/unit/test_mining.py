"""Unit tests for car_classifier.mining.

The apriori tests compare against a brute-force enumeration of every
itemset and class of small random databases.
"""
from __future__ import annotations

from fractions import Fraction
from itertools import combinations

import numpy as np
import pytest
from pydantic import ValidationError

from car_classifier.corpus import Corpus, forgetful, parse_corpus_text
from car_classifier.handler_wrappers import DomainError, HandlerError
from car_classifier.mining import (
    CAR,
    Itemset,
    MiningParams,
    Transaction,
    UndefinedConfidenceError,
    apriori,
    build_transactions,
    confidence,
    exact,
    fit,
    rule_sort_key,
    support,
    to_transactions,
    train,
)
from car_classifier.pruning import parse_strategy, prune
from car_classifier.synthetic import MARKERS_PER_CLASS
from car_classifier.wordnet import Lexicon

from .conftest import sentence_block, tx

_SETTINGS = [(0.0, 0.0), (0.2, 0.5), (0.3, 0.6), (0.5, 0.0), (1.0, 1.0)]


def _params(sigma: float, kappa: float, size: int = 5) -> MiningParams:
    return MiningParams(min_support=sigma, min_confidence=kappa, max_itemset_size=size)


def _brute_force(db: list[Transaction], sigma: float, kappa: float) -> set[tuple]:
    items = sorted({i for t in db for i in t.itemset})
    classes = sorted({t.class_label for t in db})
    n = len(db)
    found = set()
    for size in range(1, len(items) + 1):
        for combo in combinations(items, size):
            covering = [t for t in db if set(combo) <= set(t.itemset.items)]
            cover = len(covering)
            if cover == 0 or Fraction(cover, n) < Fraction(str(sigma)):
                continue
            for c in classes:
                hits = sum(1 for t in covering if t.class_label == c)
                if Fraction(hits, cover) >= Fraction(str(kappa)):
                    found.add((combo, c, cover, hits))
    return found


def _random_db(rng: np.random.Generator) -> list[Transaction]:
    items = [f"i{k}" for k in range(int(rng.integers(1, 7)))]
    classes = [f"c{k}" for k in range(int(rng.integers(1, 4)))]
    db = []
    for _ in range(int(rng.integers(1, 11))):
        size = int(rng.integers(1, len(items) + 1))
        chosen = rng.choice(items, size=size, replace=False)
        db.append(Transaction(Itemset(tuple(str(i) for i in chosen)), str(rng.choice(classes))))
    return db


def _as_tuples(rules: list[CAR]) -> set[tuple]:
    return {(r.itemset.items, r.class_label, r.cover_count, r.rule_count) for r in rules}


def _corpus(docs: dict[str, tuple[str, list[str]]]) -> Corpus:
    """docs: id -> (class, head verbs, one single-token sentence each)."""
    text = ""
    for doc_id, (label, heads) in docs.items():
        text += f"# newdoc id = {doc_id}\n# class = {label}\n"
        for n, head in enumerate(heads, start=1):
            text += sentence_block(f"{doc_id}-{n}", [(head, head, "VB", 0, "root")])
    return parse_corpus_text(text)


# ===========================================================================
# Itemset / CAR
# ===========================================================================


class TestItemset:
    def test_sorted_and_deduplicated(self):
        assert Itemset(("b", "a", "a")).items == ("a", "b")
        assert Itemset.of("b", "a") == Itemset(("a", "b"))

    def test_subset(self):
        assert Itemset.of("a").issubset(Itemset.of("a", "b"))
        assert Itemset().issubset(["x"])
        assert not Itemset.of("c").issubset({"a", "b"})

    def test_car_measures(self):
        rule = CAR(Itemset.of("a"), "c1", 3, 2, 4)
        assert rule.support_fraction == Fraction(3, 4)
        assert rule.confidence_fraction == Fraction(2, 3)
        assert rule.to_dict() == {
            "items": ["a"], "class": "c1", "support": 0.75, "confidence": 2 / 3, "cover_count": 3, "rule_count": 2,
        }

    def test_exact_reads_the_written_decimal(self):
        assert exact(0.1) == Fraction(1, 10)
        assert exact(0.3) * 10 == 3


# ===========================================================================
# support / confidence
# ===========================================================================


class TestSupportConfidence:
    def test_support(self, four_tx_db):
        assert support(Itemset.of("a"), four_tx_db) == Fraction(3, 4)

    def test_empty_itemset_support(self, four_tx_db):
        assert support(Itemset(), four_tx_db) == 1

    def test_absent_item_support(self, four_tx_db):
        assert support(Itemset.of("z"), four_tx_db) == 0

    def test_support_empty_db(self):
        with pytest.raises(DomainError):
            support(Itemset.of("a"), [])

    def test_confidence(self, four_tx_db):
        assert confidence((Itemset.of("a"), "c1"), four_tx_db) == Fraction(2, 3)
        assert confidence((Itemset.of("a", "b"), "c1"), four_tx_db) == Fraction(1, 2)

    def test_confidence_pure_class(self):
        db = [tx("c1", "a"), tx("c1", "a", "b"), tx("c2", "b")]
        assert confidence((Itemset.of("a"), "c1"), db) == 1

    def test_confidence_undefined(self, four_tx_db):
        with pytest.raises(UndefinedConfidenceError) as exc_info:
            confidence((Itemset.of("z"), "c1"), four_tx_db)
        assert exc_info.value.code == "undefined_confidence"


# ===========================================================================
# apriori
# ===========================================================================


class TestApriori:
    def test_four_transactions(self, four_tx_db):
        rules = apriori(four_tx_db, _params(0.5, 0.6))
        assert _as_tuples(rules) == _brute_force(four_tx_db, 0.5, 0.6)
        first = rules[0]
        assert (first.itemset.items, first.class_label) == (("a",), "c1")
        assert first.support_fraction == Fraction(3, 4)
        assert first.confidence_fraction == Fraction(2, 3)
        assert [(r.itemset.items, r.class_label) for r in rules] == [(("a",), "c1"), (("b",), "c2")]

    def test_vacuous_thresholds(self, four_tx_db):
        rules = apriori(four_tx_db, _params(0.0, 0.0))
        assert len(rules) == 6
        assert {r.class_label for r in rules} == {"c1", "c2"}

    def test_no_universal_item(self, four_tx_db):
        assert apriori(four_tx_db, _params(1.0, 0.0)) == []

    def test_empty_db(self):
        with pytest.raises(DomainError):
            apriori([], _params(0.1, 0.1))

    def test_size_cap(self, four_tx_db):
        rules = apriori(four_tx_db, _params(0.0, 0.0, size=1))
        assert all(len(r.itemset) == 1 for r in rules)

    def test_thresholds_are_exact(self):
        # 0.3 * 10 is 3.0000000000000004 in floating point.
        db = [tx("c1", "a")] * 3 + [tx("c2", "b")] * 7
        rules = apriori(db, _params(0.3, 1.0))
        assert (("a",), "c1", 3, 3) in _as_tuples(rules)

    def test_confidence_on_threshold_is_kept(self):
        db = [tx("c1", "a")] * 3 + [tx("c2", "a")] * 2
        rules = apriori(db, _params(0.0, 0.6))
        assert _as_tuples(rules) == {(("a",), "c1", 5, 3)}

    def test_oracle_equivalence(self):
        rng = np.random.default_rng(7)
        for _ in range(200):
            db = _random_db(rng)
            for sigma, kappa in _SETTINGS:
                rules = apriori(db, _params(sigma, kappa, size=6))
                assert _as_tuples(rules) == _brute_force(db, sigma, kappa)
                for rule in rules:
                    assert abs(rule.support - rule.cover_count / len(db)) < 1e-12
                    assert abs(rule.confidence - rule.rule_count / rule.cover_count) < 1e-12

    def test_measures_match_recomputation(self):
        rng = np.random.default_rng(11)
        db = _random_db(rng)
        for rule in apriori(db, _params(0.0, 0.0, size=6)):
            assert rule.support_fraction == support(rule.itemset, db)
            assert rule.confidence_fraction == confidence((rule.itemset, rule.class_label), db)

    def test_anti_monotonicity(self):
        rng = np.random.default_rng(3)
        for _ in range(20):
            db = _random_db(rng)
            mined = {r.itemset.items for r in apriori(db, _params(0.2, 0.0, size=6))}
            for items in mined:
                for k in range(1, len(items)):
                    for sub in combinations(items, k):
                        assert sub in mined

    def test_sorted_by_rank(self):
        rng = np.random.default_rng(5)
        rules = apriori(_random_db(rng), _params(0.0, 0.0))
        assert rules == sorted(rules, key=rule_sort_key)
        assert all(
            (a.confidence_fraction, a.support_fraction) >= (b.confidence_fraction, b.support_fraction)
            for a, b in zip(rules, rules[1:])
        )


class TestMiningParams:
    @pytest.mark.parametrize("kwargs", [
        {"min_support": 1.5, "min_confidence": 0.5},
        {"min_support": 0.1, "min_confidence": -0.1},
        {"min_support": 0.1, "min_confidence": 0.5, "max_itemset_size": 0},
    ])
    def test_invalid(self, kwargs):
        with pytest.raises(ValidationError):
            MiningParams(**kwargs)


# ===========================================================================
# Training pipeline
# ===========================================================================


class TestTrain:
    def test_unique_heads_give_pure_rules(self, heads_corpus: Corpus):
        model = fit(heads_corpus, _params(0.01, 0.5), parse_strategy("dep:I0"))
        assert model.rule_count == 4 * MARKERS_PER_CLASS
        assert all(r.confidence == 1.0 for r in model.rules)
        for label in heads_corpus.classes:
            assert sum(1 for r in model.rules if r.class_label == label) == MARKERS_PER_CLASS

    def test_shared_head_has_no_certain_rule(self):
        corpus = _corpus({"d1": ("X", ["run"]), "d2": ("Y", ["run", "jump"])})
        rules = train(corpus, _params(0.0, 1.0), parse_strategy("dep:I0"))
        assert {(r.itemset.items, r.class_label) for r in rules} == {(("jump",), "Y")}

    def test_composition_law(self, subjects_corpus: Corpus):
        strategy = parse_strategy("dep:I1")
        params = _params(0.02, 0.3)
        manual = apriori(to_transactions(prune(forgetful(subjects_corpus), strategy)), params)
        assert train(subjects_corpus, params, strategy) == manual

    def test_order_zero_ignores_lexicon(self, subjects_corpus: Corpus, lexicon: Lexicon):
        strategy = parse_strategy("dep:I1")
        params = _params(0.02, 0.3)
        assert train(subjects_corpus, params, strategy, 0, lexicon) == train(subjects_corpus, params, strategy)

    def test_hyperonymized_training(self, lexicon: Lexicon):
        corpus = _corpus({"d1": ("X", ["give"]), "d2": ("Y", ["walk"])})
        model = fit(corpus, _params(0.0, 1.0), parse_strategy("dep:I0"), 1, lexicon)
        assert {(r.itemset.items, r.class_label) for r in model.rules} == {
            (("transfer",), "X"), (("travel",), "Y"),
        }
        assert model.replaced_fraction == 1.0

    def test_order_without_lexicon(self, subjects_corpus: Corpus):
        with pytest.raises(HandlerError) as exc_info:
            fit(subjects_corpus, _params(0.1, 0.5), parse_strategy("dep:I1"), 2)
        assert exc_info.value.code == "config_error"

    def test_nothing_to_mine(self, heads_corpus: Corpus):
        with pytest.raises(DomainError, match="nothing to mine"):
            fit(heads_corpus, _params(0.1, 0.5), parse_strategy("dep:I1'"))

    def test_deterministic(self, subjects_corpus: Corpus):
        strategy = parse_strategy("tfidf:N=2")
        params = _params(0.02, 0.2)
        assert fit(subjects_corpus, params, strategy) == fit(subjects_corpus, params, strategy)

    def test_model_metadata(self, heads_corpus: Corpus):
        model = fit(heads_corpus, _params(0.01, 0.5), parse_strategy("tfidf:N=1"), digest="abc")
        assert model.classes == ("C1", "C2", "C3", "C4")
        assert model.frequencies is not None
        assert model.frequencies.total == len(heads_corpus.sentences())
        assert model.corpus_sha256 == "abc"
        assert model.training_doc_ids == {d.id for d in heads_corpus.documents}
        assert model.avg_transaction_size == 1.0

    def test_provenance_lists_contributing_documents(self):
        text = "# newdoc id = kept\n# class = A\n" + sentence_block(
            "k1", [("John", "John", "NNP", 2, "nsubj"), ("runs", "run", "VBZ", 0, "root")]
        )
        text += "# newdoc id = silent\n# class = B\n" + sentence_block("s1", [("Run", "run", "VB", 0, "root")])
        model = fit(parse_corpus_text(text), _params(0.0, 0.0), parse_strategy("dep:I1"))
        assert model.training_doc_ids == {"kept"}
        assert model.n_transactions == 1


class TestBuildTransactions:
    def test_empty_itemsets_are_dropped(self):
        text = "# newdoc id = d\n# class = X\n"
        text += sentence_block("s1", [("Dogs", "dog", "NNS", 2, "nsubj"), ("bark", "bark", "VBP", 0, "root")])
        text += sentence_block("s2", [("Rain", "rain", "NN", 0, "root")])
        prepared = build_transactions(parse_corpus_text(text), parse_strategy("dep:I1"))
        assert prepared.n_sentences == 2
        assert prepared.transactions == (tx("X", "dog"),)
        assert prepared.avg_transaction_size == 1.0
        assert prepared.frequencies is None

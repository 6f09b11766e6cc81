"""Unit tests for car_classifier.pruning."""
from __future__ import annotations

import logging
import math
from collections import Counter

import pytest

from car_classifier.corpus import Corpus, Sentence, Token, forgetful, parse_corpus_text
from car_classifier.handler_wrappers import DomainError
from car_classifier.pruning import (
    BUILTIN_CONSTRAINTS,
    ConstraintId,
    DependencyStrategy,
    Item,
    SentenceFrequencies,
    StrategyError,
    TfidfStrategy,
    average_transaction_size,
    constraint,
    constraint_coverage,
    custom_constraint,
    format_strategy,
    is_known_label,
    parse_strategy,
    prune,
    prune_dependency,
    prune_tfidf,
    strategy_from_dict,
    tfidf_score,
)

from .conftest import sentence_block


def _sentence(sid: str, rows: list[tuple[str, str, int, str]]) -> Sentence:
    """rows of (lemma, pos, head, label); the surface is the lemma."""
    return Sentence(
        sid, "d", tuple(Token(i, lemma, lemma, pos, head, label) for i, (lemma, pos, head, label) in enumerate(rows, 1))
    )


# the, cat, see, the, cat / the dog bark / the fox sleep / the bird sing
FOUR = [
    _sentence("s1", [("the", "DT", 2, "det"), ("cat", "NN", 3, "nsubj"), ("see", "VVD", 0, ""),
                     ("the", "DT", 5, "det"), ("cat", "NN", 3, "dobj")]),
    _sentence("s2", [("the", "DT", 2, "det"), ("dog", "NN", 3, "nsubj"), ("bark", "VVZ", 0, "")]),
    _sentence("s3", [("the", "DT", 2, "det"), ("fox", "NN", 3, "nsubj"), ("sleep", "VVZ", 0, "")]),
    _sentence("s4", [("the", "DT", 2, "det"), ("bird", "NN", 3, "nsubj"), ("sing", "VVZ", 0, "")]),
]


def _john(john_corpus: Corpus) -> list:
    return forgetful(john_corpus)


def _oracle_top(sentences: list[Sentence], sentence: Sentence, n: int) -> set[str]:
    df = Counter(lemma for s in sentences for lemma in set(s.lemmas()))
    tf = Counter(sentence.lemmas())
    first: dict[str, int] = {}
    for position, lemma in enumerate(sentence.lemmas()):
        first.setdefault(lemma, position)
    scored = [(-tf[lemma] * math.log(len(sentences) / df[lemma]), first[lemma], lemma) for lemma in first]
    return {lemma for _, _, lemma in sorted(scored)[:n]}


# ===========================================================================
# tfidf_score
# ===========================================================================


class TestTfidfScore:
    def test_lemma_in_every_sentence_scores_zero(self):
        assert tfidf_score(FOUR, FOUR[1], "the") == 0.0

    def test_hand_count(self):
        assert tfidf_score(FOUR, FOUR[0], "cat") == pytest.approx(2 * math.log(4))

    def test_rarer_lemma_scores_higher(self):
        assert tfidf_score(FOUR, FOUR[2], "fox") > tfidf_score(FOUR, FOUR[2], "the")

    def test_prepared_table_gives_same_score(self):
        table = SentenceFrequencies.from_sentences(FOUR)
        assert tfidf_score(table, FOUR[0], "see") == tfidf_score(FOUR, FOUR[0], "see")

    def test_absent_lemma(self):
        with pytest.raises(DomainError, match="does not occur"):
            tfidf_score(FOUR, FOUR[0], "dog")

    def test_unseen_lemma_counts_once(self):
        table = SentenceFrequencies(4, {})
        assert table.idf("anything") == pytest.approx(math.log(4))

    def test_frequencies_dict_form(self):
        table = SentenceFrequencies.from_sentences(FOUR)
        assert SentenceFrequencies.from_dict(table.to_dict()) == table
        assert table.count("the") == 4
        assert table.count("cat") == 1


# ===========================================================================
# prune_tfidf
# ===========================================================================


class TestPruneTfidf:
    def test_large_n_keeps_all_distinct_lemmas(self):
        pruned = prune_tfidf([(s, "X") for s in FOUR], 10)
        assert pruned[0].lemmas == {"the", "cat", "see"}
        assert len(pruned[0]) == 3

    def test_top_one_matches_sort_oracle(self):
        pruned = prune_tfidf([(s, "X") for s in FOUR], 1)
        for sentence, result in zip(FOUR, pruned):
            assert set(result.lemmas) == _oracle_top(FOUR, sentence, 1)
        assert [p.lemmas for p in pruned] == [{"cat"}, {"dog"}, {"fox"}, {"bird"}]

    def test_equal_scores_earlier_position_wins(self):
        # dog and bark both score ln 4 in s2.
        pruned = prune_tfidf([(s, "X") for s in FOUR], 1)
        assert pruned[1].lemmas == {"dog"}

    @pytest.mark.parametrize("n", [1, 2, 3])
    def test_cardinality_bound(self, n: int):
        for p in prune_tfidf([(s, "X") for s in FOUR], n):
            assert len(p) <= n

    def test_classes_carried_through(self):
        pruned = prune_tfidf([(s, c) for s, c in zip(FOUR, "ABCD")], 2)
        assert [p.class_label for p in pruned] == list("ABCD")

    def test_items_keep_sentence_order_and_pos(self):
        pruned = prune_tfidf([(FOUR[0], "X")], 2, SentenceFrequencies.from_sentences(FOUR))
        assert pruned[0].items == (Item("cat", "NN"), Item("see", "VVD"))
        assert [i.pos for i in pruned[0].items] == ["NN", "VVD"]

    def test_frozen_frequencies(self):
        table = SentenceFrequencies.from_sentences(FOUR)
        alone = prune_tfidf([(FOUR[2], None)], 1, table)
        assert alone[0].lemmas == {"fox"}
        assert alone[0].class_label is None

    def test_invalid_n(self):
        with pytest.raises(DomainError):
            prune_tfidf([(FOUR[0], "X")], 0)

    def test_empty_without_table(self):
        with pytest.raises(DomainError, match="empty sentence set"):
            prune_tfidf([], 1)

    def test_deterministic(self):
        pairs = [(s, "X") for s in FOUR]
        assert prune_tfidf(pairs, 2) == prune_tfidf(pairs, 2)


# ===========================================================================
# prune_dependency
# ===========================================================================


class TestPruneDependency:
    def _prune(self, john_corpus: Corpus, cid: str) -> set[str]:
        return set(prune_dependency(_john(john_corpus), constraint(cid))[0].lemmas)

    def test_head_only(self, john_corpus: Corpus):
        assert self._prune(john_corpus, "I0") == {"give"}

    def test_nsubj_of_head(self, john_corpus: Corpus):
        assert self._prune(john_corpus, "I1") == {"John"}

    def test_nouns_at_distance_one(self, john_corpus: Corpus):
        assert self._prune(john_corpus, "I2") == {"John", "Mary", "apple"}

    def test_ccomp_of_head_is_empty(self, john_corpus: Corpus):
        assert self._prune(john_corpus, "I1'") == set()

    def test_verbs_at_distance_one(self):
        sentence = _sentence("s", [("say", "VVD", 0, ""), ("he", "PP", 1, "nsubj"), ("go", "VVD", 1, "ccomp")])
        assert prune_dependency([(sentence, "X")], constraint("I2'"))[0].lemmas == {"go"}
        assert prune_dependency([(sentence, "X")], constraint("I1'"))[0].lemmas == {"go"}

    def test_items_record_pos(self, john_corpus: Corpus):
        pruned = prune_dependency(_john(john_corpus), constraint("I2"))[0]
        assert {i.lemma: i.pos for i in pruned.items} == {"John": "NP", "Mary": "NP", "apple": "NN"}

    def test_soundness(self, john_corpus: Corpus):
        sentence = john_corpus.documents[0].sentences[0]
        for spec in BUILTIN_CONSTRAINTS.values():
            accepted = {t.lemma for t, ok in zip(sentence.tokens, spec.accepts(sentence)) if ok}
            pruned = prune_dependency([(sentence, "X")], spec)[0]
            assert pruned.lemmas <= accepted

    def test_several_subjects(self):
        sentence = _sentence("s", [
            ("cat", "NN", 4, "nsubj"), ("and", "CC", 1, "cc"), ("dog", "NN", 4, "nsubj"), ("play", "VVP", 0, ""),
        ])
        assert prune_dependency([(sentence, "X")], constraint("I1"))[0].lemmas == {"cat", "dog"}

    def test_duplicate_lemmas_collapse(self):
        sentence = _sentence("s", [("see", "VVD", 0, ""), ("cat", "NN", 1, "nsubj"), ("cat", "NN", 1, "dobj")])
        pruned = prune_dependency([(sentence, "X")], constraint("I2"))[0]
        assert [i.lemma for i in pruned.items] == ["cat"]


class TestCustomConstraint:
    def test_labels(self, john_corpus: Corpus):
        spec = custom_constraint(["dobj", "iobj"])
        assert prune_dependency(_john(john_corpus), spec)[0].lemmas == {"Mary", "apple"}

    def test_labels_with_head(self, john_corpus: Corpus):
        spec = custom_constraint(["dobj"], include_head=True)
        assert prune_dependency(_john(john_corpus), spec)[0].lemmas == {"give", "apple"}

    def test_pos_filter_applies_to_head(self, john_corpus: Corpus):
        spec = custom_constraint(pos_prefix="N", include_head=True)
        assert prune_dependency(_john(john_corpus), spec)[0].lemmas == {"John", "Mary", "apple"}

    def test_unknown_label_warns(self, caplog: pytest.LogCaptureFixture):
        with caplog.at_level(logging.WARNING, logger="car_classifier"):
            spec = custom_constraint(["nsubj", "subjekt"])
        assert "subjekt" in caplog.text
        assert spec.dep_labels == frozenset({"nsubj", "subjekt"})

    def test_vacuous_constraint(self):
        with pytest.raises(StrategyError, match="invalid custom constraint"):
            custom_constraint()

    @pytest.mark.parametrize("label, known", [
        ("nsubj", True), ("prep_of", True), ("nmod:poss", True), ("conj_and", True), ("subjekt", False),
    ])
    def test_is_known_label(self, label: str, known: bool):
        assert is_known_label(label) is known


# ===========================================================================
# Strategy strings
# ===========================================================================


class TestParseStrategy:
    @pytest.mark.parametrize("text, expected", [
        ("tfidf:N=10", TfidfStrategy(n=10)),
        ("tfidf:3", TfidfStrategy(n=3)),
        ("dep:I0", DependencyStrategy(constraint=BUILTIN_CONSTRAINTS[ConstraintId.HEAD_ONLY])),
        ("dep:I2'", DependencyStrategy(constraint=BUILTIN_CONSTRAINTS[ConstraintId.VERBS_DIST1])),
        ("dep:i2p", DependencyStrategy(constraint=BUILTIN_CONSTRAINTS[ConstraintId.VERBS_DIST1])),
        ("dependency:NSUBJ_OF_HEAD", DependencyStrategy(constraint=BUILTIN_CONSTRAINTS[ConstraintId.NSUBJ_OF_HEAD])),
    ])
    def test_parse(self, text: str, expected):
        assert parse_strategy(text) == expected

    def test_custom(self):
        strategy = parse_strategy("dep:custom(labels=nsubj|dobj,pos=N,head=false)")
        assert isinstance(strategy, DependencyStrategy)
        assert strategy.constraint.dep_labels == frozenset({"nsubj", "dobj"})
        assert strategy.constraint.pos_prefix == "N"
        assert strategy.constraint.include_head is False

    @pytest.mark.parametrize("text", [
        "tfidf:N=10", "dep:I1", "dep:I1'", "dep:custom(labels=dobj|nsubj,pos=N,head=true)",
    ])
    def test_format_inverts_parse(self, text: str):
        assert format_strategy(parse_strategy(text)) == text

    @pytest.mark.parametrize("text, message", [
        ("tfidf:N=0", "must be >= 1"),
        ("bag-of-words", "cannot parse"),
        ("dep:I9", "unknown constraint"),
        ("dep:custom(color=red)", "unknown custom constraint key"),
        ("dep:custom(head=maybe)", "head must be true or false"),
        ("dep:custom(nsubj)", "expected key=value"),
    ])
    def test_invalid(self, text: str, message: str):
        with pytest.raises(StrategyError, match=message) as exc_info:
            parse_strategy(text)
        assert exc_info.value.code == "config_error"

    def test_from_dict(self):
        assert strategy_from_dict({"kind": "tfidf", "n": 4}) == TfidfStrategy(n=4)
        with pytest.raises(StrategyError):
            strategy_from_dict({"kind": "ngrams", "n": 4})


# ===========================================================================
# prune / average_transaction_size / constraint_coverage
# ===========================================================================


class TestPrune:
    def test_dispatch(self, john_corpus: Corpus):
        pairs = _john(john_corpus)
        assert prune(pairs, parse_strategy("dep:I1"))[0].lemmas == {"John"}
        assert len(prune(pairs, TfidfStrategy(n=2))[0]) == 2

    def test_context_is_the_whole_sentence(self, john_corpus: Corpus):
        pruned = prune(_john(john_corpus), parse_strategy("dep:I0"))[0]
        assert pruned.context == frozenset({"John", "give", "Mary", "a", "apple", "."})


class TestAverageTransactionSize:
    def test_singletons(self):
        assert average_transaction_size([{"a"}, {"b"}, {"c"}]) == 1.0

    def test_mixed(self):
        assert average_transaction_size([{"a"}, {"b"}, {"c"}, {"d"}, {"e", "f"}]) == pytest.approx(1.2)

    def test_empty_itemsets_excluded(self):
        assert average_transaction_size([set(), {"a", "b"}, set()]) == 2.0

    def test_no_non_empty_itemset(self):
        with pytest.raises(DomainError):
            average_transaction_size([set(), set()])


class TestConstraintCoverage:
    def test_coverage(self):
        text = "# newdoc id = d\n# class = X\n"
        text += sentence_block("s1", [("Dogs", "dog", "NNS", 2, "nsubj"), ("bark", "bark", "VBP", 0, "root")])
        text += sentence_block("s2", [("Rain", "rain", "NN", 0, "root")])
        sentences = parse_corpus_text(text).sentences()
        assert constraint_coverage(sentences, constraint("I1")) == 0.5
        assert constraint_coverage(sentences, constraint("I0")) == 1.0

    def test_empty(self):
        assert constraint_coverage([], constraint("I0")) == 0.0

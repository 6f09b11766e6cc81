"""Unit tests for car_classifier.rules_io."""
from __future__ import annotations

from pathlib import Path

import pytest

from car_classifier.corpus import Corpus, corpus_digest
from car_classifier.mining import CAR, Itemset, MiningParams, RuleModel, fit
from car_classifier.pruning import parse_strategy
from car_classifier.rules_io import (
    COLUMNS,
    FORMAT_TAG,
    RuleFileError,
    StrategyMismatchError,
    check_compatible,
    escape_item,
    model_header,
    read_rules,
    rules_from_json,
    rules_from_tsv,
    rules_to_json,
    rules_to_tsv,
    unescape_item,
    write_rules,
)


def _small_model(*rules: CAR, strategy: str = "dep:I1") -> RuleModel:
    return RuleModel(
        rules=rules,
        strategy=parse_strategy(strategy),
        hyper_n=0,
        params=MiningParams(min_support=0.25, min_confidence=0.5),
        classes=("C1", "C2"),
        n_transactions=4,
    )


def _same_model(a: RuleModel, b: RuleModel) -> None:
    assert a.rules == b.rules
    assert a.strategy == b.strategy
    assert a.hyper_n == b.hyper_n
    assert a.params == b.params
    assert a.classes == b.classes
    assert a.n_transactions == b.n_transactions
    assert a.frequencies == b.frequencies
    assert a.corpus_sha256 == b.corpus_sha256


@pytest.fixture(scope="module")
def mined(subjects_corpus: Corpus) -> RuleModel:
    return fit(
        subjects_corpus,
        MiningParams(min_support=0.02, min_confidence=0.3),
        parse_strategy("tfidf:N=2"),
        digest=corpus_digest(subjects_corpus),
    )


# ===========================================================================
# Item escaping
# ===========================================================================


class TestEscaping:
    @pytest.mark.parametrize("item", ["a,b", "50%", "tab\there", "two\nlines", "plain"])
    def test_unescape_restores(self, item):
        escaped = escape_item(item)
        assert "," not in escaped and "\t" not in escaped and "\n" not in escaped
        assert unescape_item(escaped) == item

    def test_awkward_items_survive_tsv(self):
        model = _small_model(CAR(Itemset.of("x,y", "100%"), "C1", 2, 2, 4))
        back = rules_from_tsv(rules_to_tsv(model))
        assert back.rules[0].itemset == Itemset.of("x,y", "100%")


# ===========================================================================
# TSV
# ===========================================================================


class TestTsv:
    def test_layout(self):
        text = rules_to_tsv(_small_model(CAR(Itemset.of("apple", "pear"), "C1", 2, 1, 4)))
        lines = text.splitlines()
        assert lines[0] == f"# format = {FORMAT_TAG}"
        assert "# strategy = dep:I1" in lines
        assert "\t".join(COLUMNS) in lines
        assert lines[-1] == "apple,pear\tC1\t0.5\t0.5"

    def test_mined_model_reads_back(self, mined: RuleModel):
        _same_model(rules_from_tsv(rules_to_tsv(mined)), mined)

    def test_rules_are_resorted(self):
        weak = CAR(Itemset.of("a"), "C1", 2, 1, 4)
        strong = CAR(Itemset.of("b"), "C2", 2, 2, 4)
        text = rules_to_tsv(_small_model(weak, strong))
        assert rules_from_tsv(text).rules == (strong, weak)

    def test_not_a_rule_file(self):
        with pytest.raises(RuleFileError, match="not a rule file"):
            rules_from_tsv("# format = other\n# transactions = 1\nITEMS\tCLASS\tSUPPORT\tCONFIDENCE\n")

    def test_missing_column_line(self):
        text = f"# format = {FORMAT_TAG}\n# transactions = 4\na\tC1\t0.5\t1.0\n"
        with pytest.raises(RuleFileError, match="column line") as exc_info:
            rules_from_tsv(text)
        assert exc_info.value.data["line"] == 3
        assert exc_info.value.code == "rule_file_error"

    def test_non_numeric_support(self):
        text = rules_to_tsv(_small_model()) + "a\tC1\thalf\t1.0\n"
        with pytest.raises(RuleFileError, match="non-numeric"):
            rules_from_tsv(text)

    def test_missing_transactions(self):
        text = f"# format = {FORMAT_TAG}\n" + "\t".join(COLUMNS) + "\n"
        with pytest.raises(RuleFileError, match="transactions"):
            rules_from_tsv(text)

    def test_bad_strategy_in_header(self):
        text = rules_to_tsv(_small_model()).replace("dep:I1", "dep:I9")
        with pytest.raises(RuleFileError, match="bad rule-file header"):
            rules_from_tsv(text)


# ===========================================================================
# JSON
# ===========================================================================


class TestJson:
    def test_mined_model_reads_back(self, mined: RuleModel):
        _same_model(rules_from_json(rules_to_json(mined)), mined)

    def test_header_carries_frequencies(self, mined: RuleModel):
        header = model_header(mined)
        assert header["strategy"] == "tfidf:N=2"
        assert header["rules"] == mined.rule_count
        assert header["sentence_frequencies"]["total"] == mined.frequencies.total

    def test_dependency_header_has_no_frequencies(self):
        assert "sentence_frequencies" not in model_header(_small_model())

    def test_malformed(self):
        with pytest.raises(RuleFileError, match="bad JSON"):
            rules_from_json('{"header": {}}')


# ===========================================================================
# Files
# ===========================================================================


class TestFiles:
    def test_format_from_suffix(self, tmp_path: Path):
        model = _small_model(CAR(Itemset.of("a"), "C1", 2, 2, 4))
        path = write_rules(model, tmp_path / "out" / "rules.json")
        assert path.read_text(encoding="utf-8").startswith("{")
        _same_model(read_rules(path), model)

    def test_explicit_format(self, tmp_path: Path):
        model = _small_model(CAR(Itemset.of("a"), "C1", 2, 2, 4))
        path = write_rules(model, tmp_path / "rules.txt", "tsv")
        assert path.read_text(encoding="utf-8").startswith("# format")
        _same_model(read_rules(path), model)

    def test_missing_file(self, tmp_path: Path):
        with pytest.raises(RuleFileError, match="cannot read"):
            read_rules(tmp_path / "absent.tsv")


# ===========================================================================
# check_compatible
# ===========================================================================


class TestCheckCompatible:
    def test_same_settings(self):
        check_compatible(_small_model(), parse_strategy("dep:I1"), 0)

    def test_other_strategy(self):
        with pytest.raises(StrategyMismatchError) as exc_info:
            check_compatible(_small_model(), parse_strategy("dep:I0"), 0)
        assert exc_info.value.code == "strategy_mismatch"
        assert exc_info.value.data["requested"] == "dep:I0"

    def test_other_order(self):
        with pytest.raises(StrategyMismatchError, match="hyper_n=0"):
            check_compatible(_small_model(), parse_strategy("dep:I1"), 2)

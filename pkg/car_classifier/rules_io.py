"""Rule-set files.

Both forms start from the same header: the pruning strategy, hyperonymic
order, thresholds and corpus digest the rules were mined with, so a rule
file can be refused when it is applied with other settings.

TSV::

    # format = car-rules/1
    # strategy = dep:I1
    # hyper_n = 0
    ...
    ITEMS	CLASS	SUPPORT	CONFIDENCE
    apple,pear	GSPO	0.0125	0.8

Items are comma-joined; ``%``, ``,``, TAB and line breaks inside an item are
percent-escaped. Exact counts are recovered from the ``transactions``
header. The JSON form carries the counts directly.
"""

from __future__ import annotations

import json
import logging
from pathlib import Path
from typing import Any, Optional, Union
from urllib.parse import unquote

from pydantic import ValidationError

from .handler_wrappers import HandlerError
from .mining import CAR, Itemset, MiningParams, RuleModel, Strategy, rule_sort_key
from .pruning import SentenceFrequencies, StrategyError, format_strategy, parse_strategy

logger = logging.getLogger(__name__)

FORMAT_TAG = "car-rules/1"
COLUMNS = ("ITEMS", "CLASS", "SUPPORT", "CONFIDENCE")

_ESCAPES = (("%", "%25"), (",", "%2C"), ("\t", "%09"), ("\n", "%0A"), ("\r", "%0D"))


class RuleFileError(HandlerError):
    def __init__(self, message: str, **data: Any) -> None:
        super().__init__(message, code="rule_file_error", **data)


class StrategyMismatchError(HandlerError):
    def __init__(self, message: str, **data: Any) -> None:
        super().__init__(
            message,
            hint="Classify with the strategy and hyperonymic order the rules were mined with",
            code="strategy_mismatch",
            **data,
        )


def escape_item(item: str) -> str:
    for raw, escaped in _ESCAPES:
        item = item.replace(raw, escaped)
    return item


def unescape_item(item: str) -> str:
    return unquote(item)


# ---------------------------------------------------------------------------
# Header
# ---------------------------------------------------------------------------
def model_header(model: RuleModel) -> dict[str, Any]:
    header: dict[str, Any] = {
        "format": FORMAT_TAG,
        "strategy": format_strategy(model.strategy),
        "hyper_n": model.hyper_n,
        "min_support": model.params.min_support,
        "min_confidence": model.params.min_confidence,
        "max_itemset_size": model.params.max_itemset_size,
        "transactions": model.n_transactions,
        "rules": model.rule_count,
        "avg_transaction_size": model.avg_transaction_size,
        "classes": list(model.classes),
        "disambiguation": model.disambiguation,
        "hyperonymize_pos": list(model.hyperonymize_pos),
        "corpus_sha256": model.corpus_sha256 or "",
    }
    if model.frequencies is not None:
        header["sentence_frequencies"] = model.frequencies.to_dict()
    return header


def _model_from_header(header: dict[str, Any], rules: list[CAR], source: str) -> RuleModel:
    if header.get("format") != FORMAT_TAG:
        raise RuleFileError(f"{source}: not a rule file (format {header.get('format')!r})", path=source)
    try:
        params = MiningParams(
            min_support=float(header["min_support"]),
            min_confidence=float(header["min_confidence"]),
            max_itemset_size=int(header["max_itemset_size"]),
        )
        frequencies = header.get("sentence_frequencies")
        return RuleModel(
            rules=tuple(sorted(rules, key=rule_sort_key)),
            strategy=parse_strategy(str(header["strategy"])),
            hyper_n=int(header["hyper_n"]),
            params=params,
            classes=tuple(header.get("classes") or sorted({r.class_label for r in rules})),
            n_transactions=int(header["transactions"]),
            avg_transaction_size=float(header.get("avg_transaction_size", 0.0)),
            frequencies=SentenceFrequencies.from_dict(frequencies) if frequencies else None,
            corpus_sha256=header.get("corpus_sha256") or None,
            disambiguation=header.get("disambiguation", "most_frequent"),
            hyperonymize_pos=tuple(header.get("hyperonymize_pos", ("noun", "verb"))),
        )
    except (KeyError, TypeError, ValueError, ValidationError, StrategyError) as exc:
        raise RuleFileError(f"{source}: bad rule-file header ({exc})", path=source) from None


def check_compatible(model: RuleModel, strategy: Strategy, hyper_n: int) -> None:
    """Refuse to apply ``model`` with settings other than its own."""
    if format_strategy(model.strategy) != format_strategy(strategy):
        raise StrategyMismatchError(
            f"rules were mined with strategy {format_strategy(model.strategy)}, "
            f"not {format_strategy(strategy)}",
            rules_strategy=format_strategy(model.strategy),
            requested=format_strategy(strategy),
        )
    if model.hyper_n != hyper_n:
        raise StrategyMismatchError(
            f"rules were mined with hyper_n={model.hyper_n}, not {hyper_n}",
            rules_hyper_n=model.hyper_n,
            requested=hyper_n,
        )


# ---------------------------------------------------------------------------
# TSV
# ---------------------------------------------------------------------------
def _header_value(value: Any) -> str:
    if isinstance(value, (dict, list)):
        return json.dumps(value, sort_keys=True, separators=(",", ":"))
    return str(value)


def rules_to_tsv(model: RuleModel) -> str:
    lines = [f"# {key} = {_header_value(value)}" for key, value in model_header(model).items()]
    lines.append("\t".join(COLUMNS))
    for rule in model.rules:
        lines.append("\t".join((
            ",".join(escape_item(i) for i in rule.itemset),
            escape_item(rule.class_label),
            repr(rule.support),
            repr(rule.confidence),
        )))
    return "\n".join(lines) + "\n"


def _parse_header_line(line: str) -> tuple[str, Any]:
    key, _, value = line.lstrip("#").partition("=")
    key, value = key.strip(), value.strip()
    if key in ("classes", "hyperonymize_pos", "sentence_frequencies"):
        return key, json.loads(value)
    return key, value


def rules_from_tsv(text: str, source: str = "<string>") -> RuleModel:
    header: dict[str, Any] = {}
    rows: list[list[str]] = []
    seen_columns = False
    for line_no, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        if line.startswith("#"):
            try:
                key, value = _parse_header_line(line)
            except json.JSONDecodeError:
                raise RuleFileError(f"{source}:{line_no}: bad header value", path=source, line=line_no) from None
            header[key] = value
            continue
        fields = line.split("\t")
        if not seen_columns:
            if tuple(fields) != COLUMNS:
                raise RuleFileError(f"{source}:{line_no}: expected column line {COLUMNS}", path=source, line=line_no)
            seen_columns = True
            continue
        if len(fields) != len(COLUMNS):
            raise RuleFileError(f"{source}:{line_no}: expected {len(COLUMNS)} columns", path=source, line=line_no)
        rows.append(fields + [str(line_no)])

    try:
        n = int(header["transactions"])
    except (KeyError, ValueError):
        raise RuleFileError(f"{source}: missing 'transactions' header", path=source) from None
    rules = []
    for items_s, class_s, support_s, confidence_s, line_no in rows:
        try:
            cover = round(float(support_s) * n)
            hits = round(float(confidence_s) * cover)
        except ValueError:
            raise RuleFileError(f"{source}:{line_no}: non-numeric support/confidence", path=source) from None
        items = tuple(unescape_item(i) for i in items_s.split(",")) if items_s else ()
        if not items or cover < 1:
            raise RuleFileError(f"{source}:{line_no}: empty itemset or zero support", path=source)
        rules.append(CAR(Itemset(items), unescape_item(class_s), cover, hits, n))
    return _model_from_header(header, rules, source)


# ---------------------------------------------------------------------------
# JSON
# ---------------------------------------------------------------------------
def rules_to_json(model: RuleModel) -> str:
    payload = {"header": model_header(model), "rules": [r.to_dict() for r in model.rules]}
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def rules_from_json(text: str, source: str = "<string>") -> RuleModel:
    try:
        payload = json.loads(text)
        header = payload["header"]
        n = int(header["transactions"])
        rules = [
            CAR(Itemset(tuple(r["items"])), r["class"], int(r["cover_count"]), int(r["rule_count"]), n)
            for r in payload["rules"]
        ]
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise RuleFileError(f"{source}: bad JSON rule file ({exc})", path=source) from None
    return _model_from_header(header, rules, source)


# ---------------------------------------------------------------------------
# Files
# ---------------------------------------------------------------------------
def write_rules(model: RuleModel, path: Union[str, Path], fmt: Optional[str] = None) -> Path:
    """Write ``model`` as TSV or JSON (by ``fmt`` or the file suffix)."""
    path = Path(path)
    fmt = fmt or ("json" if path.suffix == ".json" else "tsv")
    text = rules_to_json(model) if fmt == "json" else rules_to_tsv(model)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")
    logger.info("Wrote %d rules to %s", model.rule_count, path)
    return path


def read_rules(path: Union[str, Path]) -> RuleModel:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise RuleFileError(f"cannot read rule file {path} ({exc})", path=str(path)) from None
    if text.lstrip().startswith("{"):
        return rules_from_json(text, str(path))
    return rules_from_tsv(text, str(path))

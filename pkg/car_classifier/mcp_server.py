"""MCP server exposing a mined rule set over stdio.

The server loads one rule file at startup and answers three tools:
``classify_document`` classifies corpus-format text, ``list_rules`` pages
through the ranked rules, ``rule_set_info`` returns the rule-file header.
Tool handlers are plain blocking functions registered through ``@Tool``;
``register_tools`` runs them off the event loop with ``asyncio.to_thread``.
"""

import logging
from pathlib import Path
from typing import Any, Optional, Union

from mcp.server.fastmcp import FastMCP

from . import __version__
from .classifier import Classifier
from .corpus import UNLABELED, parse_corpus_text
from .handler_wrappers import HandlerError
from .mining import RuleModel
from .rules_io import model_header
from .tool_decorator import Tool, get_loaded, register_tools, set_loaded
from .wordnet import Lexicon

logger = logging.getLogger(__name__)

SERVER_NAME = "car-classifier"
MAX_LIST_LIMIT = 500


@Tool(
    "classify_document",
    "Classify one or more parsed documents (corpus format: '# newdoc id = ...' "
    "blocks of INDEX SURFACE LEMMA POS HEAD DEPREL token lines). Returns, per "
    "document, the predicted class (null when no rule fires), per-class scores, "
    "variety, dispersion and the rule chosen for every sentence.",
)
def classify_document(text: str) -> dict[str, Any]:
    classifier: Classifier = get_loaded("classifier")
    corpus = parse_corpus_text(text, "<request>", default_class=UNLABELED)
    results = [classifier.classify(doc).to_dict() for doc in corpus.documents]
    return {"documents": len(results), "results": results}


@Tool(
    "list_rules",
    "List mined class association rules in rank order (confidence, then "
    "support, then itemset). Optionally filter by class; page with offset/limit.",
)
def list_rules(class_label: Optional[str] = None, limit: int = 50, offset: int = 0) -> dict[str, Any]:
    model: RuleModel = get_loaded("model")
    if limit < 1 or limit > MAX_LIST_LIMIT:
        raise HandlerError(
            f"limit must be between 1 and {MAX_LIST_LIMIT}", code="validation_error", limit=limit
        )
    if offset < 0:
        raise HandlerError("offset must be >= 0", code="validation_error", offset=offset)
    rules = [r for r in model.rules if class_label is None or r.class_label == class_label]
    page = rules[offset:offset + limit]
    return {
        "total": len(rules),
        "offset": offset,
        "rules": [
            {"rank": offset + i + 1, **rule.to_dict()}
            for i, rule in enumerate(page)
        ],
    }


@Tool("rule_set_info", "Describe the loaded rule set: strategy, hyperonymic order, thresholds, classes, corpus digest.")
def rule_set_info() -> dict[str, Any]:
    model: RuleModel = get_loaded("model")
    header = model_header(model)
    header.pop("sentence_frequencies", None)
    header["rules_path"] = str(get_loaded("rules_path"))
    return header


def create_server(
    model: RuleModel,
    lexicon: Optional[Lexicon] = None,
    *,
    rules_path: Union[str, Path] = "",
    disabled_tools: Optional[list[str]] = None,
) -> FastMCP:
    """Build a FastMCP instance answering from ``model``."""
    set_loaded(classifier=Classifier(model, lexicon), model=model, rules_path=rules_path)
    mcp = FastMCP(SERVER_NAME, instructions=f"car_classifier {__version__}: rule-based document classification")
    registered = register_tools(mcp, disabled_tools=disabled_tools)
    logger.info("MCP server ready with %d rules; tools: %s", model.rule_count, ", ".join(registered))
    return mcp


def run_stdio(mcp: FastMCP) -> None:
    mcp.run(transport="stdio")

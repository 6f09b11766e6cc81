# handler_wrappers.py
"""Shared error type and wrappers for CLI commands and MCP tool handlers.

Error Handling Strategy:
    Library code raises HandlerError subclasses for every expected failure
    (bad corpus line, missing WordNet file, inconsistent configuration).
    Each subclass carries a fixed machine-readable ``code``. Two consumers
    turn them into user-facing output:

    * the CLI maps ``code`` to a process exit status via ``exit_code_for``;
    * MCP tools are wrapped with ``_error_handler``, which formats the code,
      hint and context into the message FastMCP reports with isError=True.
"""

from typing import Any, Callable, Optional
from functools import wraps
import logging

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_CONFIG = 2
EXIT_RUNTIME = 3

# Codes raised while reading inputs whose content is wrong.
_VALIDATION_CODES = frozenset({
    "parse_error",
    "schema_error",
    "tree_error",
    "lexicon_error",
})

# Codes raised when the run itself is misconfigured.
_CONFIG_CODES = frozenset({
    "config_error",
    "validation_error",
    "strategy_mismatch",
    "rule_file_error",
})


# ------------------------------------------------------------------------------
# HandlerError - structured failure with code, hint and context
# ------------------------------------------------------------------------------
# - message: What went wrong
# - hint: Actionable suggestion (optional)
# - code: Machine-readable error code (optional)
# - **data: Extra context like path, line, sentence_id (optional)
#
# Example: raise HandlerError("Unknown synset", hint="Check the id", code="not_found", synset_id="x")
# ------------------------------------------------------------------------------
class HandlerError(Exception):
    """Structured error raised by library code, CLI commands and MCP tools.

    Args:
        message: Description of what went wrong
        hint: Actionable suggestion for the user (optional)
        code: Machine-readable error code (optional). Codes in use:
            - "parse_error" -- malformed corpus line
            - "schema_error" -- missing or duplicated corpus metadata
            - "tree_error" -- dependency heads do not form a tree
            - "lexicon_error" -- WordNet or frequency file problem
            - "not_found" -- unknown synset or missing model
            - "config_error" -- invalid configuration value
            - "validation_error" -- invalid parameters for an operation
            - "domain_error" -- operation undefined for its input
            - "undefined_confidence" -- rule itemset covers no transaction
            - "strategy_mismatch" -- rule file built with other settings
            - "rule_file_error" -- malformed rule file
            - "search_failed" -- threshold search produced nothing
        **data: Extra context (optional)
    """
    def __init__(self, message: str, hint: Optional[str] = None, *, code: Optional[str] = None, **data: Any):
        super().__init__(message)
        self.message = message
        self.hint = hint
        self.code = code
        self.data = data

    def describe(self) -> str:
        """Render message, code, hint and context on one line."""
        msg = self.message
        if self.code:
            msg = f"[{self.code}] {msg}"
        if self.hint:
            msg += f" (hint: {self.hint})"
        if self.data:
            msg += f" (context: {self.data})"
        return msg


def exit_code_for(error: BaseException) -> int:
    """Map an exception to the CLI exit status.

    1 for invalid input data, 2 for configuration problems, 3 for anything
    else (including unexpected exceptions).
    """
    code = getattr(error, "code", None)
    if code in _VALIDATION_CODES:
        return EXIT_VALIDATION
    if code in _CONFIG_CODES:
        return EXIT_CONFIG
    return EXIT_RUNTIME


# ------------------------------------------------------------------------------
# _error_handler - Outermost wrapper for MCP tool handlers
# ------------------------------------------------------------------------------
# Catches HandlerError and re-raises a plain Exception carrying the formatted
# message; FastMCP turns it into an isError=True tool result.
# ------------------------------------------------------------------------------
def _error_handler(func: Callable[..., Any]) -> Callable[..., Any]:
    """Wrap a handler to catch exceptions and format error messages.

    Args:
        func: The handler function to wrap

    Returns:
        Wrapped function that formats and re-raises exceptions
    """
    @wraps(func)
    def wrapper(*args: Any, **kwargs: Any) -> Any:
        try:
            return func(*args, **kwargs)
        except HandlerError as e:
            logger.warning("Handler error: %s (hint: %s, code: %s)", e.message, e.hint, e.code)
            raise Exception(e.describe())
        except Exception as e:
            logger.exception("Unexpected handler error: %s", e)
            raise

    return wrapper


class DomainError(HandlerError):
    """An operation is undefined for its input (empty database, absent lemma, ...)."""

    def __init__(self, message: str, hint: Optional[str] = None, **data: Any) -> None:
        super().__init__(message, hint, code="domain_error", **data)

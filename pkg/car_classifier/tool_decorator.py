from typing import Any, Callable, Optional
from functools import wraps
import asyncio
import inspect
import logging

from .handler_wrappers import HandlerError, _error_handler

logger = logging.getLogger(__name__)

# Global registry storing all tools registered via @Tool decorator
# Key: tool name, Value: dict with name, description, handler (wrapped), original
_registry: dict[str, dict[str, Any]] = {}

# Rule model the tools answer from; set by mcp_server.create_server.
_loaded: dict[str, Any] = {}


# ------------------------------------------------------------------------------
# Tool - Decorator class that registers functions as MCP tools
# ------------------------------------------------------------------------------
# Usage:
#   @Tool("tool_name", "Description for AI")
#   def my_tool(arg: str) -> dict:
#       ...
#
# Parameters:
#   - name: Unique tool identifier exposed to MCP clients
#   - description: Shown to AI to understand when/how to use the tool
#   - require_model: If True (default), checks a rule model is loaded first
#
# What happens at import time:
#   1. Wraps with _require_model if require_model=True
#   2. Wraps with _error_handler (formats HandlerError for FastMCP)
#   3. Stores in _registry for later MCP registration
# ------------------------------------------------------------------------------
class Tool:
    def __init__(
        self,
        name: str,
        description: str,
        handler: Optional[Callable[..., Any]] = None,
        *,
        require_model: bool = True,
    ):
        self.name = name
        self.description = description
        self.require_model = require_model

        # Support both @Tool(...) decorator and Tool(..., handler=fn) direct call
        if handler is not None:
            self._register(handler)

    def __call__(self, func: Callable[..., Any]) -> Callable[..., Any]:
        self._register(func)
        return func  # Original stays directly callable for tests

    def _register(self, func: Callable[..., Any]) -> None:
        if self.name in _registry:
            raise ValueError(f"Tool already registered: {self.name}")

        # Execution order: _error_handler -> _require_model -> func
        wrapped = func
        if self.require_model:
            wrapped = _require_model(wrapped)
        wrapped = _error_handler(wrapped)

        # Preserve original signature for MCP schema generation
        wrapped.__signature__ = inspect.signature(func)  # type: ignore[attr-defined]
        wrapped.__annotations__ = getattr(func, "__annotations__", {})

        _registry[self.name] = {
            "name": self.name,
            "description": self.description,
            "handler": wrapped,
            "original": func,
        }


# ------------------------------------------------------------------------------
# Loaded model access
# ------------------------------------------------------------------------------
def set_loaded(**state: Any) -> None:
    """Replace the state tools read (classifier, model, rules_path)."""
    _loaded.clear()
    _loaded.update(state)


def get_loaded(key: str) -> Any:
    if key not in _loaded:
        raise HandlerError(
            "No rule model loaded",
            hint="Start the server with a rule file: car_classifier serve RULES",
            code="not_found",
        )
    return _loaded[key]


def _require_model(func: Callable[..., Any]) -> Callable[..., Any]:
    @wraps(func)
    def wrapper(*args: Any, **kwargs: Any) -> Any:
        get_loaded("classifier")
        return func(*args, **kwargs)

    return wrapper


# ------------------------------------------------------------------------------
# Tool filtering
# ------------------------------------------------------------------------------
def validate_disabled_tools(disabled_list: list[str]) -> list[str]:
    """Warning messages for disabled_tools entries naming no registered tool."""
    available = ", ".join(sorted(_registry))
    return [
        f"disabled_tools: unknown tool '{name}' (available: {available})"
        for name in disabled_list
        if name not in _registry
    ]


# ------------------------------------------------------------------------------
# register_tools - Create MCP tools from registry
# ------------------------------------------------------------------------------
# Called once at server startup. Tools named in disabled_tools are skipped;
# the rest get an async wrapper that runs the blocking handler on a worker
# thread so the event loop stays free.
# ------------------------------------------------------------------------------
def register_tools(mcp: Any, disabled_tools: Optional[list[str]] = None) -> list[str]:
    disabled = set(disabled_tools or [])
    registered = []
    for name, meta in _registry.items():
        if name in disabled:
            logger.info("Tool disabled by config: %s", name)
            continue
        _make_mcp_tool(mcp, name, meta)
        registered.append(name)

    for msg in validate_disabled_tools(sorted(disabled)):
        logger.warning(msg)
    return registered


def _make_mcp_tool(mcp: Any, name: str, meta: dict[str, Any]) -> None:
    handler = meta["handler"]
    original = meta["original"]

    async def wrapper(**kwargs: Any) -> Any:
        return await asyncio.to_thread(handler, **kwargs)

    # Copy metadata for MCP introspection
    wrapper.__name__ = name
    wrapper.__signature__ = inspect.signature(original)  # type: ignore[attr-defined]
    wrapper.__annotations__ = getattr(original, "__annotations__", {}).copy()

    mcp.tool(description=meta["description"])(wrapper)

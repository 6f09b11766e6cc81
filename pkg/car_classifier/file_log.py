"""Console and rotating file logging plus a diagnostics snapshot.

Handlers are attached to the package logger ``car_classifier`` (never the
root logger), so every ``logging.getLogger(__name__)`` in the package
propagates into them and third-party logging stays untouched. Each handler
carries a tag attribute; initialising twice never stacks duplicates.
"""

from __future__ import annotations

import logging
import logging.handlers
import platform
import sys
from pathlib import Path
from typing import Iterable, Optional, Union

_PACKAGE_LOGGER_NAME = __name__.split(".")[0]

_FILE_HANDLER_TAG = "car_classifier_file_handler"
_CONSOLE_HANDLER_TAG = "car_classifier_console_handler"

LOG_FILENAME = "car_classifier.log"
_MAX_BYTES = 1 * 1024 * 1024
_BACKUP_COUNT = 3

_FORMAT = "%(asctime)s %(levelname)-7s [%(name)s] %(message)s"
_DATEFMT = "%Y-%m-%d %H:%M:%S"

# Reported from sys.modules only; the snapshot never imports them.
_PROVENANCE_MODULES = (
    "numpy",
    "sklearn",
    "networkx",
    "pydantic",
    "mcp",
)


def get_logger() -> logging.Logger:
    """Return the package logger (child loggers propagate into it)."""
    return logging.getLogger(_PACKAGE_LOGGER_NAME)


def _existing_handler(logger: logging.Logger, tag: str) -> Optional[logging.Handler]:
    for handler in logger.handlers:
        if getattr(handler, tag, False):
            return handler
    return None


def _remove_handler(logger: logging.Logger, tag: str) -> None:
    existing = _existing_handler(logger, tag)
    if existing is not None:
        logger.removeHandler(existing)
        try:
            existing.close()
        except Exception:
            pass


def _lower_level(logger: logging.Logger, level: int) -> None:
    if logger.level == logging.NOTSET or logger.level > level:
        logger.setLevel(level)


def verbosity_level(verbosity: int) -> int:
    """0 -> WARNING, 1 -> INFO, 2 or more -> DEBUG."""
    if verbosity <= 0:
        return logging.WARNING
    if verbosity == 1:
        return logging.INFO
    return logging.DEBUG


def init_console_logging(verbosity: int = 0, stream=None) -> None:
    """Attach (or re-level) the stderr handler."""
    logger = get_logger()
    level = verbosity_level(verbosity)
    handler = _existing_handler(logger, _CONSOLE_HANDLER_TAG)
    if handler is None:
        handler = logging.StreamHandler(stream or sys.stderr)
        setattr(handler, _CONSOLE_HANDLER_TAG, True)
        handler.setFormatter(logging.Formatter("%(levelname)s %(name)s: %(message)s"))
        logger.addHandler(handler)
    handler.setLevel(level)
    _lower_level(logger, level)


def init_file_logging(enabled: bool, log_dir: Union[str, Path]) -> Optional[Path]:
    """Configure (or tear down) rotating file logging.

    Idempotent. Failures are printed to stderr and swallowed; logging must
    never abort a run.

    Args:
        enabled: When False, removes our file handler if present.
        log_dir: Directory receiving ``car_classifier.log``.

    Returns:
        The log file path when file logging is active, else None.
    """
    logger = get_logger()
    if not enabled:
        _remove_handler(logger, _FILE_HANDLER_TAG)
        return None

    existing = _existing_handler(logger, _FILE_HANDLER_TAG)
    if existing is not None:
        return Path(existing.baseFilename)  # type: ignore[attr-defined]

    try:
        directory = Path(log_dir)
        directory.mkdir(parents=True, exist_ok=True)
        log_path = directory / LOG_FILENAME
        handler = logging.handlers.RotatingFileHandler(
            log_path, maxBytes=_MAX_BYTES, backupCount=_BACKUP_COUNT, encoding="utf-8"
        )
        setattr(handler, _FILE_HANDLER_TAG, True)
        handler.setLevel(logging.DEBUG)
        handler.setFormatter(logging.Formatter(_FORMAT, datefmt=_DATEFMT))
        logger.addHandler(handler)
        _lower_level(logger, logging.INFO)
        return log_path
    except Exception as exc:  # pragma: no cover
        print(f"car_classifier: failed to initialize file logging: {exc!r}", file=sys.stderr)
        return None


def is_enabled() -> bool:
    """Whether file logging is active."""
    return _existing_handler(get_logger(), _FILE_HANDLER_TAG) is not None


def shutdown() -> None:
    """Remove both handlers; used between CLI runs in one process."""
    logger = get_logger()
    _remove_handler(logger, _FILE_HANDLER_TAG)
    _remove_handler(logger, _CONSOLE_HANDLER_TAG)
    logger.setLevel(logging.NOTSET)


# ---------------------------------------------------------------------------
# Diagnostics snapshot
# ---------------------------------------------------------------------------
def _safe(fn) -> str:
    try:
        return str(fn())
    except Exception as exc:  # pragma: no cover
        return f"<error: {exc!r}>"


def _module_provenance(name: str) -> str:
    """Version and file of an already-loaded module, or ``not loaded``."""
    module = sys.modules.get(name)
    if module is None:
        return "not loaded"
    version = getattr(module, "__version__", None) or "unknown-version"
    file = getattr(module, "__file__", None) or "unknown-path"
    return f"{version}  ({file})"


def build_diagnostics_snapshot(*, version: str, extra_modules: Iterable[str] = ()) -> str:
    lines = ["=" * 60, "car_classifier diagnostics", "=" * 60]
    lines.append(f"Version        : {version}")
    lines.append(f"Python         : {_safe(platform.python_version)}")
    lines.append(f"Platform       : {_safe(platform.platform)}")
    lines.append(f"Machine        : {_safe(platform.machine)}")
    lines.append("")
    lines.append("Loaded module provenance (sys.modules; not force-imported):")
    for name in (*_PROVENANCE_MODULES, *extra_modules):
        lines.append(f"  {name:<12}: {_module_provenance(name)}")
    lines.append("=" * 60)
    return "\n".join(lines)


def log_diagnostics_snapshot(version: str, *, label: str = "startup") -> None:
    """Write the snapshot to the file log; no-op when file logging is off."""
    if not is_enabled():
        return
    try:
        get_logger().info("Diagnostics snapshot (%s):\n%s", label, build_diagnostics_snapshot(version=version))
    except Exception as exc:  # pragma: no cover
        print(f"car_classifier: failed to log diagnostics snapshot: {exc!r}", file=sys.stderr)

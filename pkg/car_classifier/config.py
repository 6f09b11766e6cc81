"""Run configuration.

A ``RunConfig`` names every experiment hyperparameter so a run can be
archived as one JSON file. ``ConfigManager`` layers the sources: dataclass
defaults, then the config file, then environment variables, then
command-line overrides.
"""

from __future__ import annotations

import json
import logging
import os
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Callable, List, Mapping, Optional, Union

from pydantic import ValidationError

from .evaluation import SearchConfig
from .handler_wrappers import HandlerError
from .mining import MiningParams, Strategy
from .pruning import StrategyError, parse_strategy

logger = logging.getLogger(__name__)

DEFAULT_CONFIG_PATH = Path(__file__).with_name("config.json")

# Environment overrides (field name -> variable).
ENV_OVERRIDES = {
    "wordnet_dir": "CAR_WORDNET_DIR",
    "freq_file": "CAR_FREQ_FILE",
}

_FORMATS = ("tsv", "json")
_POLICIES = ("most_frequent", "context_overlap")
_HYPER_POS = ("noun", "verb")


class ConfigError(HandlerError):
    def __init__(self, message: str, hint: Optional[str] = None, **data: Any) -> None:
        super().__init__(message, hint, code="config_error", **data)


@dataclass
class RunConfig:
    """
    Experiment configuration.

    Every field has a default; the shipped config.json mirrors them.
    """

    # Inputs
    corpus_path: str = ""
    wordnet_dir: str = ""
    freq_file: str = ""

    # Pruning, e.g. "dep:I1", "dep:I2'", "tfidf:N=10"
    strategy: str = "dep:I0"
    # Hyperonymic order; 0 keeps words as they are
    hyper_n: int = 0
    disambiguation: str = "most_frequent"
    hyperonymize_pos: List[str] = field(default_factory=lambda: ["noun", "verb"])

    # Mining thresholds; the search starts from these
    min_support: float = 0.01
    min_confidence: float = 0.5
    max_itemset_size: int = 5

    # Threshold search
    target_rules: int = 1000
    tolerance: int = 2
    max_probes: int = 60
    folds: int = 10
    seed: int = 42
    workers: int = 1

    # Outputs
    output_dir: str = "out"
    format: str = "tsv"

    # MCP tools to hide from `serve`
    disabled_tools: List[str] = field(default_factory=list)

    # Rotating file log (car_classifier.log in log_dir)
    log_to_file: bool = False
    log_dir: str = "logs"

    def is_valid(self) -> tuple[bool, str]:
        """
        Check the config.

        Returns:
            Tuple of (is_valid, error_message); the message is empty when valid.

        Examples:
            >>> RunConfig(hyper_n=2).is_valid()
            (False, 'hyper_n > 0 requires wordnet_dir and freq_file')
        """
        if self.hyper_n < 0:
            return False, "hyper_n must be >= 0"
        if self.hyper_n > 0 and not (self.wordnet_dir and self.freq_file):
            return False, "hyper_n > 0 requires wordnet_dir and freq_file"
        if self.format not in _FORMATS:
            return False, f"format must be one of {', '.join(_FORMATS)}"
        if self.disambiguation not in _POLICIES:
            return False, f"disambiguation must be one of {', '.join(_POLICIES)}"
        unknown = [p for p in self.hyperonymize_pos if p not in _HYPER_POS]
        if unknown:
            return False, f"hyperonymize_pos accepts only noun and verb (got {unknown})"
        if self.workers < 1:
            return False, "workers must be >= 1"
        try:
            self.prune_strategy()
            self.mining_params()
            self.search_config()
        except ConfigError as exc:
            return False, exc.message
        return True, ""

    def check(self) -> None:
        ok, message = self.is_valid()
        if not ok:
            raise ConfigError(message)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "RunConfig":
        """
        Create from a dict, using defaults for missing keys.

        Keys that are not fields are ignored, so older or newer config
        files still load.
        """
        return cls(**{k: v for k, v in data.items() if k in cls.__dataclass_fields__})

    # -- typed views --------------------------------------------------------
    def prune_strategy(self) -> Strategy:
        try:
            return parse_strategy(self.strategy)
        except StrategyError as exc:
            raise ConfigError(exc.message, strategy=self.strategy) from None

    def mining_params(self) -> MiningParams:
        try:
            return MiningParams(
                min_support=self.min_support,
                min_confidence=self.min_confidence,
                max_itemset_size=self.max_itemset_size,
            )
        except ValidationError as exc:
            raise ConfigError(f"invalid mining parameters: {_first_error(exc)}") from None

    def search_config(self) -> SearchConfig:
        try:
            return SearchConfig(
                min_support=self.min_support,
                min_confidence=self.min_confidence,
                target_rules=self.target_rules,
                tolerance=self.tolerance,
                seed=self.seed,
                max_probes=self.max_probes,
                folds=self.folds,
                max_itemset_size=self.max_itemset_size,
            )
        except ValidationError as exc:
            raise ConfigError(f"invalid search parameters: {_first_error(exc)}") from None


def _first_error(exc: ValidationError) -> str:
    err = exc.errors()[0]
    where = ".".join(str(p) for p in err.get("loc", ()))
    return f"{where}: {err.get('msg', 'invalid value')}"


def env_overrides(environ: Optional[Mapping[str, str]] = None) -> dict[str, str]:
    environ = os.environ if environ is None else environ
    return {name: environ[var] for name, var in ENV_OVERRIDES.items() if environ.get(var)}


class ConfigManager:
    """
    Loads and saves a RunConfig file.

    ``load`` merges, in increasing precedence: dataclass defaults, the file
    at ``path`` (if any), environment variables and explicit overrides.
    """

    def __init__(self, path: Optional[Union[str, Path]] = None) -> None:
        self._path = Path(path) if path else None
        self._listeners: list[Callable[[RunConfig], None]] = []

    @property
    def path(self) -> Optional[Path]:
        return self._path

    def read_file(self) -> dict:
        if self._path is None:
            return {}
        try:
            raw = json.loads(self._path.read_text(encoding="utf-8"))
        except FileNotFoundError:
            raise ConfigError(f"config file not found: {self._path}", path=str(self._path)) from None
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config file {self._path}: {exc}", path=str(self._path)) from None
        if not isinstance(raw, dict):
            raise ConfigError(f"config file {self._path} must hold a JSON object", path=str(self._path))
        unknown = sorted(set(raw) - set(RunConfig.__dataclass_fields__))
        if unknown:
            logger.warning("Ignoring unknown config keys: %s", ", ".join(unknown))
        return raw

    def load(
        self,
        overrides: Optional[Mapping[str, Any]] = None,
        environ: Optional[Mapping[str, str]] = None,
    ) -> RunConfig:
        merged: dict[str, Any] = {}
        merged.update(self.read_file())
        merged.update(env_overrides(environ))
        merged.update({k: v for k, v in (overrides or {}).items() if v is not None})
        config = RunConfig.from_dict(merged)
        logger.debug("Loaded config: %s", config.to_dict())
        return config

    def save(self, config: RunConfig) -> None:
        if self._path is None:
            raise ConfigError("no config path to save to")
        self._path.parent.mkdir(parents=True, exist_ok=True)
        self._path.write_text(json.dumps(config.to_dict(), indent=2) + "\n", encoding="utf-8")
        for listener in self._listeners:
            listener(config)

    def on_change(self, callback: Callable[[RunConfig], None]) -> None:
        """Register a callback run after each ``save``."""
        self._listeners.append(callback)

    def get_default(self) -> RunConfig:
        return RunConfig()

"""
Configuration Management for the Functional Load Toolkit

Builds a validated JobConfig from three layers: the packaged
``defaults.yaml``, an optional user YAML file (``--config``), and explicit
command-line values. Environment variables supply the log level and the
default degree of parallelism.
"""

import os
from enum import Enum
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional

import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from ..core.errors import ConfigError


class CorpusFormat(str, Enum):
    STREAM = "stream"
    LEXICON = "lexicon"


class OutputFormat(str, Enum):
    TSV = "tsv"
    JSON = "json"
    MARKDOWN = "markdown"


class MissMode(str, Enum):
    SKIP = "skip"
    ERROR = "error"


class JobConfig(BaseModel):
    """One toolkit job. Mirrors every command-line flag."""

    model_config = ConfigDict(populate_by_name=True, extra="forbid", frozen=True)

    schema_file: Optional[str] = Field(None, alias="schema")
    corpus: Optional[str] = None
    corpus_format: CorpusFormat = CorpusFormat.STREAM
    object_type: Optional[str] = Field(None, alias="type")
    contrasts: List[str] = Field(default_factory=list)
    n: int = Field(1, ge=1)
    output: OutputFormat = OutputFormat.TSV
    report_file: Optional[str] = None
    pairs: Optional[List[str]] = None
    atomic_type: Optional[str] = None
    guard: Optional[str] = None
    phoneme: Optional[str] = None
    similar: Optional[str] = None
    join_lexicon: Optional[str] = None
    miss: MissMode = MissMode.ERROR
    jobs: int = Field(1, ge=1)
    consistency_threshold: float = 0.9
    significant_digits: int = Field(12, ge=1, le=17)

    @field_validator("pairs", mode="before")
    @classmethod
    def split_pairs(cls, v: Any) -> Any:
        """Accept ``"a b c"`` as well as a list of symbols."""
        if isinstance(v, str):
            return v.split()
        return v

    @field_validator("contrasts", mode="before")
    @classmethod
    def listify_contrasts(cls, v: Any) -> Any:
        if v is None:
            return []
        if isinstance(v, str):
            return [v]
        return v

    @model_validator(mode="after")
    def check_format_constraints(self) -> "JobConfig":
        if self.corpus_format is CorpusFormat.LEXICON and self.n != 1:
            raise ValueError(f"lexicon corpora support n=1 only, got n={self.n}")
        if self.join_lexicon and self.corpus_format is not CorpusFormat.STREAM:
            raise ValueError("join_lexicon requires a stream corpus")
        return self

    @property
    def pair_type(self) -> Optional[str]:
        """Atomic type the ``pairs`` symbols belong to."""
        return self.atomic_type or self.object_type

    def inputs(self) -> Dict[str, Any]:
        """Input description recorded in report metadata."""
        data = self.model_dump(by_alias=True, exclude_none=True, mode="json")
        data.pop("output", None)
        data.pop("report_file", None)
        data.pop("jobs", None)
        return data


def get_config_dir() -> Path:
    """Get the directory holding the packaged defaults."""
    return Path(__file__).parent


def load_yaml_file(file_path: Path) -> Dict[str, Any]:
    """Load a YAML mapping from ``file_path``."""
    try:
        with open(file_path, "r", encoding="utf-8") as file:
            data = yaml.safe_load(file) or {}
    except FileNotFoundError:
        raise ConfigError(f"Configuration file not found: {file_path}") from None
    except yaml.YAMLError as e:
        raise ConfigError(f"Invalid YAML in {file_path}: {e}") from None
    if not isinstance(data, dict):
        raise ConfigError(f"Configuration file {file_path} must contain a mapping")
    return {str(key).replace("-", "_"): value for key, value in data.items()}


def get_env_config() -> Dict[str, Any]:
    """Get configuration from environment variables."""
    jobs = os.getenv("FLOAD_JOBS")
    try:
        parsed_jobs = int(jobs) if jobs else None
    except ValueError:
        raise ConfigError(f"FLOAD_JOBS must be an integer, got {jobs!r}") from None
    return {
        "log_level": os.getenv("FLOAD_LOG_LEVEL", "WARNING").upper(),
        "jobs": parsed_jobs,
    }


def _canonical_keys(data: Mapping[str, Any]) -> Dict[str, Any]:
    aliases = {"schema_file": "schema", "object_type": "type", "threshold": "consistency_threshold"}
    return {aliases.get(key, key): value for key, value in data.items()}


def load_config(config_path: Optional[str] = None, overrides: Optional[Mapping[str, Any]] = None) -> JobConfig:
    """
    Build the job configuration.

    Args:
        config_path: Optional YAML file with job keys
        overrides: Explicit values (command-line flags); None values are
            treated as unset

    Returns:
        Validated JobConfig

    Raises:
        ConfigError: Unreadable file, unknown key or invalid value
    """
    config: Dict[str, Any] = _canonical_keys(load_yaml_file(get_config_dir() / "defaults.yaml"))

    env_jobs = get_env_config()["jobs"]
    if env_jobs is not None:
        config["jobs"] = env_jobs

    if config_path:
        config.update(_canonical_keys(load_yaml_file(Path(config_path))))

    if overrides:
        config.update(_canonical_keys({k: v for k, v in overrides.items() if v is not None and v != ()}))

    try:
        return JobConfig(**config)
    except ValidationError as e:
        details = "; ".join(
            f"{'.'.join(str(p) for p in err['loc']) or 'config'}: {err['msg']}" for err in e.errors()
        )
        raise ConfigError(f"Configuration validation failed: {details}") from None


__all__ = [
    "CorpusFormat",
    "JobConfig",
    "MissMode",
    "OutputFormat",
    "get_env_config",
    "load_config",
]

"""Run configuration shared by all pipeline stages.

Configuration lives in one INI file. Resolution order: an explicit
path (--config), the NEEDMINER_CONFIG environment variable, then
./needminer.cfg if present, then built-in defaults. Relative paths
inside a config file resolve against the file's own directory so a
run can be moved wholesale; built-in default paths resolve against
the working directory.

Seeding is always explicit (a missing base_seed means 0, never the
wall clock), so two runs with the same config produce byte-identical
artifacts.
"""
from __future__ import annotations

import configparser
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping

from .classify import ALGORITHMS, DEFAULT_HYPERPARAMETERS
from .errors import ConfigError
from .evaluate import PROTOCOL_MODES, Protocol
from .sampling import DEFAULT_SMOTE_K, SAMPLING_STRATEGIES
from .textproc import DEFAULT_KEYWORD_FILE, DEFAULT_STOPWORD_FILE, DEFAULT_SUFFIX_FILE

ENV_VAR = "NEEDMINER_CONFIG"
DEFAULT_FILENAME = "needminer.cfg"

_PATH_KEYS = (
    "corpus",
    "filtered",
    "keywords",
    "stopwords",
    "suffixes",
    "votes",
    "export",
    "dataset",
    "model_dir",
)
# classifier hyperparameter value parsers, keyed like the INI options
_HP_CASTS = {
    "alpha": float,
    "lambda": float,
    "epochs": int,
    "batch_size": int,
    "projection": lambda raw: raw.strip().lower() in ("1", "true", "yes", "on"),
    "candidate_features": int,
    "n_trees": int,
}


@dataclass(frozen=True)
class RunConfig:
    """Typed view of one pipeline configuration."""

    corpus_path: Path = Path("corpus.jsonl")
    filtered_path: Path = Path("filtered.jsonl")
    keywords_path: Path = DEFAULT_KEYWORD_FILE
    stopwords_path: Path = DEFAULT_STOPWORD_FILE
    suffixes_path: Path = DEFAULT_SUFFIX_FILE
    votes_path: Path = Path("votes.jsonl")
    export_path: Path = Path("labels.jsonl")
    dataset_path: Path = Path("dataset.jsonl")
    model_dir: Path = Path("models")
    protocol: Protocol = Protocol()
    sampling_strategy: str = "none"
    smote_k: int = DEFAULT_SMOTE_K
    hyperparameters: Mapping[str, Mapping[str, object]] = field(default_factory=dict)
    service_host: str = "127.0.0.1"
    service_port: int = 8000
    ui_dir: Path | None = None
    source: Path | None = None


def resolve_config_path(explicit: str | Path | None = None) -> Path | None:
    """Which config file applies, if any."""
    if explicit is not None:
        return Path(explicit)
    env = os.environ.get(ENV_VAR)
    if env:
        return Path(env)
    default = Path(DEFAULT_FILENAME)
    if default.is_file():
        return default
    return None


def load_config(explicit: str | Path | None = None) -> RunConfig:
    path = resolve_config_path(explicit)
    if path is None:
        return RunConfig()
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    parser = configparser.ConfigParser(interpolation=None)
    try:
        parser.read_string(path.read_text(encoding="utf-8"), source=str(path))
    except (OSError, configparser.Error) as exc:
        raise ConfigError(f"cannot parse config file {path}: {exc}") from exc
    return _from_parser(parser, path)


def _from_parser(parser: configparser.ConfigParser, path: Path) -> RunConfig:
    base = path.parent
    known_sections = {"paths", "protocol", "sampling", "service"} | {
        f"classifier.{algo}" for algo in ALGORITHMS
    }
    for section in parser.sections():
        if section not in known_sections:
            raise ConfigError(f"unknown config section [{section}] in {path}")

    defaults = RunConfig()
    values: dict[str, object] = {"source": path}

    if parser.has_section("paths"):
        section = parser["paths"]
        for key in section:
            if key not in _PATH_KEYS:
                raise ConfigError(f"unknown [paths] option {key!r} in {path}")
        for key, attr in (
            ("corpus", "corpus_path"),
            ("filtered", "filtered_path"),
            ("keywords", "keywords_path"),
            ("stopwords", "stopwords_path"),
            ("suffixes", "suffixes_path"),
            ("votes", "votes_path"),
            ("export", "export_path"),
            ("dataset", "dataset_path"),
            ("model_dir", "model_dir"),
        ):
            if key in section:
                values[attr] = _resolve(base, section[key])
        # wordlists are inputs to every stage; catch bad paths right away
        for key, attr in (
            ("keywords", "keywords_path"),
            ("stopwords", "stopwords_path"),
            ("suffixes", "suffixes_path"),
        ):
            candidate = values.get(attr, getattr(defaults, attr))
            if key in section and not Path(candidate).is_file():
                raise ConfigError(f"[paths] {key} does not exist: {candidate}")

    if parser.has_section("protocol"):
        section = parser["protocol"]
        for key in section:
            if key not in ("repetitions", "ratio", "base_seed", "mode"):
                raise ConfigError(f"unknown [protocol] option {key!r} in {path}")
        mode = section.get("mode", defaults.protocol.mode)
        if mode not in PROTOCOL_MODES:
            raise ConfigError(f"[protocol] mode must be one of {PROTOCOL_MODES}, got {mode!r}")
        try:
            values["protocol"] = Protocol(
                repetitions=section.getint("repetitions", defaults.protocol.repetitions),
                ratio=section.getfloat("ratio", defaults.protocol.ratio),
                base_seed=section.getint("base_seed", defaults.protocol.base_seed),
                mode=mode,
            )
        except ValueError as exc:
            raise ConfigError(f"invalid [protocol] value in {path}: {exc}") from exc

    if parser.has_section("sampling"):
        section = parser["sampling"]
        for key in section:
            if key not in ("strategy", "smote_k"):
                raise ConfigError(f"unknown [sampling] option {key!r} in {path}")
        strategy = section.get("strategy", defaults.sampling_strategy)
        if strategy not in SAMPLING_STRATEGIES:
            raise ConfigError(
                f"[sampling] strategy must be one of {SAMPLING_STRATEGIES}, got {strategy!r}"
            )
        values["sampling_strategy"] = strategy
        try:
            values["smote_k"] = section.getint("smote_k", defaults.smote_k)
        except ValueError as exc:
            raise ConfigError(f"invalid [sampling] smote_k in {path}: {exc}") from exc
        if values["smote_k"] < 1:
            raise ConfigError("[sampling] smote_k must be >= 1")

    hyperparameters: dict[str, dict[str, object]] = {}
    for algo in ALGORITHMS:
        name = f"classifier.{algo}"
        if not parser.has_section(name):
            continue
        section = parser[name]
        overrides: dict[str, object] = {}
        for key in section:
            if key not in DEFAULT_HYPERPARAMETERS[algo]:
                raise ConfigError(f"unknown [{name}] option {key!r} in {path}")
            try:
                overrides[key] = _HP_CASTS[key](section[key])
            except ValueError as exc:
                raise ConfigError(f"invalid [{name}] {key} in {path}: {exc}") from exc
        if overrides:
            hyperparameters[algo] = overrides
    if hyperparameters:
        values["hyperparameters"] = hyperparameters

    if parser.has_section("service"):
        section = parser["service"]
        for key in section:
            if key not in ("host", "port", "ui_dir"):
                raise ConfigError(f"unknown [service] option {key!r} in {path}")
        values["service_host"] = section.get("host", defaults.service_host)
        try:
            values["service_port"] = section.getint("port", defaults.service_port)
        except ValueError as exc:
            raise ConfigError(f"invalid [service] port in {path}: {exc}") from exc
        if not 0 <= values["service_port"] <= 65535:
            raise ConfigError("[service] port must be in 0..65535")
        if section.get("ui_dir", "").strip():
            values["ui_dir"] = _resolve(base, section["ui_dir"])

    return RunConfig(**values)


def _resolve(base: Path, raw: str) -> Path:
    candidate = Path(raw.strip())
    return candidate if candidate.is_absolute() else base / candidate

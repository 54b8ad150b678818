"""Declarative app configuration: one YAML file, env-var overrides for paths.

Recognized variables: TYPOGEN_CORPUS, TYPOGEN_CODEBOOKS, TYPOGEN_CHECKPOINT,
TYPOGEN_OUTPUT. Budget: keep this tiny, the CLI flags win over everything.
"""
from __future__ import annotations

import os
from dataclasses import dataclass, field
from pathlib import Path

import yaml

from .model import ModelConfig

_ENV_PATHS = {
    "corpus": "TYPOGEN_CORPUS",
    "codebooks": "TYPOGEN_CODEBOOKS",
    "checkpoint": "TYPOGEN_CHECKPOINT",
    "output": "TYPOGEN_OUTPUT",
}


class ConfigError(ValueError):
    pass


@dataclass
class AppConfig:
    corpus: str | None = None
    codebooks: str | None = None
    checkpoint: str | None = None
    output: str | None = None
    model: ModelConfig = field(default_factory=ModelConfig)
    sampling: dict = field(default_factory=dict)  # SamplingConfig keyword defaults
    host: str = "127.0.0.1"
    port: int = 8000
    log_level: str = "info"


def load_config(path: str | Path | None = None) -> AppConfig:
    raw: dict = {}
    if path is not None:
        text = Path(path).read_text()
        loaded = yaml.safe_load(text)
        if loaded is None:
            loaded = {}
        if not isinstance(loaded, dict):
            raise ConfigError(f"{path}: top level must be a mapping")
        raw = loaded
    known = {"paths", "model", "sampling", "host", "port", "log_level"}
    unknown = set(raw) - known
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")

    paths = raw.get("paths", {}) or {}
    if not isinstance(paths, dict):
        raise ConfigError("paths must be a mapping")
    bad = set(paths) - set(_ENV_PATHS)
    if bad:
        raise ConfigError(f"unknown path keys: {sorted(bad)}")
    resolved = {key: paths.get(key) for key in _ENV_PATHS}
    for key, var in _ENV_PATHS.items():
        if os.environ.get(var):
            resolved[key] = os.environ[var]

    model_kwargs = raw.get("model", {}) or {}
    try:
        model = ModelConfig(**model_kwargs)
    except TypeError as exc:
        raise ConfigError(f"model section: {exc}") from exc

    return AppConfig(
        corpus=resolved["corpus"],
        codebooks=resolved["codebooks"],
        checkpoint=resolved["checkpoint"],
        output=resolved["output"],
        model=model,
        sampling=raw.get("sampling", {}) or {},
        host=raw.get("host", "127.0.0.1"),
        port=int(raw.get("port", 8000)),
        log_level=str(raw.get("log_level", "info")),
    )


def require_paths(cfg: AppConfig, *names: str) -> None:
    """Fail fast when a command needs files the config does not point at."""
    missing = [n for n in names if getattr(cfg, n) is None]
    if missing:
        raise ConfigError(f"missing required paths: {missing}")
    absent = [getattr(cfg, n) for n in names if not Path(getattr(cfg, n)).exists()]
    if absent:
        raise ConfigError(f"paths do not exist: {absent}")

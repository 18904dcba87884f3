"""Layered run configuration.

Precedence, lowest to highest: built-in defaults, config file, environment
variables (OCR settings only), explicit overrides (CLI flags). Unknown keys in
a config file are an error rather than a silent typo.
"""
from __future__ import annotations

import dataclasses
import json
import os
from dataclasses import dataclass, field
from typing import Any, Dict, Mapping, Optional

from .detection import DetectorConfig
from .grouping import GroupingConfig


class ConfigError(Exception):
    pass


ENV_OCR_URL = "GUIBLOCKS_OCR_URL"
ENV_OCR_TIMEOUT = "GUIBLOCKS_OCR_TIMEOUT"
ENV_OCR_RETRIES = "GUIBLOCKS_OCR_RETRIES"
ENV_OCR_TOKEN = "GUIBLOCKS_OCR_TOKEN"


@dataclass
class RunConfig:
    detector: DetectorConfig = field(default_factory=DetectorConfig)
    grouping: GroupingConfig = field(default_factory=GroupingConfig)
    ocr_url: Optional[str] = None
    ocr_timeout: float = 10.0
    ocr_retries: int = 2
    ocr_token: Optional[str] = None
    corrections: bool = True
    match_threshold: int = 1


def _coerce(name: str, value: Any, target_type) -> Any:
    if value is None:
        return None
    try:
        if target_type is bool:
            if isinstance(value, bool):
                return value
            if isinstance(value, str):
                if value.lower() in ("1", "true", "yes", "on"):
                    return True
                if value.lower() in ("0", "false", "no", "off"):
                    return False
            raise ValueError(value)
        if target_type is int:
            # Reject silent float truncation ("3.7" is not an int).
            if isinstance(value, float) and value != int(value):
                raise ValueError(value)
            return int(value)
        if target_type is float:
            return float(value)
        return str(value)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad value for {name}: {value!r}") from exc


def _apply_dataclass(obj, section: str, values: Mapping[str, Any]):
    legal = {f.name: f for f in dataclasses.fields(obj)}
    updates = {}
    for key, value in values.items():
        if key not in legal:
            raise ConfigError(f"unknown key {section}.{key}")
        current = getattr(obj, key)
        target = type(current) if current is not None else float
        updates[key] = _coerce(f"{section}.{key}", value, target)
    return dataclasses.replace(obj, **updates)


_OCR_KEYS = {"url": "ocr_url", "timeout": "ocr_timeout", "retries": "ocr_retries", "token": "ocr_token"}


def _apply_mapping(cfg: RunConfig, doc: Mapping[str, Any], source: str) -> RunConfig:
    for key, value in doc.items():
        if key == "detector":
            if not isinstance(value, Mapping):
                raise ConfigError(f"{source}: detector must be an object")
            cfg.detector = _apply_dataclass(cfg.detector, "detector", value)
        elif key == "grouping":
            if not isinstance(value, Mapping):
                raise ConfigError(f"{source}: grouping must be an object")
            cfg.grouping = _apply_dataclass(cfg.grouping, "grouping", value)
        elif key == "ocr":
            if not isinstance(value, Mapping):
                raise ConfigError(f"{source}: ocr must be an object")
            for k, v in value.items():
                if k not in _OCR_KEYS:
                    raise ConfigError(f"{source}: unknown key ocr.{k}")
                attr = _OCR_KEYS[k]
                default = RunConfig.__dataclass_fields__[attr].default
                target = str if attr in ("ocr_url", "ocr_token") else type(default)
                setattr(cfg, attr, _coerce(f"ocr.{k}", v, target))
        elif key == "corrections":
            cfg.corrections = _coerce("corrections", value, bool)
        elif key == "match_threshold":
            cfg.match_threshold = _coerce("match_threshold", value, int)
        else:
            raise ConfigError(f"{source}: unknown key {key}")
    return cfg


def load_config(
    path: Optional[str] = None,
    env: Optional[Mapping[str, str]] = None,
    overrides: Optional[Dict[str, Any]] = None,
) -> RunConfig:
    """Build a RunConfig from file, environment, and explicit overrides.

    ``overrides`` keys are dotted paths ("detector.min_widget_area",
    "grouping.eps_position", "ocr_url", ...), the same shape the CLI produces.
    Values of None in overrides mean "not set".
    """
    cfg = RunConfig()
    if path:
        try:
            with open(path, "r", encoding="utf-8") as fh:
                doc = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"{path}: {exc}") from exc
        if not isinstance(doc, dict):
            raise ConfigError(f"{path}: top level must be an object")
        cfg = _apply_mapping(cfg, doc, path)

    env = os.environ if env is None else env
    if env.get(ENV_OCR_URL):
        cfg.ocr_url = env[ENV_OCR_URL]
    if env.get(ENV_OCR_TIMEOUT):
        cfg.ocr_timeout = _coerce(ENV_OCR_TIMEOUT, env[ENV_OCR_TIMEOUT], float)
    if env.get(ENV_OCR_RETRIES):
        cfg.ocr_retries = _coerce(ENV_OCR_RETRIES, env[ENV_OCR_RETRIES], int)
    if env.get(ENV_OCR_TOKEN):
        cfg.ocr_token = env[ENV_OCR_TOKEN]

    for dotted, value in (overrides or {}).items():
        if value is None:
            continue
        if "." in dotted:
            section, key = dotted.split(".", 1)
            if section == "detector":
                cfg.detector = _apply_dataclass(cfg.detector, "detector", {key: value})
            elif section == "grouping":
                cfg.grouping = _apply_dataclass(cfg.grouping, "grouping", {key: value})
            else:
                raise ConfigError(f"unknown override {dotted}")
        elif dotted in RunConfig.__dataclass_fields__:
            current = getattr(cfg, dotted)
            fdef = RunConfig.__dataclass_fields__[dotted].default
            base = current if current is not None else fdef
            target = type(base) if base is not None else str
            setattr(cfg, dotted, _coerce(dotted, value, target))
        else:
            raise ConfigError(f"unknown override {dotted}")
    return cfg

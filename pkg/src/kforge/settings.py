"""
Run settings: packaged YAML defaults, an optional override file, environment.

Precedence, lowest first: kforge/config/defaults.yaml, the file named by
--config or KFORGE_CONFIG, KFORGE_MAX_DEPTH, explicit CLI flags.
"""

import logging
import os
from dataclasses import dataclass, fields, replace
from pathlib import Path
from typing import Any, Dict, Mapping, Optional, Union

from ruamel.yaml import YAML, YAMLError

from .errors import DomainError, FixtureError

logger = logging.getLogger(__name__)

DEFAULTS_FILE = Path(__file__).parent / "config" / "defaults.yaml"
FORMATS = ("text", "json", "csv")
LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR")


@dataclass(frozen=True)
class Settings:
    max_depth: int = 24
    log_level: str = "INFO"
    format: str = "text"

    def __post_init__(self) -> None:
        if isinstance(self.max_depth, bool) or not isinstance(self.max_depth, int) \
                or self.max_depth < 1:
            raise FixtureError(f"max_depth must be a positive integer, got {self.max_depth!r}")
        if self.format not in FORMATS:
            raise FixtureError(f"format must be one of {', '.join(FORMATS)}, got {self.format!r}")
        if self.log_level not in LOG_LEVELS:
            raise FixtureError(f"unknown log_level {self.log_level!r}")


def get_yaml_from_file(filename: Union[str, Path]) -> Dict[str, Any]:
    """Load a YAML mapping with the safe loader."""
    ryaml = YAML(typ="safe")
    try:
        with open(filename, encoding="utf-8") as stream:
            data = ryaml.load(stream)
    except OSError as exc:
        raise FixtureError(f"cannot read config ({exc.strerror})", path=str(filename))
    except YAMLError as exc:
        raise FixtureError(f"invalid YAML: {exc}", path=str(filename))
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise FixtureError("config must be a mapping", path=str(filename))
    return data


def _merge(base: Settings, overrides: Mapping[str, Any], source: str) -> Settings:
    known = {f.name for f in fields(Settings)}
    unknown = sorted(set(overrides) - known)
    if unknown:
        logger.warning(f"{source}: ignoring unknown setting(s) {', '.join(unknown)}")
    values = {k: v for k, v in overrides.items() if k in known}
    if isinstance(values.get("log_level"), str):
        values["log_level"] = values["log_level"].upper()
    try:
        return replace(base, **values)
    except FixtureError as exc:
        raise FixtureError(exc.message, path=source)


def load_settings(path: Optional[Union[str, Path]] = None,
                  environ: Optional[Mapping[str, str]] = None) -> Settings:
    env = os.environ if environ is None else environ
    settings = _merge(Settings(), get_yaml_from_file(DEFAULTS_FILE), str(DEFAULTS_FILE))
    path = path or env.get("KFORGE_CONFIG")
    if path:
        settings = _merge(settings, get_yaml_from_file(path), str(path))
    raw_depth = env.get("KFORGE_MAX_DEPTH")
    if raw_depth:
        try:
            depth = int(raw_depth)
        except ValueError:
            raise FixtureError(f"KFORGE_MAX_DEPTH is not an integer: {raw_depth!r}")
        settings = _merge(settings, {"max_depth": depth}, "KFORGE_MAX_DEPTH")
    return settings


def resolve_depth(requested: Optional[int], exact_depth: int, settings: Settings) -> int:
    """Depth D for a query: defaults to the exactness depth, capped by max_depth."""
    depth = exact_depth if requested is None else requested
    if depth > settings.max_depth:
        logger.warning(f"depth {depth} clamped to max_depth {settings.max_depth}")
        depth = settings.max_depth
    if depth < exact_depth:
        raise DomainError(f"depth {depth} is below the exactness depth {exact_depth}")
    return depth

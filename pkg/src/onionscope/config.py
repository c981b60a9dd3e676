"""Run configuration: a flat key=value file with environment overrides.

Every key maps to one Config field. Environment variables named
ONIONSCOPE_<KEY> (upper-cased field name) override file values, which
override the built-in defaults.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Mapping, Optional

ENV_PREFIX = "ONIONSCOPE_"


class ConfigError(ValueError):
    pass


@dataclass
class Config:
    storage_dir: str = "onionscope-data"
    world_dir: str = ""
    politeness_delay: float = 1.0
    max_inflight_per_domain: int = 2
    check_interval: float = 3600.0
    update_interval: float = 86400.0
    max_attempts: int = 3
    hd_threshold: int = 10
    pce_threshold: float = 60.0
    outlier_contamination: float = 0.05
    min_forwards: int = 2
    request_timeout: float = 60.0
    user_agent: str = "onionscope/0.1"
    # live fetch pool, "host:port:capacity" entries separated by commas
    proxy_endpoints: str = ""
    api_host: str = "127.0.0.1"
    api_port: int = 8080
    seed: int = 0

    @property
    def tables_dir(self) -> Path:
        return Path(self.storage_dir) / "tables"

    @property
    def files_dir(self) -> Path:
        return Path(self.storage_dir) / "files"

    def endpoint_specs(self) -> list[tuple[str, int, int]]:
        """Parsed proxy endpoints as (host, port, capacity) triples."""
        out = []
        for chunk in self.proxy_endpoints.split(","):
            chunk = chunk.strip()
            if not chunk:
                continue
            parts = chunk.split(":")
            if len(parts) != 3:
                raise ConfigError(
                    f"proxy endpoint {chunk!r} is not host:port:capacity")
            host, port_s, cap_s = parts
            try:
                out.append((host, int(port_s), int(cap_s)))
            except ValueError as exc:
                raise ConfigError(f"proxy endpoint {chunk!r}: {exc}") from exc
        return out


_FIELD_TYPES = {f.name: type(getattr(Config(), f.name)) for f in fields(Config)}


def _convert(key: str, raw: str):
    target = _FIELD_TYPES[key]
    if target is str:
        return raw
    try:
        return target(raw)
    except ValueError as exc:
        raise ConfigError(f"{key}: {raw!r} is not a valid {target.__name__}") from exc


def parse_config(text: str) -> dict[str, str]:
    """key = value lines; blank lines and #-comments ignored; unknown keys
    and lines without '=' rejected."""
    values: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key = value")
        key, _, value = line.partition("=")
        key = key.strip()
        if key not in _FIELD_TYPES:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        values[key] = value.strip()
    return values


def load_config(
    path: Optional[str | Path] = None,
    env: Optional[Mapping[str, str]] = None,
) -> Config:
    env = os.environ if env is None else env
    values: dict[str, str] = {}
    if path is not None:
        text = Path(path).read_text()
        values.update(parse_config(text))
    for name in _FIELD_TYPES:
        override = env.get(ENV_PREFIX + name.upper())
        if override is not None:
            values[name] = override
    return Config(**{k: _convert(k, v) for k, v in values.items()})

"""Tracking detection: versioned JS blacklist plus a max-margin model."""

from __future__ import annotations

from importlib import resources
from pathlib import Path
from typing import Optional, Sequence


class BlacklistFormatError(ValueError):
    pass


def parse_blacklist(text: str) -> tuple[int, tuple[str, ...]]:
    """Read the versioned blacklist format: a version=N header line, then
    one exact-match entry per line; '#' comments and blanks ignored."""
    version: Optional[int] = None
    entries: list[str] = []
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("version="):
            try:
                version = int(line.split("=", 1)[1])
            except ValueError as exc:
                raise BlacklistFormatError(f"bad version line: {raw!r}") from exc
            continue
        entries.append(line)
    if version is None:
        raise BlacklistFormatError("blacklist missing version= header")
    if not entries:
        raise BlacklistFormatError("blacklist has no entries")
    return version, tuple(entries)


def load_blacklist(path: Optional[str | Path] = None) -> tuple[int, tuple[str, ...]]:
    """The packaged default list, or a caller-supplied file."""
    if path is not None:
        return parse_blacklist(Path(path).read_text())
    text = resources.files("onionscope.data").joinpath(
        "tracking_blacklist.cfg").read_text()
    return parse_blacklist(text)


def scripts_hit_blacklist(script_bodies: Sequence[str],
                          entries: Sequence[str]) -> tuple[bool, ...]:
    joined = "\n".join(script_bodies)
    return tuple(entry in joined for entry in entries)

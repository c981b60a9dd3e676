"""Canonical domain types and onion/URL validation shared by every pipeline stage.

Kept dependency-free (stdlib only) so any module can import it without cycles.
"""

from __future__ import annotations

import base64
import hashlib
import re
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional
from urllib.parse import urljoin, urlsplit

_BASE32_RE = re.compile(r"^[a-z2-7]+$")

# v3 name layout: base32(pubkey[32] || checksum[2] || version[1]) -> 56 chars
_V3_CHECKSUM_PREFIX = b".onion checksum"
_V3_VERSION = 3

_SUPPORTED_SCHEMES = {"http", "https"}
_DEFAULT_PORTS = {"http": 80, "https": 443}


class OnionVersion(Enum):
    V2 = 2
    V3 = 3


class InvalidOnionHost(ValueError):
    """A host under .onion that is not a well-formed v2/v3 name."""


@dataclass(frozen=True, slots=True)
class OnionDomain:
    """A validated onion name, stored without the trailing ``.onion``."""

    name: str
    version: OnionVersion

    @property
    def host(self) -> str:
        return self.name + ".onion"

    def __str__(self) -> str:
        return self.host


def v3_checksum(pubkey: bytes, version: int = _V3_VERSION) -> bytes:
    """Two-byte checksum embedded in a v3 name, per the v3 address construction."""
    digest = hashlib.sha3_256(
        _V3_CHECKSUM_PREFIX + pubkey + bytes([version])
    ).digest()
    return digest[:2]


def v3_name_from_pubkey(pubkey: bytes) -> str:
    """Build the 56-character v3 name for a 32-byte public key."""
    if len(pubkey) != 32:
        raise ValueError("v3 public key must be 32 bytes")
    blob = pubkey + v3_checksum(pubkey) + bytes([_V3_VERSION])
    return base64.b32encode(blob).decode("ascii").lower()


def parse_onion_domain(host: str) -> Optional[OnionDomain]:
    """Classify a hostname as an onion domain.

    Returns None for hosts outside .onion. Raises InvalidOnionHost for
    malformed .onion hosts (wrong length, alphabet violation, bad v3
    checksum, or wrong version byte). Hosts are lowercased unconditionally;
    subdomain labels before the onion label are ignored.
    """
    h = host.strip().lower().rstrip(".")
    if not h.endswith(".onion"):
        return None
    name = h[: -len(".onion")].split(".")[-1]
    if len(name) == 16:
        if not _BASE32_RE.match(name):
            raise InvalidOnionHost(f"bad v2 alphabet: {name!r}")
        return OnionDomain(name, OnionVersion.V2)
    if len(name) == 56:
        if not _BASE32_RE.match(name):
            raise InvalidOnionHost(f"bad v3 alphabet: {name!r}")
        blob = base64.b32decode(name.upper())
        pubkey, checksum, version = blob[:32], blob[32:34], blob[34]
        if version != _V3_VERSION:
            raise InvalidOnionHost(f"bad v3 version byte {version} in {name!r}")
        if checksum != v3_checksum(pubkey, version):
            raise InvalidOnionHost(f"v3 checksum mismatch in {name!r}")
        return OnionDomain(name, OnionVersion.V3)
    raise InvalidOnionHost(f"onion label has length {len(name)}: {name!r}")


def is_onion_host(host: str) -> bool:
    """True iff host is a well-formed .onion name."""
    try:
        return parse_onion_domain(host) is not None
    except InvalidOnionHost:
        return False


def _remove_dot_segments(path: str) -> str:
    # RFC 3986 section 5.2.4, specialised to already-absolute paths.
    output: list[str] = []
    for segment in path.split("/"):
        if segment == ".":
            continue
        if segment == "..":
            if output:
                output.pop()
            continue
        output.append(segment)
    normalized = "/".join(output)
    if path.endswith(("/.", "/..")) and not normalized.endswith("/"):
        normalized += "/"
    if not normalized.startswith("/"):
        normalized = "/" + normalized
    return normalized


@dataclass(frozen=True, slots=True)
class WebUrl:
    """Canonical absolute URL: lowercased host, default port elided, path
    normalized, fragment stripped. The canonical string form is unique per
    resource, so WebUrl values can key visited tables and document stores."""

    scheme: str
    host: str
    port: Optional[int]
    path: str
    query: str
    is_onion: bool = field(compare=False)

    def __str__(self) -> str:
        netloc = self.host if self.port is None else f"{self.host}:{self.port}"
        url = f"{self.scheme}://{netloc}{self.path}"
        if self.query:
            url += "?" + self.query
        return url

    @property
    def onion_domain(self) -> Optional[OnionDomain]:
        if not self.is_onion:
            return None
        try:
            return parse_onion_domain(self.host)
        except InvalidOnionHost:
            return None

    def with_path(self, path: str, query: str = "") -> "WebUrl":
        return WebUrl(self.scheme, self.host, self.port,
                      _remove_dot_segments(path), query, self.is_onion)


def canonicalize_url(raw: str, base: Optional[WebUrl] = None) -> Optional[WebUrl]:
    """Resolve an href/src value against ``base`` and canonicalize it.

    Returns None for unparseable inputs or unsupported schemes (anything
    other than http/https). Canonicalization is idempotent.
    """
    raw = raw.strip()
    if base is not None:
        raw = urljoin(str(base), raw)
    try:
        parts = urlsplit(raw)
    except ValueError:
        return None
    scheme = parts.scheme.lower()
    if scheme not in _SUPPORTED_SCHEMES:
        return None
    host = (parts.hostname or "").strip().rstrip(".")
    if not host:
        return None
    try:
        port = parts.port
    except ValueError:
        return None
    if port == _DEFAULT_PORTS[scheme]:
        port = None
    path = _remove_dot_segments(parts.path or "/")
    return WebUrl(
        scheme=scheme,
        host=host,
        port=port,
        path=path,
        query=parts.query,
        is_onion=host.endswith(".onion"),
    )


def parse_url(raw: str) -> WebUrl:
    """Strict variant of canonicalize_url for trusted/config inputs."""
    url = canonicalize_url(raw)
    if url is None:
        raise ValueError(f"not a supported absolute URL: {raw!r}")
    return url


@dataclass(slots=True)
class ImageHashRecord:
    """Hash-level record of one image found on a page; image bytes are never
    persisted, only hashes and an optional fingerprint filestore key."""

    page_url: str
    perceptual_hash: int
    width: Optional[int]
    height: Optional[int]
    format_tag: str
    prnu_ref: Optional[str] = None
    src_url: str = ""

    def to_json(self) -> dict:
        return {
            "page_url": self.page_url,
            "perceptual_hash": f"{self.perceptual_hash:016x}",
            "width": self.width,
            "height": self.height,
            "format_tag": self.format_tag,
            "prnu_ref": self.prnu_ref,
            "src_url": self.src_url,
        }

    @classmethod
    def from_json(cls, d: dict) -> "ImageHashRecord":
        return cls(
            page_url=d["page_url"],
            perceptual_hash=int(d["perceptual_hash"], 16),
            width=d["width"],
            height=d["height"],
            format_tag=d["format_tag"],
            prnu_ref=d.get("prnu_ref"),
            src_url=d.get("src_url", ""),
        )


@dataclass(slots=True)
class PageDocument:
    """One crawled URL, uniquely identified by its canonical URL string."""

    url: WebUrl
    final_url: WebUrl
    fetched_at: float
    status_code: int
    headers: dict[str, str]
    raw_html_ref: Optional[str] = None
    rendered_html_ref: Optional[str] = None
    out_urls: list[WebUrl] = field(default_factory=list)
    image_hashes: list[ImageHashRecord] = field(default_factory=list)
    script_refs: list[str] = field(default_factory=list)
    style_refs: list[str] = field(default_factory=list)
    address_candidates: list[str] = field(default_factory=list)
    is_homepage: bool = False

    @property
    def doc_id(self) -> str:
        return str(self.url)

    def to_json(self) -> dict:
        return {
            "url": str(self.url),
            "final_url": str(self.final_url),
            "fetched_at": self.fetched_at,
            "status_code": self.status_code,
            "headers": self.headers,
            "raw_html_ref": self.raw_html_ref,
            "rendered_html_ref": self.rendered_html_ref,
            "out_urls": [str(u) for u in self.out_urls],
            "image_hashes": [h.to_json() for h in self.image_hashes],
            "script_refs": self.script_refs,
            "style_refs": self.style_refs,
            "address_candidates": self.address_candidates,
            "is_homepage": self.is_homepage,
        }

    @classmethod
    def from_json(cls, d: dict) -> "PageDocument":
        return cls(
            url=parse_url(d["url"]),
            final_url=parse_url(d["final_url"]),
            fetched_at=d["fetched_at"],
            status_code=d["status_code"],
            headers=d["headers"],
            raw_html_ref=d.get("raw_html_ref"),
            rendered_html_ref=d.get("rendered_html_ref"),
            out_urls=[parse_url(u) for u in d.get("out_urls", [])],
            image_hashes=[ImageHashRecord.from_json(h) for h in d.get("image_hashes", [])],
            script_refs=d.get("script_refs", []),
            style_refs=d.get("style_refs", []),
            address_candidates=d.get("address_candidates", []),
            is_homepage=d.get("is_homepage", False),
        )


@dataclass(slots=True)
class DomainRecord:
    """Per-onion-domain aggregate: status history plus classifier outputs.

    Classifier fields stay None until an analysis run fills them in.
    status_history timestamps are strictly increasing (enforced by the
    frontier's record_status).
    """

    domain: str
    version: str
    status_history: list[tuple[float, bool]] = field(default_factory=list)
    language: Optional[str] = None
    illicit: Optional[bool] = None
    illicit_score: Optional[float] = None
    category: Optional[str] = None
    template_cluster_id: Optional[int] = None
    tracking: Optional[bool] = None
    attributed_addresses: list[str] = field(default_factory=list)
    page_count: int = 0

    def to_json(self) -> dict:
        return {
            "domain": self.domain,
            "version": self.version,
            "status_history": [[t, up] for t, up in self.status_history],
            "language": self.language,
            "illicit": self.illicit,
            "illicit_score": self.illicit_score,
            "category": self.category,
            "template_cluster_id": self.template_cluster_id,
            "tracking": self.tracking,
            "attributed_addresses": self.attributed_addresses,
            "page_count": self.page_count,
        }

    @classmethod
    def from_json(cls, d: dict) -> "DomainRecord":
        rec = cls(domain=d["domain"], version=d["version"])
        rec.status_history = [(t, up) for t, up in d.get("status_history", [])]
        rec.language = d.get("language")
        rec.illicit = d.get("illicit")
        rec.illicit_score = d.get("illicit_score")
        rec.category = d.get("category")
        rec.template_cluster_id = d.get("template_cluster_id")
        rec.tracking = d.get("tracking")
        rec.attributed_addresses = d.get("attributed_addresses", [])
        rec.page_count = d.get("page_count", 0)
        return rec


CATEGORIES = ("social media", "marketplace", "pornography", "indexer", "crypto", "other")

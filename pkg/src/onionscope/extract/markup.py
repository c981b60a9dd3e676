"""Single-pass HTML scanner feeding every markup-derived feature.

One traversal produces the pre-order DOM sequence, visible text with
ancestor context, link/asset references, inline script and style bodies,
and client-side redirect directives. Ancestor snapshots on text and
attribute nodes are what the address-context flags are computed from.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from html.parser import HTMLParser
from typing import Optional

VOID_ELEMENTS = {
    "area", "base", "br", "col", "embed", "hr", "img", "input",
    "link", "meta", "param", "source", "track", "wbr",
}

_WS_RE = re.compile(r"\s+")


@dataclass(slots=True)
class ImageRef:
    src: Optional[str]
    alt: str
    width: Optional[int]
    height: Optional[int]


@dataclass(slots=True)
class PageScan:
    """Everything one pass over the markup yields."""

    dom_sequence: list[str] = field(default_factory=list)
    text_nodes: list[tuple[str, frozenset[str]]] = field(default_factory=list)
    links: list[str] = field(default_factory=list)          # href values of <a>
    url_attrs: list[tuple[str, frozenset[str]]] = field(default_factory=list)
    images: list[ImageRef] = field(default_factory=list)
    inline_scripts: list[str] = field(default_factory=list)
    external_scripts: list[str] = field(default_factory=list)  # src values
    inline_styles: list[str] = field(default_factory=list)
    external_styles: list[str] = field(default_factory=list)   # href values
    meta_refresh_url: Optional[str] = None
    forms: int = 0


def _to_int(value: Optional[str]) -> Optional[int]:
    if value is None:
        return None
    m = re.match(r"\s*(\d+)", value)
    return int(m.group(1)) if m else None


class _Scanner(HTMLParser):
    def __init__(self) -> None:
        super().__init__(convert_charrefs=True)
        self.scan = PageScan()
        self.stack: list[str] = []
        self._script_buf: Optional[list[str]] = None
        self._style_buf: Optional[list[str]] = None

    # -- tag handling ------------------------------------------------

    def handle_starttag(self, tag, attrs):
        self._open(tag, dict(attrs), self_closing=False)

    def handle_startendtag(self, tag, attrs):
        self._open(tag, dict(attrs), self_closing=True)

    def _open(self, tag: str, attrs: dict, self_closing: bool) -> None:
        scan = self.scan
        scan.dom_sequence.append(tag)
        ancestors = frozenset(self.stack + [tag])

        if tag == "a":
            href = attrs.get("href")
            if href:
                scan.links.append(href)
                scan.url_attrs.append((href, ancestors))
        elif tag == "img":
            src = attrs.get("src")
            scan.images.append(ImageRef(
                src=src,
                alt=attrs.get("alt", "") or "",
                width=_to_int(attrs.get("width")),
                height=_to_int(attrs.get("height")),
            ))
            if src:
                scan.url_attrs.append((src, ancestors))
        elif tag == "script":
            src = attrs.get("src")
            if src:
                scan.external_scripts.append(src)
                scan.url_attrs.append((src, ancestors))
            elif not self_closing:
                self._script_buf = []
        elif tag == "link":
            rel = (attrs.get("rel") or "").lower()
            href = attrs.get("href")
            if href and "stylesheet" in rel:
                scan.external_styles.append(href)
                scan.url_attrs.append((href, ancestors))
        elif tag == "style":
            if not self_closing:
                self._style_buf = []
        elif tag == "meta":
            equiv = (attrs.get("http-equiv") or "").lower()
            if equiv == "refresh" and scan.meta_refresh_url is None:
                content = attrs.get("content") or ""
                m = re.search(r"url\s*=\s*['\"]?([^'\";]+)", content, re.I)
                if m:
                    scan.meta_refresh_url = m.group(1).strip()
        elif tag == "form":
            scan.forms += 1
            action = attrs.get("action")
            if action:
                scan.url_attrs.append((action, ancestors))

        if not self_closing and tag not in VOID_ELEMENTS:
            self.stack.append(tag)

    def handle_endtag(self, tag):
        if tag == "script" and self._script_buf is not None:
            self.scan.inline_scripts.append("".join(self._script_buf))
            self._script_buf = None
        elif tag == "style" and self._style_buf is not None:
            self.scan.inline_styles.append("".join(self._style_buf))
            self._style_buf = None
        # lenient close: pop to the nearest matching open tag, if any
        if tag in self.stack:
            while self.stack:
                if self.stack.pop() == tag:
                    break

    # -- character data ----------------------------------------------

    def handle_data(self, data):
        if self._script_buf is not None:
            self._script_buf.append(data)
            return
        if self._style_buf is not None:
            self._style_buf.append(data)
            return
        if data.strip():
            self.scan.text_nodes.append((data, frozenset(self.stack)))


def scan_markup(markup: str) -> PageScan:
    scanner = _Scanner()
    try:
        scanner.feed(markup)
        scanner.close()
    except Exception:
        # tolerate pathological markup; keep whatever was scanned
        pass
    # unterminated script/style blocks
    if scanner._script_buf is not None:
        scanner.scan.inline_scripts.append("".join(scanner._script_buf))
    if scanner._style_buf is not None:
        scanner.scan.inline_styles.append("".join(scanner._style_buf))
    return scanner.scan


def collapse_whitespace(text: str) -> str:
    return _WS_RE.sub(" ", text).strip()


def clean_text(markup: str) -> str:
    """Visible text only: script/style/comment content removed, entities
    decoded, whitespace collapsed to single spaces, lowercased. Idempotent
    on its own output."""
    scan = scan_markup(markup)
    joined = " ".join(piece for piece, _ in scan.text_nodes)
    return collapse_whitespace(joined).lower()


def char_trigrams(text: str) -> set[str]:
    """Boolean presence set of all contiguous 3-character substrings."""
    return {text[i : i + 3] for i in range(len(text) - 2)}


def dom_sequence(markup: str) -> list[str]:
    return scan_markup(markup).dom_sequence


_CSS_COMMENT_RE = re.compile(r"/\*.*?\*/", re.S)


def css_rule_sequence(stylesheet: str) -> list[str]:
    """Ordered top-level selector strings of one stylesheet. An unparseable
    (brace-unbalanced) sheet yields an empty sequence."""
    text = _CSS_COMMENT_RE.sub("", stylesheet)
    selectors: list[str] = []
    depth = 0
    buf: list[str] = []
    for ch in text:
        if ch == "{":
            if depth == 0:
                sel = "".join(buf).strip()
                sel = _WS_RE.sub(" ", sel)
                if sel:
                    selectors.append(sel)
                buf = []
            depth += 1
        elif ch == "}":
            depth -= 1
            if depth < 0:
                return []
        elif depth == 0:
            buf.append(ch)
    if depth != 0:
        return []
    return selectors


_WINDOW_LOCATION_RE = re.compile(
    r"""(?:(?:window|document|self|top)\s*\.\s*|(?<![.\w]))location
        (?:\s*\.\s*href)?\s*=\s*(['"])([^'"]+)\1""",
    re.X,
)
_LOCATION_REPLACE_RE = re.compile(
    r"""location\s*\.\s*(?:replace|assign)\s*\(\s*(['"])([^'"]+)\1\s*\)""",
)


def find_script_location_redirect(markup: str) -> Optional[str]:
    """URL of a top-level script statement assigning a string literal to
    window.location (or .href), if the page carries one."""
    scan = scan_markup(markup)
    for script in scan.inline_scripts:
        m = _WINDOW_LOCATION_RE.search(script) or _LOCATION_REPLACE_RE.search(script)
        if m:
            return m.group(2).strip()
    return None


def find_meta_refresh(markup: str) -> Optional[str]:
    return scan_markup(markup).meta_refresh_url

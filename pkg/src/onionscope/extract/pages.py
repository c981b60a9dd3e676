"""Turn a fetch result into a PageDocument plus analysis-ready side data."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .. import imaging
from ..fetch import FetchResult
from ..model import ImageHashRecord, PageDocument, WebUrl, canonicalize_url
from . import addresses as addr_mod
from . import markup as markup_mod

CONTEXT_FLAGS = (
    "in_anchor",
    "in_url",
    "in_form",
    "in_footer",
    "in_table",
    "in_list",
    "in_img",
    "near_donate_or_pay",
    "near_example",
)

# "near" means within this many characters in the cleaned page text.
NEAR_WINDOW = 50
DONATE_KEYWORDS = ("donate", "donation", "pay", "payment")
EXAMPLE_KEYWORDS = ("example", "sample")

_TAG_CONTEXTS = {
    "a": "in_anchor",
    "form": "in_form",
    "footer": "in_footer",
    "table": "in_table",
}


@dataclass(slots=True)
class AddressCandidate:
    """A checksum-valid address occurrence set on one page, with the layout
    and wording contexts the attribution classifier consumes."""

    address: str
    page_url: str
    contexts: set[str] = field(default_factory=set)
    count_on_page: int = 0


def _ancestor_flags(ancestors: frozenset[str]) -> set[str]:
    flags = {flag for tag, flag in _TAG_CONTEXTS.items() if tag in ancestors}
    if "li" in ancestors or "ul" in ancestors:
        flags.add("in_list")
    return flags


def _near(text: str, address: str, keywords: tuple[str, ...]) -> bool:
    needle = address.lower()
    start = text.find(needle)
    while start != -1:
        lo = max(0, start - NEAR_WINDOW)
        hi = min(len(text), start + len(needle) + NEAR_WINDOW)
        window = text[lo:hi]
        if any(kw in window for kw in keywords):
            return True
        start = text.find(needle, start + 1)
    return False


def extract_addresses(
    page_markup: str,
    cleaned: Optional[str] = None,
    page_url: str = "",
) -> list[AddressCandidate]:
    """Scan markup text and URL-bearing attributes for validated addresses
    and compute their context flags. Checksum-invalid hits never surface."""
    scan = markup_mod.scan_markup(page_markup)
    if cleaned is None:
        joined = " ".join(piece for piece, _ in scan.text_nodes)
        cleaned = markup_mod.collapse_whitespace(joined).lower()

    found: dict[str, AddressCandidate] = {}

    def note(address: str, flags: set[str]) -> None:
        cand = found.get(address)
        if cand is None:
            cand = AddressCandidate(address, page_url)
            found[address] = cand
        cand.contexts |= flags
        cand.count_on_page += 1

    for piece, ancestors in scan.text_nodes:
        for address in addr_mod.scan_addresses(piece):
            note(address, _ancestor_flags(ancestors))

    for value, ancestors in scan.url_attrs:
        for address in addr_mod.scan_addresses(value):
            note(address, _ancestor_flags(ancestors) | {"in_url"})

    for image in scan.images:
        haystacks = [image.alt or ""]
        if image.src:
            haystacks.append(image.src)
        for hay in haystacks:
            for address in addr_mod.scan_addresses(hay):
                note(address, {"in_img"})

    for cand in found.values():
        if _near(cleaned, cand.address, DONATE_KEYWORDS):
            cand.contexts.add("near_donate_or_pay")
        if _near(cleaned, cand.address, EXAMPLE_KEYWORDS):
            cand.contexts.add("near_example")

    return sorted(found.values(), key=lambda c: c.address)


@dataclass(slots=True)
class ParsedPage:
    """PageDocument plus the bodies and pixels the pipeline persists/hashes."""

    document: PageDocument
    cleaned_text: str
    raw_html: str
    rendered_html: str
    scripts: list[str]
    styles: list[str]
    onion_links: list[WebUrl]
    regular_links: list[WebUrl]
    candidates: list[AddressCandidate]
    camera_pixels: list[tuple[int, np.ndarray]]  # index into image_hashes


def parse_page(result: FetchResult, job_url: WebUrl, is_homepage: bool = False) -> ParsedPage:
    """Extract PageDocument fields from a fetch result.

    Out-links are canonicalized and partitioned into onion vs regular;
    embedded and external script/style bodies are captured; images get a
    difference hash plus dimensions (declared attributes, or the decoded
    size when bytes are available). A non-HTML final hop yields a document
    with headers only.
    """
    rendered = result.rendered_html or ""
    raw = result.raw_html or rendered
    scan = markup_mod.scan_markup(rendered)
    cleaned = markup_mod.clean_text(rendered)

    onion_links: list[WebUrl] = []
    regular_links: list[WebUrl] = []
    seen: set[str] = set()
    for href in scan.links:
        link = canonicalize_url(href, base=result.final_url)
        if link is None or str(link) in seen:
            continue
        seen.add(str(link))
        (onion_links if link.is_onion else regular_links).append(link)

    scripts = list(scan.inline_scripts)
    styles = list(scan.inline_styles)
    for ref in scan.external_scripts:
        asset_url = canonicalize_url(ref, base=result.final_url)
        body = result.assets.get(str(asset_url)) if asset_url else None
        if body is not None:
            scripts.append(body.decode("utf-8", errors="replace"))
    for ref in scan.external_styles:
        asset_url = canonicalize_url(ref, base=result.final_url)
        body = result.assets.get(str(asset_url)) if asset_url else None
        if body is not None:
            styles.append(body.decode("utf-8", errors="replace"))

    image_hashes: list[ImageHashRecord] = []
    camera_pixels: list[tuple[int, np.ndarray]] = []
    for image in scan.images:
        if not image.src:
            continue
        asset_url = canonicalize_url(image.src, base=result.final_url)
        body = result.assets.get(str(asset_url)) if asset_url else None
        width, height = image.width, image.height
        if body is None:
            continue
        try:
            pixels, width, height, fmt = imaging.decode_image(body)
        except imaging.UndecodableImage:
            continue
        record = ImageHashRecord(
            page_url=str(result.final_url),
            perceptual_hash=imaging.dhash(pixels),
            width=width,
            height=height,
            format_tag=fmt,
            src_url=str(asset_url),
        )
        image_hashes.append(record)
        if imaging.camera_eligible(width, height):
            camera_pixels.append((len(image_hashes) - 1, pixels))

    candidates = extract_addresses(rendered, cleaned, page_url=str(result.final_url))

    document = PageDocument(
        url=job_url,
        final_url=result.final_url,
        fetched_at=result.fetched_at,
        status_code=result.status,
        headers=dict(result.headers),
        out_urls=onion_links + regular_links,
        image_hashes=image_hashes,
        address_candidates=sorted({c.address for c in candidates}),
        is_homepage=is_homepage,
    )
    return ParsedPage(
        document=document,
        cleaned_text=cleaned,
        raw_html=raw,
        rendered_html=rendered,
        scripts=scripts,
        styles=styles,
        onion_links=onion_links,
        regular_links=regular_links,
        candidates=candidates,
        camera_pixels=camera_pixels,
    )

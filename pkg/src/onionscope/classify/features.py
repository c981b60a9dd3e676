"""Per-domain and per-address feature bundles for the six classifiers.

The homepage document stands in for the whole domain, so every bundle is
extracted from one rendered homepage plus its fetched assets. Fields map
one-to-one onto the classifier inputs; nothing else is collected.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

from ..extract import markup as markup_mod
from ..extract.pages import CONTEXT_FLAGS, AddressCandidate, ParsedPage


class MissingHomepage(ValueError):
    """Raised when a domain has no homepage document to represent it."""


@dataclass(slots=True)
class DomainFeatureBundle:
    domain: str
    trigrams: frozenset[str]
    uses_css: bool
    uses_js: bool
    n_chars: int
    n_img: int
    n_button: int
    n_input: int
    n_external_urls: int
    dom_seq: tuple[str, ...]
    css_seqs: tuple[tuple[str, ...], ...]
    blacklist_js_hits: tuple[bool, ...]
    # corpus-dependent features, filled in by apply_corpus_features
    lda_topic_presence: Optional[tuple[bool, ...]] = None
    tfidf_top10: tuple[str, ...] = ()
    cleaned_text: str = ""

    def __post_init__(self):
        for name in ("n_chars", "n_img", "n_button", "n_input", "n_external_urls"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")


@dataclass(slots=True)
class AddressFeatureVector:
    """One candidate address on one domain: occurrence count plus the nine
    location/context booleans."""

    address: str
    count_on_page: int
    flags: tuple[bool, ...]  # ordered as CONTEXT_FLAGS

    def __post_init__(self):
        if len(self.flags) != len(CONTEXT_FLAGS):
            raise ValueError(f"expected {len(CONTEXT_FLAGS)} context flags")

    def as_floats(self) -> list[float]:
        return [float(self.count_on_page)] + [1.0 if f else 0.0 for f in self.flags]


ADDRESS_FEATURE_NAMES = ("count_on_page",) + CONTEXT_FLAGS

# numeric illicitness features drawn directly from the bundle, in order
ILLICITNESS_BASE_FEATURES = (
    "uses_css", "uses_js", "n_chars", "n_img", "n_button", "n_input",
    "n_external_urls",
)


def extract_domain_features(
    page: ParsedPage,
    blacklist: Sequence[str],
) -> DomainFeatureBundle:
    """Build the corpus-independent part of the bundle from a parsed
    homepage. Topic and TF-IDF features need fitted corpus models and are
    attached afterwards."""
    if page is None or page.rendered_html is None:
        raise MissingHomepage("domain has no rendered homepage document")

    scan = markup_mod.scan_markup(page.rendered_html)
    text = page.cleaned_text

    counts = {"img": 0, "button": 0, "input": 0}
    for tag in scan.dom_sequence:
        if tag in counts:
            counts[tag] += 1

    page_host = page.document.url.host
    external = {
        link for link in (page.onion_links + page.regular_links)
        if link.host != page_host
    }

    css_seqs = tuple(
        tuple(markup_mod.css_rule_sequence(body)) for body in page.styles
    )
    hits = blacklist_hits(page.scripts, blacklist)

    return DomainFeatureBundle(
        domain=page_host,
        trigrams=frozenset(markup_mod.char_trigrams(text)),
        uses_css=bool(page.styles) or bool(scan.external_styles),
        uses_js=bool(page.scripts) or bool(scan.external_scripts),
        n_chars=len(text),
        n_img=counts["img"],
        n_button=counts["button"],
        n_input=counts["input"],
        n_external_urls=len(external),
        dom_seq=tuple(scan.dom_sequence),
        css_seqs=css_seqs,
        blacklist_js_hits=hits,
        cleaned_text=text,
    )


def blacklist_hits(script_bodies: Sequence[str], blacklist: Sequence[str]) -> tuple[bool, ...]:
    """Boolean per blacklist entry: does any script on the page contain it.
    JS identifiers are case-sensitive, so matching is exact substring."""
    joined = "\n".join(script_bodies)
    return tuple(entry in joined for entry in blacklist)


def illicitness_vector(bundle: DomainFeatureBundle) -> list[float]:
    """Numeric inputs of the illicitness forest: page-structure counts, the
    external-URL count, and the 100 topic-presence booleans."""
    if bundle.lda_topic_presence is None:
        raise ValueError("bundle lacks topic features; fit topics first")
    vec = [
        1.0 if bundle.uses_css else 0.0,
        1.0 if bundle.uses_js else 0.0,
        float(bundle.n_chars),
        float(bundle.n_img),
        float(bundle.n_button),
        float(bundle.n_input),
        float(bundle.n_external_urls),
    ]
    vec.extend(1.0 if p else 0.0 for p in bundle.lda_topic_presence)
    return vec


def category_vector(bundle: DomainFeatureBundle) -> list[float]:
    """Category uses the topic-presence features alone."""
    if bundle.lda_topic_presence is None:
        raise ValueError("bundle lacks topic features; fit topics first")
    return [1.0 if p else 0.0 for p in bundle.lda_topic_presence]


def tracking_vector(bundle: DomainFeatureBundle) -> list[float]:
    return [1.0 if h else 0.0 for h in bundle.blacklist_js_hits]


def candidate_to_features(
    candidates: Sequence[AddressCandidate],
) -> list[AddressFeatureVector]:
    """Aggregate per-page candidates of one domain into per-address vectors:
    counts sum across pages, context flags union."""
    by_addr: dict[str, tuple[int, set[str]]] = {}
    for cand in candidates:
        count, contexts = by_addr.get(cand.address, (0, set()))
        by_addr[cand.address] = (count + cand.count_on_page,
                                 contexts | set(cand.contexts))
    out = []
    for addr in sorted(by_addr):
        count, contexts = by_addr[addr]
        flags = tuple(flag in contexts for flag in CONTEXT_FLAGS)
        out.append(AddressFeatureVector(addr, count, flags))
    return out

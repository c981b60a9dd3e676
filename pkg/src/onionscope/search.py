"""Faceted full-text search and reverse image search over the store.

Terms are conjunctive, filters are conjunctive, ranking is by summed term
frequency with a deterministic domain-id tie-break, and facet counts
describe the filtered result set.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .imaging import hamming
from .model import DomainRecord
from .store import Store

FACET_FIELDS = ("category", "language", "illicit", "tracked", "status")


class BadQuery(ValueError):
    pass


@dataclass(frozen=True)
class SearchQuery:
    terms: tuple[str, ...] = ()
    category: Optional[str] = None
    language: Optional[str] = None
    illicit: Optional[bool] = None
    tracked: Optional[bool] = None
    has_attributed_address: Optional[bool] = None
    template_cluster: Optional[int] = None
    status: Optional[str] = None        # "up" | "down" | "unknown"
    page: int = 1
    page_size: int = 20

    def __post_init__(self):
        if self.page < 1 or not 1 <= self.page_size <= 200:
            raise BadQuery("bad pagination")
        if self.status not in (None, "up", "down", "unknown"):
            raise BadQuery(f"bad status filter {self.status!r}")


@dataclass
class DomainHit:
    domain: str
    score: int
    matched_pages: list[str]
    record: DomainRecord


@dataclass
class SearchResult:
    hits: list[DomainHit]
    total: int
    facets: dict[str, dict[str, int]] = field(default_factory=dict)


def domain_status(record: DomainRecord) -> str:
    if not record.status_history:
        return "unknown"
    return "up" if record.status_history[-1][1] else "down"


def matches_filters(record: DomainRecord, q: SearchQuery) -> bool:
    if q.category is not None and record.category != q.category:
        return False
    if q.language is not None and record.language != q.language:
        return False
    if q.illicit is not None and record.illicit != q.illicit:
        return False
    if q.tracked is not None and record.tracking != q.tracked:
        return False
    if q.has_attributed_address is not None:
        if bool(record.attributed_addresses) != q.has_attributed_address:
            return False
    if q.template_cluster is not None:
        if record.template_cluster_id != q.template_cluster:
            return False
    if q.status is not None and domain_status(record) != q.status:
        return False
    return True


def search(store: Store, q: SearchQuery) -> SearchResult:
    """Domain-level hits: a domain matches when some of its pages contain
    every term and its record passes every filter."""
    terms = tuple(t.lower() for t in q.terms if t.strip())
    if terms:
        doc_sets = [store.postings(t) for t in terms]
        candidate_docs = set.intersection(*doc_sets) if doc_sets else set()
        by_domain: dict[str, list[str]] = {}
        for doc_id in candidate_docs:
            doc = store.get_document(doc_id)
            if doc is not None:
                by_domain.setdefault(doc.url.host, []).append(doc_id)
    else:
        by_domain = {}
        for doc_id, doc in sorted(store.documents.items()):
            by_domain.setdefault(doc.url.host, []).append(doc_id)

    hits: list[DomainHit] = []
    for host in sorted(by_domain):
        record = store.get_domain(host)
        if record is None:
            record = DomainRecord(domain=host, version="")
        if not matches_filters(record, q):
            continue
        score = 0
        for doc_id in by_domain[host]:
            for t in terms:
                score += store.term_count(doc_id, t)
        hits.append(DomainHit(domain=host, score=score,
                              matched_pages=sorted(by_domain[host]),
                              record=record))

    hits.sort(key=lambda h: (-h.score, h.domain))
    facets: dict[str, dict[str, int]] = {f: {} for f in FACET_FIELDS}
    for h in hits:
        r = h.record
        values = {
            "category": r.category or "unclassified",
            "language": r.language or "unclassified",
            "illicit": str(r.illicit).lower() if r.illicit is not None else "unclassified",
            "tracked": str(r.tracking).lower() if r.tracking is not None else "unclassified",
            "status": domain_status(r),
        }
        for fct, value in values.items():
            facets[fct][value] = facets[fct].get(value, 0) + 1
    start = (q.page - 1) * q.page_size
    return SearchResult(hits=hits[start:start + q.page_size],
                        total=len(hits), facets=facets)


@dataclass
class RisMatch:
    src_url: str
    page_url: str
    perceptual_hash: str
    distance: int


def reverse_image_search(store: Store, query_hash: int,
                         max_distance: int) -> dict[str, list[RisMatch]]:
    """All stored image hashes within Hamming distance, ascending by
    distance, grouped by the domain serving the page."""
    if not 0 <= max_distance <= 64:
        raise BadQuery("max_distance must be within 0..64")
    matches: list[tuple[int, RisMatch]] = []
    for rec in store.image_records():
        d = hamming(rec.perceptual_hash, query_hash)
        if d <= max_distance:
            matches.append((d, RisMatch(
                src_url=rec.src_url,
                page_url=rec.page_url,
                perceptual_hash=f"{rec.perceptual_hash:016x}",
                distance=d,
            )))
    matches.sort(key=lambda m: (m[0], m[1].src_url, m[1].page_url))
    grouped: dict[str, list[RisMatch]] = {}
    for _, m in matches:
        host = m.page_url.split("/")[2] if "://" in m.page_url else m.page_url
        grouped.setdefault(host, []).append(m)
    return grouped

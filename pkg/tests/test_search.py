"""Search semantics against a brute-force oracle, plus reverse image search."""

import random
import re

import pytest

from onionscope.model import DomainRecord, ImageHashRecord, PageDocument, parse_url
from onionscope.search import (
    BadQuery,
    SearchQuery,
    reverse_image_search,
    search,
)
from onionscope.store import Store
from onionscope.synthnet import WorldSpec, generate

VOCAB = ("market", "bitcoin", "forum", "escrow", "vendor", "mirror", "login",
         "wiki", "search", "card", "hosting", "mail", "chat", "index", "drop",
         "shop", "review", "exchange", "wallet", "news")


def _host(i):
    return format(i, "052x") + "aaaa.onion"


def _random_store(seed, n_domains=300):
    """Store with randomized docs and records; returns (store, texts) where
    texts maps doc_id -> cleaned text for the oracle's own scan."""
    rng = random.Random(seed)
    store = Store()
    texts = {}
    for i in range(n_domains):
        host = _host(i)
        for p in range(rng.randint(1, 4)):
            url = parse_url(f"http://{host}/" if p == 0 else f"http://{host}/p{p}")
            words = rng.choices(VOCAB, k=rng.randint(3, 15))
            if rng.random() < 0.05:
                words.append(f"rare{i}")
            text = " ".join(words)
            doc = PageDocument(url=url, final_url=url, fetched_at=0.0,
                               status_code=200, headers={})
            store.index_document(doc, text)
            texts[doc.doc_id] = text
        if rng.random() < 0.85:  # some hosts intentionally lack records
            history = []
            t = 0.0
            for _ in range(rng.randint(0, 3)):
                t += rng.uniform(1, 100)
                history.append((t, rng.random() < 0.6))
            store.upsert_domain(DomainRecord(
                domain=host,
                version=rng.choice(["v2", "v3"]),
                status_history=history,
                language=rng.choice([None, "en", "ru", "de"]),
                illicit=rng.choice([None, True, False]),
                category=rng.choice([None, "marketplace", "forum", "crypto"]),
                template_cluster_id=rng.choice([None, 0, 1, 2]),
                tracking=rng.choice([None, True, False]),
                attributed_addresses=(["1BoatSLRHtKNngkdXEeobR76b53LETtpyT"]
                                      if rng.random() < 0.2 else []),
            ))
    return store, texts


def _oracle(store, texts, q):
    """Brute-force scan of every stored document under the query predicate."""
    terms = tuple(t.lower() for t in q.terms if t.strip())

    def tokens(text):
        counts = {}
        for tok in re.findall(r"[a-z0-9]+", text.lower()):
            counts[tok] = counts.get(tok, 0) + 1
        return counts

    def status_of(rec):
        if not rec.status_history:
            return "unknown"
        return "up" if rec.status_history[-1][1] else "down"

    def passes(rec):
        if q.category is not None and rec.category != q.category:
            return False
        if q.language is not None and rec.language != q.language:
            return False
        if q.illicit is not None and rec.illicit != q.illicit:
            return False
        if q.tracked is not None and rec.tracking != q.tracked:
            return False
        if q.has_attributed_address is not None and \
                bool(rec.attributed_addresses) != q.has_attributed_address:
            return False
        if q.template_cluster is not None and \
                rec.template_cluster_id != q.template_cluster:
            return False
        if q.status is not None and status_of(rec) != q.status:
            return False
        return True

    per_domain = {}
    for doc_id, doc in store.documents.items():
        counts = tokens(texts.get(doc_id, ""))
        if terms and not all(t in counts for t in terms):
            continue
        host = doc.url.host
        entry = per_domain.setdefault(host, {"score": 0, "pages": []})
        entry["pages"].append(doc_id)
        entry["score"] += sum(counts[t] for t in terms)

    rows = []
    for host, entry in per_domain.items():
        rec = store.domains.get(host) or DomainRecord(domain=host, version="")
        if passes(rec):
            rows.append((host, entry["score"], sorted(entry["pages"]), rec))
    rows.sort(key=lambda r: (-r[1], r[0]))

    facets = {"category": {}, "language": {}, "illicit": {}, "tracked": {},
              "status": {}}
    for _, _, _, rec in rows:
        for name, value in (
            ("category", rec.category or "unclassified"),
            ("language", rec.language or "unclassified"),
            ("illicit", str(rec.illicit).lower() if rec.illicit is not None
             else "unclassified"),
            ("tracked", str(rec.tracking).lower() if rec.tracking is not None
             else "unclassified"),
            ("status", status_of(rec)),
        ):
            facets[name][value] = facets[name].get(value, 0) + 1
    return rows, facets


def _random_query(rng):
    kw = {}
    n_terms = rng.randint(0, 3)
    terms = tuple(rng.sample(VOCAB, k=n_terms))
    if rng.random() < 0.1:
        terms += (f"rare{rng.randrange(300)}",)
    if rng.random() < 0.4:
        kw["category"] = rng.choice(["marketplace", "forum", "crypto", "none_such"])
    if rng.random() < 0.3:
        kw["language"] = rng.choice(["en", "ru", "de"])
    if rng.random() < 0.3:
        kw["illicit"] = rng.choice([True, False])
    if rng.random() < 0.2:
        kw["tracked"] = rng.choice([True, False])
    if rng.random() < 0.2:
        kw["has_attributed_address"] = rng.choice([True, False])
    if rng.random() < 0.2:
        kw["template_cluster"] = rng.choice([0, 1, 2, 9])
    if rng.random() < 0.3:
        kw["status"] = rng.choice(["up", "down", "unknown"])
    return SearchQuery(terms=terms, page_size=200, **kw)


def test_search_matches_brute_force_oracle():
    store, texts = _random_store(seed=7)
    rng = random.Random(99)
    for _ in range(80):
        q = _random_query(rng)
        expect_rows, expect_facets = _oracle(store, texts, q)
        got_hits = []
        page = 1
        while True:
            res = search(store, SearchQuery(
                terms=q.terms, category=q.category, language=q.language,
                illicit=q.illicit, tracked=q.tracked,
                has_attributed_address=q.has_attributed_address,
                template_cluster=q.template_cluster, status=q.status,
                page=page, page_size=200))
            got_hits.extend(res.hits)
            assert res.total == len(expect_rows)
            assert res.facets == expect_facets
            if page * 200 >= res.total:
                break
            page += 1
        assert [(h.domain, h.score, h.matched_pages) for h in got_hits] == \
            [(host, score, pages) for host, score, pages, _ in expect_rows]


def test_empty_index_empty_result():
    res = search(Store(), SearchQuery(terms=("anything",)))
    assert res.hits == [] and res.total == 0


def test_unique_term_ranks_its_page_first():
    store, texts = _random_store(seed=3, n_domains=40)
    host = _host(5)
    url = parse_url(f"http://{host}/unique")
    doc = PageDocument(url=url, final_url=url, fetched_at=0.0,
                       status_code=200, headers={})
    store.index_document(doc, "zzyzx zzyzx beacon")
    res = search(store, SearchQuery(terms=("zzyzx",)))
    assert res.total == 1
    assert res.hits[0].domain == host
    assert res.hits[0].matched_pages == [doc.doc_id]
    assert res.hits[0].score == 2


def test_bad_queries_rejected():
    with pytest.raises(BadQuery):
        SearchQuery(page=0)
    with pytest.raises(BadQuery):
        SearchQuery(page_size=201)
    with pytest.raises(BadQuery):
        SearchQuery(status="flapping")


def test_category_filter_returns_planted_marketplaces():
    world = generate(WorldSpec(seed=11, n_domains=60))
    store = Store()
    for host, truth in world.truth.domains.items():
        url = parse_url(f"http://{host}/")
        store.index_document(
            PageDocument(url=url, final_url=url, fetched_at=0.0,
                         status_code=200, headers={}), "storefront")
        store.upsert_domain(DomainRecord(domain=host, version=truth.version,
                                         category=truth.category))
    res = search(store, SearchQuery(category="marketplace", page_size=200))
    planted = {h for h, t in world.truth.domains.items()
               if t.category == "marketplace"}
    assert planted  # the mix guarantees some at this size
    assert {h.domain for h in res.hits} == planted


# -- reverse image search ---------------------------------------------------


def _image_store(hashes):
    """One domain per hash so grouping is visible; hashes is {src: value}."""
    store = Store()
    for i, (src, value) in enumerate(sorted(hashes.items())):
        host = _host(i)
        url = parse_url(f"http://{host}/")
        rec = ImageHashRecord(page_url=str(url), perceptual_hash=value,
                              width=256, height=256, format_tag="png",
                              src_url=src)
        store.index_document(
            PageDocument(url=url, final_url=url, fetched_at=0.0,
                         status_code=200, headers={}, image_hashes=[rec]), "")
    return store


def test_ris_distance_zero_exact_matches_only():
    store = _image_store({"s0": 0x00FF, "s1": 0x00FF, "s2": 0x0F0F})
    groups = reverse_image_search(store, 0x00FF, 0)
    found = [m for ms in groups.values() for m in ms]
    assert sorted(m.src_url for m in found) == ["s0", "s1"]
    assert all(m.distance == 0 for m in found)


def test_ris_distance_64_returns_everything():
    store = _image_store({f"s{i}": i * 12345 for i in range(20)})
    groups = reverse_image_search(store, 0, 64)
    assert sum(len(ms) for ms in groups.values()) == 20


def test_ris_planted_near_duplicates_at_10():
    rng = random.Random(4)
    base = rng.getrandbits(64)
    cluster = {f"near{i}": base ^ ((1 << (3 * i)) - 1 if i else 0)
               for i in range(4)}          # 0, 3, 6, 9 bits flipped
    far = {}
    while len(far) < 8:
        h = rng.getrandbits(64)
        if bin(h ^ base).count("1") > 10:
            far[f"far{len(far)}"] = h
    store = _image_store({**cluster, **far})
    groups = reverse_image_search(store, base, 10)
    found = sorted(m.src_url for ms in groups.values() for m in ms)
    assert found == sorted(cluster)
    distances = [m.distance for ms in groups.values() for m in ms]
    assert sorted(distances) == [0, 3, 6, 9]


def test_ris_orders_ascending_within_group():
    host = _host(0)
    url = parse_url(f"http://{host}/")
    recs = [ImageHashRecord(page_url=str(url), perceptual_hash=h, width=64,
                            height=64, format_tag="png", src_url=f"s{h}")
            for h in (0b111, 0b1, 0b11)]
    store = Store()
    store.index_document(
        PageDocument(url=url, final_url=url, fetched_at=0.0, status_code=200,
                     headers={}, image_hashes=recs), "")
    groups = reverse_image_search(store, 0, 64)
    assert [m.distance for m in groups[host]] == [1, 2, 3]


def test_ris_rejects_bad_distance():
    store = Store()
    with pytest.raises(BadQuery):
        reverse_image_search(store, 0, -1)
    with pytest.raises(BadQuery):
        reverse_image_search(store, 0, 65)

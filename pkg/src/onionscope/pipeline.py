"""End-to-end orchestration: the crawl loop over a fetch backend, and the
analysis passes that turn crawled state into queryable records.

The crawl loop is single-threaded and driven by an injectable clock, so
politeness waits and check/update cadences cost no wall time against the
synthetic backend. Analysis trains every classifier from a supplied label
set, predicts over the crawled corpus, and writes records, clusters,
graph statistics, and wallet tables back to the store.
"""

from __future__ import annotations

import hashlib
import threading
import time
from dataclasses import dataclass, field
from decimal import Decimal
from typing import Iterable, Optional, Sequence

import numpy as np

from . import imaging, webgraph
from .classify import (
    CorpusStats,
    CorpusTooSmall,
    DomainFeatureBundle,
    DomainModels,
    ModelKind,
    SingleClassData,
    apply_corpus_features,
    attribute_addresses,
    candidate_to_features,
    category_vector,
    cluster_templates,
    extract_domain_features,
    fit_topics,
    illicitness_vector,
    load_blacklist,
    predict_domain,
    tracking_vector,
    train,
    train_attribution_model,
    train_language_model,
    train_template_matcher,
)
from .classify.features import ADDRESS_FEATURE_NAMES, ILLICITNESS_BASE_FEATURES
from .config import Config
from .crypto import (
    ChainTx,
    RateTable,
    Wallet,
    WalletPartition,
    apply_deposit_heuristic,
    build_wallet_graph,
    cluster_multi_input,
    filter_outliers,
    label_wallets,
    to_cents,
    wallet_features,
)
from .extract.markup import char_trigrams
from .extract.pages import ParsedPage, extract_addresses, parse_page
from .fetch import (
    EndpointsSaturated,
    FetchBackend,
    ProxyEndpoint,
    ProxyPool,
    ResolutionError,
    TransientFetchError,
    fetch_page,
    mark_homepage,
)
from .frontier import (
    CrawlJob,
    Frontier,
    JobKind,
    OutOfOrderStatus,
    make_status,
    robots_allowed,
)
from .model import DomainRecord, PageDocument, parse_onion_domain
from .store import Store, WalletEdgeInfo, WalletInfo
from .webgraph import ScannerVerdict

SECONDS_PER_WEEK = 7 * 86400.0


class SimClock:
    """Monotonic injectable clock. advance_to never moves backwards, so the
    crawl loop can jump straight to the next scheduled job."""

    def __init__(self, start: float = 0.0):
        self._t = float(start)
        self._lock = threading.Lock()

    def now(self) -> float:
        with self._lock:
            return self._t

    def advance_to(self, t: float) -> None:
        with self._lock:
            if t > self._t:
                self._t = t

    def advance(self, dt: float) -> None:
        with self._lock:
            self._t += dt


@dataclass(slots=True)
class CrawlStats:
    pages_fetched: int = 0
    checks: int = 0
    updates_changed: int = 0
    failures: int = 0
    robots_skipped: int = 0
    deferred: int = 0
    started_at: float = 0.0
    ended_at: float = 0.0
    wall_seconds: float = 0.0

    def pages_per_minute(self) -> float:
        if self.wall_seconds <= 0:
            return 0.0
        return 60.0 * self.pages_fetched / self.wall_seconds

    def to_json(self) -> dict:
        return {
            "pages_fetched": self.pages_fetched,
            "checks": self.checks,
            "updates_changed": self.updates_changed,
            "failures": self.failures,
            "robots_skipped": self.robots_skipped,
            "deferred": self.deferred,
            "started_at": self.started_at,
            "ended_at": self.ended_at,
            "wall_seconds": self.wall_seconds,
            "pages_per_minute": self.pages_per_minute(),
        }


def _fingerprint(markup: str) -> int:
    digest = hashlib.blake2b(markup.encode(), digest_size=8).digest()
    return int.from_bytes(digest, "big")


class Crawler:
    """Claims jobs from the frontier, fetches through the backend, parses,
    indexes, and keeps the discovery loop going."""

    def __init__(
        self,
        store: Store,
        frontier: Frontier,
        backend: FetchBackend,
        pool: Optional[ProxyPool] = None,
        clock: Optional[SimClock] = None,
        respect_robots: bool = True,
    ):
        self.store = store
        self.frontier = frontier
        self.backend = backend
        self.pool = pool or ProxyPool([ProxyEndpoint("local", capacity=4)])
        self.clock = clock or SimClock()
        self.respect_robots = respect_robots
        self.stats = CrawlStats()
        self._robots_cache: dict[str, str] = {}

    # -- robots ---------------------------------------------------------

    def _robots_body(self, job_url) -> str:
        domain = job_url.host
        cached = self._robots_cache.get(domain)
        if cached is not None:
            return cached
        body = ""
        try:
            resp = self.backend.get(job_url.with_path("/robots.txt"))
            if resp.status == 200:
                body = resp.body.decode("utf-8", errors="replace")
        except (ResolutionError, TransientFetchError):
            pass
        self._robots_cache[domain] = body
        return body

    def _allowed(self, job_url) -> bool:
        if not self.respect_robots:
            return True
        body = self._robots_body(job_url)
        return robots_allowed(job_url.host, job_url.path, body)

    # -- job processing ---------------------------------------------------

    def _record(self, domain: str, ts: float, resolvable: bool,
                status: Optional[int]) -> None:
        try:
            self.frontier.record_status(make_status(domain, ts, resolvable, status))
        except OutOfOrderStatus:
            pass  # a same-instant duplicate reading adds nothing

    def _dispatch(self, job: CrawlJob) -> None:
        if job.kind is JobKind.CHECK:
            self._probe(job)
        else:
            self._fetch_and_index(job)

    def _probe(self, job: CrawlJob) -> None:
        """Liveness check: one request, no redirect walk, no indexing."""
        now = self.clock.now()
        domain = job.url.host
        try:
            resp = self.backend.get(job.url)
            self._record(domain, now, True, resp.status)
        except ResolutionError:
            self._record(domain, now, False, None)
        except (TransientFetchError, EndpointsSaturated):
            self.frontier.fail_job(job, transient=True, now=now)
            self.stats.failures += 1
            return
        entry = self.frontier.visited.get(str(job.url))
        fp = entry.content_fingerprint if entry else 0
        self.frontier.complete_job(job, fingerprint=fp, now=now)
        self.stats.checks += 1

    def _fetch_and_index(self, job: CrawlJob) -> None:
        now = self.clock.now()
        domain = job.url.host
        if not self._allowed(job.url):
            self.stats.robots_skipped += 1
            self.frontier.complete_job(job, fingerprint=0, now=now)
            return
        try:
            result = fetch_page(job.url, self.pool, self.backend, now=now)
        except ResolutionError:
            self._record(domain, now, False, None)
            self.frontier.fail_job(job, transient=True, now=now)
            self.stats.failures += 1
            return
        except TransientFetchError:
            self.frontier.fail_job(job, transient=True, now=now)
            self.stats.failures += 1
            return
        except EndpointsSaturated:
            self.frontier.defer_job(job, until=now + 1.0)
            self.stats.deferred += 1
            return

        is_root = job.url.path == "/"
        parsed = parse_page(
            result, job.url,
            is_homepage=is_root and mark_homepage(job.url, result.chain),
        )
        fp = _fingerprint(parsed.rendered_html)
        changed = self.frontier.complete_job(job, fingerprint=fp, now=now)
        if is_root:
            self._record(domain, now, True, result.status)
        if job.kind is JobKind.UPDATE and changed:
            self.stats.updates_changed += 1

        self.store.index_document(parsed.document, parsed.cleaned_text)
        if parsed.document.is_homepage:
            self.store.put_page_assets(
                parsed.document.doc_id, parsed.rendered_html,
                parsed.scripts, parsed.styles)
        for rec in parsed.document.image_hashes:
            data = result.assets.get(rec.src_url)
            if data is not None:
                self.store.put_image_bytes(rec.src_url, data)
        self.frontier.enqueue_discovered(parsed.onion_links + parsed.regular_links)
        self.stats.pages_fetched += 1

    # -- main loop --------------------------------------------------------

    def run(
        self,
        duration: float,
        roles: Iterable[JobKind] = tuple(JobKind),
        max_pages: Optional[int] = None,
    ) -> CrawlStats:
        """Process jobs until the simulated window closes, every queue
        drains, or max_pages is hit. Idle gaps jump the clock to the next
        scheduled job instead of sleeping."""
        roles = tuple(roles)
        wall_start = time.monotonic()
        self.stats.started_at = self.clock.now()
        t_end = self.clock.now() + duration

        def page_budget_left() -> bool:
            return max_pages is None or self.stats.pages_fetched < max_pages

        while page_budget_left():
            progressed = False
            for kind in roles:
                job = self.frontier.claim_job(kind)
                while job is not None:
                    self._dispatch(job)
                    progressed = True
                    if not page_budget_left():
                        break
                    job = self.frontier.claim_job(kind)
            if progressed:
                continue
            due = [d for d in (self.frontier.next_due(k) for k in roles)
                   if d is not None]
            if not due:
                break
            nxt = min(due)
            if nxt > t_end:
                break
            self.clock.advance_to(nxt)

        self.stats.ended_at = self.clock.now()
        self.stats.wall_seconds = time.monotonic() - wall_start
        self.store.frontier_snapshot = self.frontier.snapshot()
        return self.stats


# -- rehydration ------------------------------------------------------------


def rehydrate_page(store: Store, doc: PageDocument) -> Optional[ParsedPage]:
    """Rebuild the analysis view of a stored homepage from its persisted
    markup and asset bodies. Returns None when the blobs are gone."""
    assets = store.get_page_assets(doc.doc_id)
    if assets is None:
        return None
    rendered, scripts, styles = assets
    text_ref = store.doc_text_refs.get(doc.doc_id)
    if text_ref is not None and store.files.has(text_ref):
        cleaned = store.files.get(text_ref).decode()
    else:
        from .extract.markup import clean_text

        cleaned = clean_text(rendered)
    onion_links = [u for u in doc.out_urls if u.is_onion]
    regular_links = [u for u in doc.out_urls if not u.is_onion]
    candidates = extract_addresses(rendered, cleaned.lower(), page_url=doc.doc_id)
    return ParsedPage(
        document=doc,
        cleaned_text=cleaned,
        raw_html=rendered,
        rendered_html=rendered,
        scripts=scripts,
        styles=styles,
        onion_links=onion_links,
        regular_links=regular_links,
        candidates=candidates,
        camera_pixels=[],
    )


def collect_bundles(
    store: Store,
    blacklist: Sequence[str],
) -> tuple[dict[str, DomainFeatureBundle], dict[str, ParsedPage]]:
    """One feature bundle per domain whose homepage was crawled and kept.
    Domains without a rehydratable homepage are skipped (down, moved away,
    or robots-blocked)."""
    bundles: dict[str, DomainFeatureBundle] = {}
    pages: dict[str, ParsedPage] = {}
    for doc in sorted(store.documents.values(), key=lambda d: d.doc_id):
        if not doc.is_homepage:
            continue
        host = doc.url.host
        page = rehydrate_page(store, doc)
        if page is None:
            continue
        bundles[host] = extract_domain_features(page, blacklist)
        pages[host] = page
    return bundles, pages


# -- labels -------------------------------------------------------------------


@dataclass(slots=True)
class TrainingLabels:
    """Supervision for the six classifiers, keyed by domain host. The
    attribution set holds (host, address) positives; every other candidate
    address found on a labeled host counts as a negative."""

    language: dict[str, str] = field(default_factory=dict)
    category: dict[str, str] = field(default_factory=dict)
    illicit: dict[str, bool] = field(default_factory=dict)
    tracked: dict[str, bool] = field(default_factory=dict)
    template_group: dict[str, Optional[int]] = field(default_factory=dict)
    attributed: set[tuple[str, str]] = field(default_factory=set)


def labels_from_truth(truth) -> TrainingLabels:
    """Adapt a synthetic world's ground-truth tables into training labels."""
    labels = TrainingLabels()
    for dom in truth.domains.values():
        labels.language[dom.host] = dom.language
        labels.category[dom.host] = dom.category
        labels.illicit[dom.host] = dom.illicit
        labels.tracked[dom.host] = dom.tracked
        labels.template_group[dom.host] = dom.mirror_cluster
        for addr in dom.attributed:
            labels.attributed.add((dom.host, addr))
    return labels


# -- template blocking --------------------------------------------------------


def candidate_template_pairs(
    bundles: Sequence[DomainFeatureBundle],
    max_df: int = 32,
) -> list[tuple[int, int]]:
    """Blocking for template clustering: only domains sharing a rare
    TF-IDF-top term are worth scoring. Terms present on more than max_df
    domains are too common to block on (shared boilerplate)."""
    buckets: dict[str, list[int]] = {}
    for i, b in enumerate(bundles):
        for term in set(b.tfidf_top10):
            buckets.setdefault(term, []).append(i)
    pairs: set[tuple[int, int]] = set()
    for members in buckets.values():
        if len(members) < 2 or len(members) > max_df:
            continue
        for ai in range(len(members)):
            for bi in range(ai + 1, len(members)):
                pairs.add((members[ai], members[bi]))
    return sorted(pairs)


# -- analysis -----------------------------------------------------------------


@dataclass(slots=True)
class AnalyzeStats:
    domains_classified: int = 0
    domains_total: int = 0
    topics_fitted: bool = False
    models_trained: list[str] = field(default_factory=list)
    models_skipped: list[str] = field(default_factory=list)
    template_clusters: int = 0
    similarity_clusters: int = 0
    camera_clusters: int = 0
    wallets: int = 0
    outlier_wallets: int = 0
    flagged_urls: int = 0
    wall_seconds: float = 0.0

    def to_json(self) -> dict:
        return {
            "domains_classified": self.domains_classified,
            "domains_total": self.domains_total,
            "topics_fitted": self.topics_fitted,
            "models_trained": list(self.models_trained),
            "models_skipped": list(self.models_skipped),
            "template_clusters": self.template_clusters,
            "similarity_clusters": self.similarity_clusters,
            "camera_clusters": self.camera_clusters,
            "wallets": self.wallets,
            "outlier_wallets": self.outlier_wallets,
            "flagged_urls": self.flagged_urls,
            "wall_seconds": self.wall_seconds,
        }


def _train_domain_models(bundles, labels, have_topics, seed, stats):
    """Fit the per-domain classifiers on the labeled subset; single-class
    label sets make that model unavailable rather than fatal."""
    hosts = [h for h in sorted(bundles) if h in labels.language]
    language_model = None
    illicit_model = None
    category_model = None
    tracking_model = None

    if hosts:
        try:
            language_model = train_language_model(
                [bundles[h].cleaned_text.lower() for h in hosts],
                [labels.language[h] for h in hosts],
                seed=seed,
            )
            stats.models_trained.append("language")
        except SingleClassData:
            stats.models_skipped.append("language")

    if hosts and have_topics:
        try:
            illicit_model = train(
                ModelKind.DECISION_FOREST,
                [illicitness_vector(bundles[h]) for h in hosts],
                [1 if labels.illicit.get(h) else 0 for h in hosts],
                seed=seed,
            )
            stats.models_trained.append("illicitness")
        except SingleClassData:
            stats.models_skipped.append("illicitness")
        try:
            category_model = train(
                ModelKind.DECISION_FOREST,
                [category_vector(bundles[h]) for h in hosts],
                [labels.category.get(h, "other") for h in hosts],
                seed=seed,
            )
            stats.models_trained.append("category")
        except SingleClassData:
            stats.models_skipped.append("category")

    if hosts:
        try:
            tracking_model = train(
                ModelKind.MAX_MARGIN_LINEAR,
                [tracking_vector(bundles[h]) for h in hosts],
                [1 if labels.tracked.get(h) else 0 for h in hosts],
                seed=seed,
            )
            stats.models_trained.append("tracking")
        except SingleClassData:
            stats.models_skipped.append("tracking")

    return language_model, illicit_model, category_model, tracking_model


def _predict_domains(store, bundles, models, stats):
    """Write classifier outputs onto each domain's record."""
    language_model, illicit_model, category_model, tracking_model = models
    for host in sorted(bundles):
        bundle = bundles[host]
        record = store.get_domain(host) or DomainRecord(
            domain=host, version=_domain_version(host))
        if language_model is not None:
            record.language = language_model.predict(
                char_trigrams(bundle.cleaned_text.lower()))
        if illicit_model is not None:
            vec = np.asarray([illicitness_vector(bundle)])
            pos_col = list(illicit_model.classes).index(1)
            record.illicit = bool(illicit_model.predict(vec)[0] == 1)
            record.illicit_score = float(illicit_model.scores(vec)[0][pos_col])
        if category_model is not None:
            record.category = str(
                category_model.predict(np.asarray([category_vector(bundle)]))[0])
        if tracking_model is not None:
            record.tracking = bool(
                tracking_model.predict(np.asarray([tracking_vector(bundle)]))[0] == 1)
        store.upsert_domain(record)
        stats.domains_classified += 1


def _domain_version(host: str) -> str:
    dom = parse_onion_domain(host)
    return f"v{dom.version.value}" if dom else "unknown"


def _attribution_pass(store, pages, labels, seed, stats):
    """Train on labeled (host, address) pairs, then predict each domain's
    self-attributed addresses. Returns {host: set of addresses}."""
    train_vectors = []
    train_labels = []
    per_host_vectors = {}
    for host in sorted(pages):
        vectors = candidate_to_features(pages[host].candidates)
        per_host_vectors[host] = vectors
        if host in labels.language:  # a labeled host labels its candidates
            for v in vectors:
                train_vectors.append(v)
                train_labels.append((host, v.address) in labels.attributed)

    attributions: dict[str, set[str]] = {}
    if train_vectors and any(train_labels) and not all(train_labels):
        model = train_attribution_model(train_vectors, train_labels, seed=seed)
        stats.models_trained.append("attribution")
        for host, vectors in per_host_vectors.items():
            predicted = attribute_addresses(vectors, model)
            if predicted:
                attributions[host] = predicted
    else:
        stats.models_skipped.append("attribution")

    for host, addrs in attributions.items():
        record = store.get_domain(host)
        if record is not None:
            record.attributed_addresses = sorted(addrs)
            store.upsert_domain(record)
    return attributions


def _template_pass(store, bundles, labels, seed, stats):
    """Train the pair matcher on known groups and cluster every bundled
    domain; cluster ids are dense integers ordered by smallest member."""
    hosts = sorted(bundles)
    labeled = [h for h in hosts if labels.template_group.get(h) is not None]
    grouped = {}
    for h in labeled:
        grouped.setdefault(labels.template_group[h], []).append(h)
    multi = [g for g in grouped.values() if len(g) >= 2]
    if not multi or len(hosts) < 3:
        stats.models_skipped.append("template")
        return
    # Train on labeled hosts: mirror-cluster members are positives, one
    # distinct group id per unlabeled singleton.
    train_hosts = labeled
    group_ids = [labels.template_group[h] for h in train_hosts]
    try:
        matcher = train_template_matcher(
            [bundles[h] for h in train_hosts], group_ids, seed=seed)
    except ValueError:
        stats.models_skipped.append("template")
        return
    stats.models_trained.append("template")

    bundle_list = [bundles[h] for h in hosts]
    pairs = candidate_template_pairs(bundle_list)
    clusters = cluster_templates(hosts, bundle_list, matcher,
                                 candidate_pairs=pairs)
    stats.template_clusters = sum(1 for c in clusters if len(c) >= 2)
    for cluster_id, members in enumerate(sorted(clusters, key=lambda c: c[0])):
        for host in members:
            record = store.get_domain(host)
            if record is not None:
                record.template_cluster_id = cluster_id
                store.upsert_domain(record)


def _graph_pass(store, verdicts, stats):
    graph = webgraph.build(store.documents.values())
    components, lscc = webgraph.scc(graph)
    tie = webgraph.bowtie(graph)
    onion_nodes = graph.nodes_of_type(webgraph.TYPE_ONION)
    tie.check_partition(onion_nodes)

    links = []
    for doc in store.documents.values():
        src = doc.url.host
        for u in doc.out_urls:
            if not u.is_onion:
                links.append((src, str(u)))
    categories = {
        host: rec.category
        for host, rec in store.domains.items() if rec.category
    }
    report = webgraph.malicious_report(links, verdicts, categories)
    store.malicious_report = report.to_json()
    stats.flagged_urls = len(report.flagged_urls)

    regions = tie.regions()
    return {
        "nodes_onion": len(onion_nodes),
        "nodes_regular": len(graph.nodes_of_type(webgraph.TYPE_REGULAR)),
        "edges": len(graph.edges),
        "scc_count": len(components),
        "lscc_size": len(lscc),
        "avg_clustering": webgraph.avg_clustering(graph),
        "bowtie": {name: len(nodes) for name, nodes in regions.items()},
        "top_degree": [[host, deg]
                       for host, deg in webgraph.top_degree(graph, 10)],
    }


def _availability_metrics(frontier: Frontier) -> dict:
    """Daily availability for the last observed day plus the weekly churn
    series across the whole observation span."""
    spans = [
        (h[0][0], h[-1][0]) for h in frontier.status_history.values() if h
    ]
    if not spans:
        return {"availability": None, "weekly_churn": []}
    t0 = min(s for s, _ in spans)
    t1 = max(e for _, e in spans)
    churn = []
    week = t0
    while week + SECONDS_PER_WEEK <= t1:
        value = frontier.weekly_churn(week)
        if value is not None:
            churn.append([week, value])
        week += SECONDS_PER_WEEK
    day_start = max(t0, t1 - 86400.0)
    return {
        "availability": frontier.daily_availability(day_start),
        "weekly_churn": churn,
    }


def _status_pass(store, frontier):
    """Copy per-domain status histories onto domain records, creating
    records for domains that were probed but never parsed."""
    for domain, history in sorted(frontier.status_history.items()):
        record = store.get_domain(domain) or DomainRecord(
            domain=domain, version=_domain_version(domain))
        record.status_history = list(history)
        record.page_count = len(store.documents_for_domain(domain))
        store.upsert_domain(record)


def _image_pass(store, hd_threshold, pce_threshold, stats):
    """Similarity clusters over eligible dhashes; camera clusters over PRNU
    residuals of stored image bytes."""
    records = {}
    for rec in store.image_records():
        records.setdefault(rec.src_url, rec)

    sim_ids, sim_hashes = [], []
    cam_ids, cam_residuals = [], []
    for src_url in sorted(records):
        rec = records[src_url]
        if imaging.similarity_eligible(rec.width, rec.height):
            sim_ids.append(src_url)
            sim_hashes.append(rec.perceptual_hash)
        if imaging.camera_eligible(rec.width, rec.height):
            data = store.get_image_bytes(src_url)
            if data is None:
                continue
            try:
                pixels, _, _, _ = imaging.decode_image(data)
            except imaging.UndecodableImage:
                continue
            cam_ids.append(src_url)
            cam_residuals.append(imaging.prnu_residual(pixels))

    store.similarity_clusters = []
    if sim_ids:
        matrix = imaging.hamming_matrix(sim_hashes)
        for c in imaging.cluster(sim_ids, matrix, hd_threshold, "similarity"):
            store.similarity_clusters.append(
                {"kind": "similarity", "members": list(c.members)})
    stats.similarity_clusters = sum(
        1 for c in store.similarity_clusters if len(c["members"]) >= 2)

    store.camera_clusters = []
    if cam_ids:
        matrix = imaging.pce_matrix(cam_residuals)
        for c in imaging.cluster(cam_ids, matrix, pce_threshold, "camera",
                                 higher_is_similar=True):
            store.camera_clusters.append(
                {"kind": "camera", "members": list(c.members)})
    stats.camera_clusters = sum(
        1 for c in store.camera_clusters if len(c["members"]) >= 2)


def _wallet_pass(store, txs, rates, attributions, contamination, min_forwards,
                 seed, stats):
    if not txs:
        store.replace_wallets([], [])
        return
    part = cluster_multi_input(txs)
    apply_deposit_heuristic(part, txs, min_forwards=min_forwards)
    wallets = label_wallets(part, attributions)
    features = {}
    if rates is not None:
        for w in wallets:
            features[w.id] = wallet_features(w, txs, rates)
    order = sorted(wallets, key=lambda w: w.id)
    flags = {}
    if features:
        feature_rows = [features[w.id] for w in order]
        for w, flagged in zip(order, filter_outliers(
                feature_rows, contamination=contamination, seed=seed)):
            flags[w.id] = flagged

    infos = []
    for w in order:
        feat = features.get(w.id)
        feat_map = {}
        if feat is not None:
            feat_map = {
                "n_addresses": str(feat.n_addresses),
                "n_tx": str(feat.n_tx),
                "n_deposit_tx": str(feat.n_deposit_tx),
                "n_withdraw_tx": str(feat.n_withdraw_tx),
                "deposits_usd": str(to_cents(feat.deposits_usd)),
                "withdrawals_usd": str(to_cents(feat.withdrawals_usd)),
                "balance_usd": str(to_cents(feat.balance_usd)),
            }
        infos.append(WalletInfo(
            wallet_id=w.id,
            addresses=tuple(sorted(w.addresses)),
            labels=tuple(sorted(w.labels)),
            outlier=flags.get(w.id, False),
            features=feat_map,
        ))

    edge_infos = []
    for (src, dst), edge in sorted(build_wallet_graph(txs, part, rates).items()):
        edge_infos.append(WalletEdgeInfo(
            src=src, dst=dst,
            n_transactions=edge.n_transactions,
            total_satoshis=edge.total_satoshis,
            total_usd=str(to_cents(edge.total_usd)) if rates is not None else "",
        ))
    store.replace_wallets(infos, edge_infos)
    stats.wallets = len(infos)
    stats.outlier_wallets = sum(1 for w in infos if w.outlier)


def analyze(
    store: Store,
    labels: TrainingLabels,
    chain_txs: Sequence[ChainTx] = (),
    rates: Optional[RateTable] = None,
    verdicts: Optional[dict[str, ScannerVerdict]] = None,
    config: Optional[Config] = None,
    blacklist: Optional[Sequence[str]] = None,
) -> AnalyzeStats:
    """Run every analysis pass over the crawled store: classification,
    template clusters, image clusters, web graph, wallets, availability."""
    cfg = config or Config()
    seed = cfg.seed
    verdicts = verdicts or {}
    if blacklist is None:
        _, blacklist = load_blacklist()
    stats = AnalyzeStats()
    wall_start = time.monotonic()

    bundles, pages = collect_bundles(store, blacklist)
    stats.domains_total = len(bundles)

    have_topics = False
    corpus_hosts = sorted(bundles)
    try:
        topic_model = fit_topics(
            [bundles[h].cleaned_text for h in corpus_hosts], seed=seed)
        corpus_stats = CorpusStats.from_corpus(
            bundles[h].cleaned_text for h in corpus_hosts)
        apply_corpus_features(
            [bundles[h] for h in corpus_hosts], topic_model, corpus_stats)
        have_topics = True
    except CorpusTooSmall:
        stats.models_skipped.append("topics")
    stats.topics_fitted = have_topics

    models = _train_domain_models(bundles, labels, have_topics, seed, stats)
    _predict_domains(store, bundles, models, stats)
    attributions = _attribution_pass(store, pages, labels, seed, stats)
    if have_topics:
        _template_pass(store, bundles, labels, seed, stats)
    else:
        stats.models_skipped.append("template")

    graph_stats = _graph_pass(store, verdicts, stats)

    frontier = Frontier.restore(store.frontier_snapshot) \
        if store.frontier_snapshot else Frontier()
    _status_pass(store, frontier)
    graph_stats.update(_availability_metrics(frontier))

    _image_pass(store, cfg.hd_threshold, cfg.pce_threshold, stats)
    _wallet_pass(store, list(chain_txs), rates, attributions,
                 cfg.outlier_contamination, cfg.min_forwards, seed, stats)

    graph_stats["counts"] = {
        "documents": len(store.documents),
        "domains": len(store.domains),
        "wallets": len(store.wallets),
        "images": len({r.src_url for r in store.image_records()}),
    }
    store.graph_stats = graph_stats
    stats.wall_seconds = time.monotonic() - wall_start
    return stats


def summarize(store: Store) -> dict:
    """The `stats` CLI payload: store counts plus stored aggregates."""
    by_category: dict[str, int] = {}
    by_language: dict[str, int] = {}
    for rec in store.domains.values():
        if rec.category:
            by_category[rec.category] = by_category.get(rec.category, 0) + 1
        if rec.language:
            by_language[rec.language] = by_language.get(rec.language, 0) + 1
    return {
        "documents": len(store.documents),
        "domains": len(store.domains),
        "wallets": len(store.wallets),
        "images": len({r.src_url for r in store.image_records()}),
        "by_category": dict(sorted(by_category.items())),
        "by_language": dict(sorted(by_language.items())),
        "graph_stats": store.graph_stats,
        "malicious_report": {
            "flagged_urls": len(store.malicious_report.get("flagged_urls", [])),
        },
        "similarity_clusters": len(store.similarity_clusters),
        "camera_clusters": len(store.camera_clusters),
    }

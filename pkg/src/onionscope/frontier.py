"""Shared crawl state: job queue, visited table, role scheduling, metrics.

One frontier instance is the coordination point for any number of
stateless explore/update/check workers. All mutating operations take the
frontier lock, so claims are exclusive and the visited table keeps set
semantics per canonical URL. Time is injected (``now_fn``) so cadence
behaviour is testable under a simulated clock.
"""

from __future__ import annotations

import heapq
import itertools
import re
import threading
import time
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Optional

from .model import OnionDomain, WebUrl, parse_onion_domain

CHECK_INTERVAL = 3600.0       # hourly status checks per discovered domain
UPDATE_INTERVAL = 86400.0     # daily index updates
POLITENESS_DELAY = 1.0        # min seconds between requests to one domain
MAX_INFLIGHT_PER_DOMAIN = 2
MAX_ATTEMPTS = 3
BACKOFF_BASE = 60.0

SECONDS_PER_DAY = 86400.0
SECONDS_PER_WEEK = 7 * SECONDS_PER_DAY


class JobKind(Enum):
    EXPLORE = "explore"
    UPDATE = "update"
    CHECK = "check"


@dataclass(slots=True)
class CrawlJob:
    url: WebUrl
    kind: JobKind
    not_before: float = 0.0
    attempts: int = 0


@dataclass(slots=True)
class VisitedEntry:
    url: WebUrl
    first_seen: float
    last_crawled: float
    content_fingerprint: int = 0
    render_params: dict = field(default_factory=dict)


@dataclass(slots=True)
class SeedSpec:
    indexer_urls: list[WebUrl] = field(default_factory=list)
    search_engine_urls: list[WebUrl] = field(default_factory=list)
    dictionaries: dict[str, list[str]] = field(default_factory=dict)


@dataclass(slots=True)
class StatusRecord:
    domain: str
    timestamp: float
    up: bool


def make_status(domain: str, timestamp: float, descriptor_resolvable: bool,
                status_code: Optional[int]) -> StatusRecord:
    """A domain is up iff its descriptor resolves and the webserver does not
    answer with a 5xx."""
    up = descriptor_resolvable and status_code is not None and not (500 <= status_code < 600)
    return StatusRecord(domain, timestamp, up)


def generate_search_seeds(dictionary: Iterable[str]) -> list[str]:
    """All single words plus all unordered 2-word combinations, in a
    deterministic order (sorted singles, then sorted pairs)."""
    words = sorted(set(dictionary))
    singles = list(words)
    pairs = [f"{a} {b}" for a, b in itertools.combinations(words, 2)]
    return singles + pairs


class OutOfOrderStatus(ValueError):
    pass


class Frontier:
    def __init__(
        self,
        now_fn=time.time,
        politeness_delay: float = POLITENESS_DELAY,
        max_inflight_per_domain: int = MAX_INFLIGHT_PER_DOMAIN,
        check_interval: float = CHECK_INTERVAL,
        update_interval: float = UPDATE_INTERVAL,
        max_attempts: int = MAX_ATTEMPTS,
    ):
        self.now_fn = now_fn
        self.politeness_delay = politeness_delay
        self.max_inflight_per_domain = max_inflight_per_domain
        self.check_interval = check_interval
        self.update_interval = update_interval
        self.max_attempts = max_attempts

        self._lock = threading.RLock()
        self._seq = itertools.count()
        self._queues: dict[JobKind, list] = {kind: [] for kind in JobKind}
        self._queued_urls: dict[JobKind, set[str]] = {kind: set() for kind in JobKind}
        self.visited: dict[str, VisitedEntry] = {}
        self.regular_urls_seen: set[str] = set()
        self.status_history: dict[str, list[tuple[float, bool]]] = {}
        self.known_domains: set[str] = set()
        self.down_domains: set[str] = set()
        self._domain_inflight: dict[str, int] = {}
        self._domain_last_request: dict[str, float] = {}
        self.crawl_counts: dict[str, int] = {}

    # -- enqueue -------------------------------------------------------

    def _push(self, job: CrawlJob) -> None:
        key = str(job.url)
        heapq.heappush(self._queues[job.kind], (job.not_before, next(self._seq), job))
        self._queued_urls[job.kind].add(key)

    def enqueue_discovered(self, urls: Iterable[WebUrl]) -> int:
        """Enqueue fresh onion URLs as Explore jobs, deduplicating against
        the visited table and the queue. Non-onion URLs are recorded for the
        web graph but never queued."""
        accepted = 0
        with self._lock:
            for url in urls:
                key = str(url)
                if not url.is_onion:
                    self.regular_urls_seen.add(key)
                    continue
                if key in self.visited or key in self._queued_urls[JobKind.EXPLORE]:
                    continue
                dom = url.onion_domain
                if dom is None:
                    continue  # malformed onion name: not crawlable
                self.known_domains.add(dom.name)
                self._push(CrawlJob(url, JobKind.EXPLORE, not_before=0.0))
                accepted += 1
        return accepted

    def load_seeds(self, spec: SeedSpec) -> int:
        urls = list(spec.indexer_urls) + list(spec.search_engine_urls)
        return self.enqueue_discovered(urls)

    # -- claim / complete ----------------------------------------------

    def _domain_of(self, url: WebUrl) -> str:
        dom = url.onion_domain
        return dom.name if dom else url.host

    def claim_job(self, worker_kind: JobKind) -> Optional[CrawlJob]:
        """Atomically transfer one eligible job to the caller. Politeness:
        per-domain spacing and in-flight caps are enforced here, by
        rescheduling rather than dropping."""
        now = self.now_fn()
        with self._lock:
            queue = self._queues[worker_kind]
            deferred = []
            claimed: Optional[CrawlJob] = None
            while queue:
                not_before, _, job = queue[0]
                if not_before > now:
                    break
                heapq.heappop(queue)
                domain = self._domain_of(job.url)
                inflight = self._domain_inflight.get(domain, 0)
                last = self._domain_last_request.get(domain, -1e18)
                if inflight >= self.max_inflight_per_domain or now - last < self.politeness_delay:
                    wait = max(self.politeness_delay - (now - last), 0.001)
                    deferred.append(CrawlJob(job.url, job.kind, now + wait, job.attempts))
                    continue
                self._domain_inflight[domain] = inflight + 1
                self._domain_last_request[domain] = now
                # the url stays in _queued_urls while in flight so a
                # concurrent rediscovery cannot enqueue a duplicate
                claimed = job
                break
            for job in deferred:
                heapq.heappush(queue, (job.not_before, next(self._seq), job))
            return claimed

    def complete_job(
        self,
        job: CrawlJob,
        fingerprint: int = 0,
        render_params: Optional[dict] = None,
        now: Optional[float] = None,
    ) -> bool:
        """Mark a claimed job done, update the visited table, and schedule
        the domain's next check/update passes. Returns True when the content
        fingerprint changed (an update run should re-analyze the domain)."""
        now = self.now_fn() if now is None else now
        key = str(job.url)
        with self._lock:
            domain = self._domain_of(job.url)
            self._domain_inflight[domain] = max(0, self._domain_inflight.get(domain, 1) - 1)
            self._queued_urls[job.kind].discard(key)
            changed = True
            entry = self.visited.get(key)
            if entry is None:
                entry = VisitedEntry(job.url, first_seen=now, last_crawled=now,
                                     content_fingerprint=fingerprint,
                                     render_params=render_params or {})
                self.visited[key] = entry
            else:
                changed = entry.content_fingerprint != fingerprint
                entry.last_crawled = now
                entry.content_fingerprint = fingerprint
                if render_params:
                    entry.render_params = render_params
            self.crawl_counts[key] = self.crawl_counts.get(key, 0) + 1
            if job.kind is JobKind.EXPLORE and job.url.path == "/":
                self._schedule_domain(job.url, now)
            if job.kind is JobKind.CHECK:
                self._reschedule(job.url, JobKind.CHECK, now + self.check_interval)
            if job.kind is JobKind.UPDATE:
                self._reschedule(job.url, JobKind.UPDATE, now + self.update_interval)
            return changed

    def _schedule_domain(self, root_url: WebUrl, now: float) -> None:
        self._reschedule(root_url, JobKind.CHECK, now + self.check_interval)
        self._reschedule(root_url, JobKind.UPDATE, now + self.update_interval)

    def _reschedule(self, url: WebUrl, kind: JobKind, when: float) -> None:
        root = url.with_path("/")
        key = str(root)
        if key in self._queued_urls[kind]:
            return
        self._push(CrawlJob(root, kind, not_before=when))

    def defer_job(self, job: CrawlJob, until: float) -> None:
        """Return a claimed job to the queue unfailed (e.g. no proxy endpoint
        had free capacity); the attempt count is not charged."""
        with self._lock:
            domain = self._domain_of(job.url)
            self._domain_inflight[domain] = max(0, self._domain_inflight.get(domain, 1) - 1)
            self._push(CrawlJob(job.url, job.kind, until, job.attempts))

    def fail_job(self, job: CrawlJob, transient: bool = True,
                 now: Optional[float] = None) -> None:
        """Transient failures re-queue with exponential backoff up to the
        attempt cap, after which the domain is marked down."""
        now = self.now_fn() if now is None else now
        with self._lock:
            domain = self._domain_of(job.url)
            self._domain_inflight[domain] = max(0, self._domain_inflight.get(domain, 1) - 1)
            attempts = job.attempts + 1
            if transient and attempts < self.max_attempts:
                backoff = BACKOFF_BASE * (2 ** (attempts - 1))
                retry = CrawlJob(job.url, job.kind, now + backoff, attempts)
                self._push(retry)
            else:
                self.down_domains.add(domain)
                self._queued_urls[job.kind].discard(str(job.url))
                if job.kind is JobKind.CHECK:
                    self._reschedule(job.url, JobKind.CHECK, now + self.check_interval)

    def queue_depth(self, kind: JobKind) -> int:
        with self._lock:
            return len(self._queues[kind])

    def next_due(self, kind: JobKind) -> Optional[float]:
        """Earliest not_before in the queue, or None when it is empty. Lets
        a simulated-clock driver jump straight to the next eligible job."""
        with self._lock:
            queue = self._queues[kind]
            return queue[0][0] if queue else None

    # -- status & availability metrics ----------------------------------

    def record_status(self, rec: StatusRecord) -> None:
        with self._lock:
            history = self.status_history.setdefault(rec.domain, [])
            if history and rec.timestamp <= history[-1][0]:
                raise OutOfOrderStatus(
                    f"status for {rec.domain} at {rec.timestamp} not after {history[-1][0]}"
                )
            history.append((rec.timestamp, rec.up))
            self.known_domains.add(rec.domain)

    def _state_at(self, domain: str, ts: float) -> Optional[bool]:
        history = self.status_history.get(domain, [])
        state = None
        for t, up in history:
            if t > ts:
                break
            state = up
        return state

    def daily_availability(self, day_start: float) -> Optional[float]:
        """Fraction of known domains whose state at the end of the day is up.
        Domains with no reading yet do not count as known."""
        day_end = day_start + SECONDS_PER_DAY
        with self._lock:
            states = [
                self._state_at(domain, day_end) for domain in self.status_history
            ]
        known = [s for s in states if s is not None]
        if not known:
            return None
        return sum(1 for s in known if s) / len(known)

    def weekly_churn(self, week_start: float) -> Optional[float]:
        """Signed weekly churn: (went down - came up) / known domains, so a
        positive value is the fraction that became unavailable by week end."""
        week_end = week_start + SECONDS_PER_WEEK
        went_down = came_up = known = 0
        with self._lock:
            for domain in self.status_history:
                start_state = self._state_at(domain, week_start)
                end_state = self._state_at(domain, week_end)
                if start_state is None or end_state is None:
                    continue
                known += 1
                if start_state and not end_state:
                    went_down += 1
                elif not start_state and end_state:
                    came_up += 1
        if known == 0:
            return None
        return (went_down - came_up) / known

    # -- persistence -----------------------------------------------------

    def snapshot(self) -> dict:
        with self._lock:
            return {
                "queues": {
                    kind.value: [
                        {"url": str(j.url), "not_before": nb, "attempts": j.attempts}
                        for nb, _, j in sorted(self._queues[kind])
                    ]
                    for kind in JobKind
                },
                "visited": [
                    {
                        "url": str(e.url),
                        "first_seen": e.first_seen,
                        "last_crawled": e.last_crawled,
                        "content_fingerprint": e.content_fingerprint,
                        "render_params": e.render_params,
                    }
                    for e in self.visited.values()
                ],
                "status_history": {d: [[t, up] for t, up in h]
                                   for d, h in self.status_history.items()},
                "known_domains": sorted(self.known_domains),
                "regular_urls_seen": sorted(self.regular_urls_seen),
            }

    @classmethod
    def restore(cls, snap: dict, **kwargs) -> "Frontier":
        from .model import parse_url

        frontier = cls(**kwargs)
        for kind in JobKind:
            for item in snap.get("queues", {}).get(kind.value, []):
                job = CrawlJob(parse_url(item["url"]), kind,
                               item["not_before"], item["attempts"])
                frontier._push(job)
        for item in snap.get("visited", []):
            url = parse_url(item["url"])
            frontier.visited[str(url)] = VisitedEntry(
                url, item["first_seen"], item["last_crawled"],
                item["content_fingerprint"], item.get("render_params", {}),
            )
        frontier.status_history = {
            d: [(t, up) for t, up in h]
            for d, h in snap.get("status_history", {}).items()
        }
        frontier.known_domains = set(snap.get("known_domains", []))
        frontier.regular_urls_seen = set(snap.get("regular_urls_seen", []))
        return frontier


# -- robots.txt -----------------------------------------------------------

_ROBOTS_LINE_RE = re.compile(r"^\s*([A-Za-z-]+)\s*:\s*(.*?)\s*$")


def _rule_to_regex(pattern: str) -> re.Pattern:
    out = []
    for ch in pattern:
        if ch == "*":
            out.append(".*")
        elif ch == "$":
            out.append("$")
        else:
            out.append(re.escape(ch))
    return re.compile("^" + "".join(out))


def robots_allowed(domain: OnionDomain | str, path: str, robots_body: str) -> bool:
    """Longest-match Allow/Disallow evaluation for user-agent "*".

    Malformed lines are ignored; an empty body allows everything. On a
    specificity tie, Allow wins.
    """
    rules: list[tuple[bool, str]] = []  # (allow, pattern)
    applies = False
    seen_any_ua = False
    for line in robots_body.splitlines():
        line = line.split("#", 1)[0]
        m = _ROBOTS_LINE_RE.match(line)
        if not m:
            continue
        key, value = m.group(1).lower(), m.group(2)
        if key == "user-agent":
            applies = value.strip() == "*"
            seen_any_ua = True
        elif key in ("allow", "disallow"):
            if not seen_any_ua:
                continue
            if not applies:
                continue
            if value == "":
                continue  # empty pattern matches nothing
            rules.append((key == "allow", value))

    best: Optional[tuple[int, bool]] = None  # (specificity, allow)
    for allow, pattern in rules:
        if _rule_to_regex(pattern).match(path):
            spec_len = len(pattern)
            if best is None or spec_len > best[0] or (spec_len == best[0] and allow):
                best = (spec_len, allow)
    if best is None:
        return True
    return best[1]

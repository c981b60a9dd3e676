"""Page fetching through a pluggable backend with endpoint load balancing.

A backend issues single HTTP GETs and never follows redirects itself; this
module owns the redirect chain (server 3xx, then meta refresh, then a
trivial window.location assignment), endpoint capacity accounting, and the
raw/rendered markup split. The synthetic world and a live proxy pool both
satisfy the same backend contract.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field
from typing import Callable, Optional, Protocol

from .extract import markup as markup_mod
from .model import WebUrl, canonicalize_url

REDIRECT_DEPTH_CAP = 5  # follows beyond the first hop; observed chains are short
DEFAULT_TIMEOUT = 60.0


class ResolutionError(Exception):
    """Domain descriptor could not be resolved (treated as domain down)."""


class TransientFetchError(Exception):
    """Connect/timeout class failure; the job should be retried."""


class EndpointsSaturated(Exception):
    """Every proxy endpoint is at capacity; the job is deferred, not failed."""


@dataclass(slots=True)
class BackendResponse:
    status: int
    headers: dict[str, str]
    body: bytes

    def header(self, name: str) -> Optional[str]:
        for key, value in self.headers.items():
            if key.lower() == name.lower():
                return value
        return None

    @property
    def is_html(self) -> bool:
        ctype = self.header("content-type") or ""
        return "text/html" in ctype.lower()


class FetchBackend(Protocol):
    """One HTTP GET per call; never follows redirects."""

    def get(self, url: WebUrl) -> BackendResponse: ...


@dataclass
class ProxyEndpoint:
    """A single egress point with bounded concurrency, modelling the
    bandwidth-limited entry relay behind it."""

    endpoint_id: str
    capacity: int
    in_flight: int = 0
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False)


class ProxyPool:
    """Least-loaded dispatch over endpoints; in_flight never exceeds capacity."""

    def __init__(self, endpoints: list[ProxyEndpoint]):
        if not endpoints:
            raise ValueError("pool must have at least one endpoint")
        self.endpoints = endpoints
        self._lock = threading.Lock()

    def acquire(self) -> ProxyEndpoint:
        with self._lock:
            free = [e for e in self.endpoints if e.in_flight < e.capacity]
            if not free:
                raise EndpointsSaturated()
            chosen = min(free, key=lambda e: (e.in_flight, e.endpoint_id))
            chosen.in_flight += 1
            return chosen

    def release(self, endpoint: ProxyEndpoint) -> None:
        with self._lock:
            endpoint.in_flight -= 1
            assert endpoint.in_flight >= 0


def _decode_body(body: bytes) -> str:
    try:
        return body.decode("utf-8")
    except UnicodeDecodeError:
        return body.decode("latin-1", errors="replace")


def _client_redirect(body: str) -> Optional[str]:
    target = markup_mod.find_meta_refresh(body)
    if target is None:
        target = markup_mod.find_script_location_redirect(body)
    return target


@dataclass(slots=True)
class FetchResult:
    chain: list[tuple[WebUrl, int]]
    final_url: WebUrl
    status: int
    headers: dict[str, str]
    body: bytes
    raw_html: Optional[str]
    rendered_html: Optional[str]
    assets: dict[str, bytes] = field(default_factory=dict)
    loop_detected: bool = False
    truncated: bool = False
    fetched_at: float = 0.0


def resolve_redirects(
    url: WebUrl,
    first: BackendResponse,
    follower: Callable[[WebUrl], BackendResponse],
    depth_cap: int = REDIRECT_DEPTH_CAP,
) -> tuple[list[tuple[WebUrl, int, BackendResponse]], bool, bool]:
    """Walk the redirect chain starting from an already-fetched first hop.

    Order of precedence per hop: 3xx Location header, then a
    <meta http-equiv="refresh"> URL, then a top-level script assignment to
    window.location. Stops at the first non-redirecting hop, on a repeated
    canonical URL (loop), or at the depth cap (truncated).
    """
    hops = [(url, first.status, first)]
    seen = {str(url)}
    loop = truncated = False
    current_url, response = url, first

    while True:
        target: Optional[str] = None
        if 300 <= response.status < 400:
            target = response.header("location")
        elif response.is_html:
            target = _client_redirect(_decode_body(response.body))
        if target is None:
            break
        next_url = canonicalize_url(target, base=current_url)
        if next_url is None:
            break
        if str(next_url) in seen:
            loop = True
            break
        if len(hops) > depth_cap:
            truncated = True
            break
        next_resp = follower(next_url)
        hops.append((next_url, next_resp.status, next_resp))
        seen.add(str(next_url))
        current_url, response = next_url, next_resp

    return hops, loop, truncated


def mark_homepage(job_url: WebUrl, chain: list[tuple[WebUrl, int]]) -> bool:
    """A root-path fetch counts as the homepage only when the chain ends on
    the same source domain."""
    final_url = chain[-1][0]
    return final_url.host == job_url.host


def fetch_page(
    url: WebUrl,
    pool: ProxyPool,
    backend: FetchBackend,
    fetch_assets: bool = True,
    now: float = 0.0,
) -> FetchResult:
    """Fetch one URL through the least-loaded endpoint and resolve its full
    redirect chain, collecting referenced script/style/image bodies.

    Raises EndpointsSaturated when no endpoint has free capacity (defer),
    ResolutionError / TransientFetchError as surfaced by the backend.
    """
    endpoint = pool.acquire()
    try:
        first = backend.get(url)
        hops, loop, truncated = resolve_redirects(url, first, backend.get)

        raw_html: Optional[str] = None
        for _, status, resp in hops:
            if not 300 <= status < 400 and resp.is_html:
                raw_html = _decode_body(resp.body)
                break
        final_url, final_status, final_resp = hops[-1]
        rendered_html = _decode_body(final_resp.body) if final_resp.is_html else None

        assets: dict[str, bytes] = {}
        if fetch_assets and rendered_html is not None:
            scan = markup_mod.scan_markup(rendered_html)
            refs = list(scan.external_scripts) + list(scan.external_styles)
            refs += [img.src for img in scan.images if img.src]
            for ref in refs:
                asset_url = canonicalize_url(ref, base=final_url)
                if asset_url is None or str(asset_url) in assets:
                    continue
                try:
                    resp = backend.get(asset_url)
                except (ResolutionError, TransientFetchError):
                    continue
                if resp.status == 200:
                    assets[str(asset_url)] = resp.body

        return FetchResult(
            chain=[(u, s) for u, s, _ in hops],
            final_url=final_url,
            status=final_status,
            headers=final_resp.headers,
            body=final_resp.body,
            raw_html=raw_html,
            rendered_html=rendered_html,
            assets=assets,
            loop_detected=loop,
            truncated=truncated,
            fetched_at=now,
        )
    finally:
        pool.release(endpoint)


class HttpProxyBackend:
    """Live backend speaking a per-endpoint proxy contract (host:port), so a
    real Tor client pool can be dropped in unchanged. Not exercised by the
    test suite; the synthetic world backend covers the contract."""

    def __init__(
        self,
        proxy_url: str,
        timeout: float = DEFAULT_TIMEOUT,
        user_agent: str = "onionscope/0.1",
    ):
        import httpx

        self._client = httpx.Client(
            proxy=proxy_url,
            timeout=timeout,
            follow_redirects=False,
            headers={"User-Agent": user_agent},
        )

    def get(self, url: WebUrl) -> BackendResponse:
        import httpx

        try:
            resp = self._client.get(str(url))
        except httpx.ConnectError as exc:
            raise ResolutionError(str(exc)) from exc
        except httpx.HTTPError as exc:
            raise TransientFetchError(str(exc)) from exc
        return BackendResponse(
            status=resp.status_code,
            headers=dict(resp.headers),
            body=resp.content,
        )

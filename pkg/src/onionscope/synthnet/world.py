"""World generation and the synthetic fetch backend.

One seed determines everything: names, labels, templates, page bodies,
images, chain, churn, and verdicts. Generation plants exactly the structures
the analysis pipeline is supposed to recover, and records them in a
GroundTruth manifest that acceptance tests treat as the oracle.
"""

from __future__ import annotations

import hashlib
import random
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Callable, Optional
from urllib.parse import quote

import numpy as np

from ..crypto import ChainTx, RateTable, format_tx_feed
from ..fetch import BackendResponse, ResolutionError
from ..model import CATEGORIES, WebUrl, v3_name_from_pubkey
from .chain import DAY, ChainPlan, default_rate_table, generate_chain
from .images import (
    CAMERA_SIZE,
    SIMILARITY_SIZE,
    camera_capture,
    camera_pattern,
    distinct_image,
    similarity_base,
    similarity_member,
)
from .vocab import (
    BENIGN_SNIPPET,
    CATEGORY_VOCAB,
    ILLICIT_VOCAB,
    LANGUAGES,
    TRACKING_SNIPPET,
    language_filler,
)

WEEK = 7 * DAY
_V2_ALPHABET = "abcdefghijklmnopqrstuvwxyz234567"
_EXTERNAL_SUFFIXES = ("com", "net", "org", "co.uk", "github.io")


class SpecInfeasible(ValueError):
    pass


@dataclass(frozen=True)
class WorldSpec:
    """Knobs for one synthetic world. Identical specs (same seed included)
    generate byte-identical worlds."""

    seed: int = 0
    n_domains: int = 160
    category_mix: tuple[tuple[str, float], ...] = (
        ("other", 0.30), ("marketplace", 0.18), ("crypto", 0.13),
        ("indexer", 0.13), ("social media", 0.13), ("pornography", 0.13),
    )
    mirror_cluster_sizes: tuple[int, ...] = (4, 3, 3)
    languages: tuple[str, ...] = LANGUAGES
    illicit_fraction: float = 0.35
    tracked_fraction: float = 0.30
    attributed_fraction: float = 0.08
    decoy_fraction: float = 0.06
    n_similarity_clusters: int = 4
    similarity_cluster_size: int = 5
    n_standalone_images: int = 6
    n_cameras: int = 4
    images_per_camera: int = 12
    subpage_range: tuple[int, int] = (1, 3)
    outlink_range: tuple[int, int] = (1, 4)
    external_link_fraction: float = 0.35
    n_external_urls: int = 40
    malicious_plant_rate: float = 0.4
    churn_weeks: int = 3
    churn_flip_fraction: float = 0.12
    start_down_fraction: float = 0.05
    n_redirect_domains: int = 2
    n_meta_refresh_domains: int = 1
    n_robots_domains: int = 2
    n_isolated_domains: int = 4
    v2_fraction: float = 0.2

    def validate(self) -> None:
        if self.n_domains < 1:
            raise SpecInfeasible("n_domains must be >= 1")
        if sum(self.mirror_cluster_sizes) > self.n_domains:
            raise SpecInfeasible("mirror clusters exceed n_domains")
        for size in self.mirror_cluster_sizes:
            if size < 2:
                raise SpecInfeasible("mirror clusters need >= 2 members")
        for name, weight in self.category_mix:
            if name not in CATEGORIES:
                raise SpecInfeasible(f"unknown category {name!r}")
            if weight <= 0:
                raise SpecInfeasible("category weights must be positive")
        for lang in self.languages:
            if lang not in LANGUAGES:
                raise SpecInfeasible(f"unknown language {lang!r}")
        if self.similarity_cluster_size < 2 and self.n_similarity_clusters:
            raise SpecInfeasible("similarity clusters need >= 2 members")


@dataclass(frozen=True)
class DomainTruth:
    host: str
    version: str
    category: str
    language: str
    illicit: bool
    mirror_cluster: Optional[int]
    tracked: bool
    attributed: tuple[str, ...]
    role: str          # content | redirect | meta-refresh | moved | isolated
    has_robots: bool


@dataclass(frozen=True)
class ImageTruth:
    url: str
    similarity_cluster: Optional[int]
    camera: Optional[int]


@dataclass
class GroundTruth:
    domains: dict[str, DomainTruth] = field(default_factory=dict)
    mirror_clusters: list[tuple[str, ...]] = field(default_factory=list)
    images: dict[str, ImageTruth] = field(default_factory=dict)
    wallets: dict[str, frozenset[str]] = field(default_factory=dict)
    address_wallet: dict[str, str] = field(default_factory=dict)
    outlier_wallets: set[str] = field(default_factory=set)
    wallet_labels: dict[str, tuple[str, ...]] = field(default_factory=dict)
    url_malicious: dict[str, bool] = field(default_factory=dict)
    churn: dict[str, tuple[tuple[float, bool], ...]] = field(default_factory=dict)

    def state_at(self, host: str, t: float) -> bool:
        state = False
        for ts, up in self.churn.get(host, ()):
            if ts <= t:
                state = up
            else:
                break
        return state


@dataclass(slots=True)
class PageBlob:
    status: int
    content_type: str
    body: bytes
    location: Optional[str] = None

    def headers(self) -> dict[str, str]:
        h = {"content-type": self.content_type}
        if self.location is not None:
            h["location"] = self.location
        return h


@dataclass
class World:
    spec: WorldSpec
    pages: dict[str, dict[str, PageBlob]]
    truth: GroundTruth
    chain: list[ChainTx]
    rates: RateTable
    verdict_feed: str
    seeds: tuple[str, ...]
    horizon: float

    def serve(self, url: WebUrl, now: float) -> BackendResponse:
        """Backend response for one URL at one instant, honoring churn."""
        host = url.host
        site = self.pages.get(host)
        if site is None:
            raise ResolutionError(f"no descriptor for {host}")
        if not self.truth.state_at(host, now):
            # Down mode is a fixed property of the domain: half resolve but
            # serve errors, half drop off the directory entirely.
            if _stable_digest(host) % 2:
                return BackendResponse(
                    status=503,
                    headers={"content-type": "text/html"},
                    body=b"<html><body>service unavailable</body></html>",
                )
            raise ResolutionError(f"descriptor for {host} unpublished")
        blob = site.get(url.path)
        if blob is None:
            return BackendResponse(
                status=404,
                headers={"content-type": "text/html"},
                body=b"<html><body>not found</body></html>",
            )
        return BackendResponse(blob.status, blob.headers(), blob.body)


class SyntheticBackend:
    """FetchBackend over a generated world with an injected clock."""

    def __init__(self, world: World, now_fn: Callable[[], float] = lambda: 0.0):
        self.world = world
        self.now_fn = now_fn

    def get(self, url: WebUrl) -> BackendResponse:
        return self.world.serve(url, self.now_fn())


def _stable_digest(text: str) -> int:
    return int.from_bytes(hashlib.blake2b(text.encode(), digest_size=8).digest(),
                          "big")


def _child(seed: int, *parts: object) -> random.Random:
    key = ":".join(str(p) for p in (seed,) + parts)
    return random.Random(_stable_digest(key))


def _np_child(seed: int, *parts: object) -> np.random.Generator:
    key = ":".join(str(p) for p in (seed,) + parts)
    return np.random.default_rng(_stable_digest(key))


def _apportion(n: int, mix: tuple[tuple[str, float], ...]) -> list[str]:
    """Largest-remainder assignment of n slots to categories."""
    total = sum(w for _, w in mix)
    quotas = [(name, n * w / total) for name, w in mix]
    counts = {name: int(q) for name, q in quotas}
    left = n - sum(counts.values())
    for name, q in sorted(quotas, key=lambda x: (-(x[1] - int(x[1])), x[0])):
        if left == 0:
            break
        counts[name] += 1
        left -= 1
    out = []
    for name, _ in mix:
        out.extend([name] * counts[name])
    return out


def _make_host(rng: random.Random, v2_fraction: float) -> tuple[str, str]:
    if rng.random() < v2_fraction:
        name = "".join(rng.choice(_V2_ALPHABET) for _ in range(16))
        return name + ".onion", "v2"
    return v3_name_from_pubkey(rng.randbytes(32)) + ".onion", "v3"


# -- page assembly ----------------------------------------------------------


@dataclass
class _Template:
    template_id: int
    brand: tuple[str, ...]
    selectors: tuple[str, ...]
    css_body: str
    n_nav: int
    n_sections: int
    has_form: bool
    n_buttons: int


_CSS_PROPS = (
    ("color", ("#223344", "#552211", "#667788", "#004455", "#331144")),
    ("margin", ("4px", "8px", "12px", "16px")),
    ("padding", ("2px", "6px", "10px")),
    ("font-size", ("12px", "14px", "16px", "18px")),
    ("border", ("1px solid #ccc", "2px dotted #888", "none")),
)


def _make_template(rng: random.Random, template_id: int) -> _Template:
    brand = tuple(
        "".join(rng.choice("prstvw") for _ in range(rng.randint(5, 7)))
        for _ in range(3)
    )
    n_rules = rng.randint(4, 8)
    selectors = []
    rules = []
    for i in range(n_rules):
        sel = f".{brand[0]}-{rng.randint(10, 99)}" if i else f"#{brand[1]}"
        selectors.append(sel)
        prop, values = _CSS_PROPS[rng.randrange(len(_CSS_PROPS))]
        rules.append(f"{sel} {{ {prop}: {rng.choice(values)}; }}")
    return _Template(
        template_id=template_id,
        brand=brand,
        selectors=tuple(selectors),
        css_body="\n".join(rules) + "\n",
        n_nav=rng.randint(2, 5),
        n_sections=rng.randint(2, 4),
        has_form=rng.random() < 0.5,
        n_buttons=rng.randint(0, 3),
    )


def _tokens(rng: random.Random, category: str, language: str,
            illicit: bool, brand: tuple[str, ...]) -> list[str]:
    words = []
    vocab = CATEGORY_VOCAB[category]
    words += [rng.choice(vocab) for _ in range(40)]
    words += [rng.choice(language_filler(language)) for _ in range(50)]
    if illicit:
        words += [rng.choice(ILLICIT_VOCAB) for _ in range(18)]
    words += list(brand) * 4
    rng.shuffle(words)
    return words


def _paragraphs(words: list[str], per: int = 12) -> str:
    out = []
    for i in range(0, len(words), per):
        out.append("<p>" + " ".join(words[i:i + per]) + "</p>")
    return "\n".join(out)


def _content_page(
    rng: random.Random,
    template: _Template,
    truth: DomainTruth,
    nav_paths: list[str],
    onion_links: list[str],
    external_links: list[str],
    images: list[tuple[str, int, int]],
    donate_address: Optional[str],
    decoy_address: Optional[str],
    title_extra: str = "",
) -> str:
    words = _tokens(rng, truth.category, truth.language, truth.illicit,
                    template.brand)
    nav_items = "".join(
        f'<li><a href="{p}">{template.brand[i % 3]} {i}</a></li>'
        for i, p in enumerate(nav_paths[: template.n_nav])
    )
    sections = []
    chunk = max(1, len(words) // template.n_sections)
    for s in range(template.n_sections):
        body = _paragraphs(words[s * chunk:(s + 1) * chunk])
        sections.append(f'<section class="{template.brand[0]}-{s}">{body}</section>')
    if decoy_address is not None:
        sections.append(
            f"<section><p>sample address {decoy_address} shown for testing"
            " purposes only</p></section>")
    img_tags = "".join(
        f'<img src="{src}" width="{w}" height="{h}" alt="pic">'
        for src, w, h in images
    )
    form = ""
    if template.has_form:
        form = ('<form action="/p1" method="get"><input type="text" name="q">'
                + "".join(f"<button>go {i}</button>"
                          for i in range(template.n_buttons))
                + "</form>")
    link_items = "".join(
        f'<li><a href="{u}">more</a></li>' for u in onion_links + external_links
    )
    footer_bits = [f"<ul>{link_items}</ul>" if link_items else ""]
    if donate_address is not None:
        footer_bits.append(
            f"<p>donate {donate_address} to support this service</p>")
    script = TRACKING_SNIPPET if truth.tracked else BENIGN_SNIPPET
    return (
        "<html><head>"
        f"<title>{template.brand[0]} {title_extra}</title>"
        '<link rel="stylesheet" href="/style.css">'
        "</head><body>"
        f"<header><h1>{template.brand[0]} {template.brand[1]}</h1></header>"
        f"<nav><ul>{nav_items}</ul></nav>"
        + "".join(sections)
        + img_tags
        + form
        + f"<footer>{''.join(footer_bits)}</footer>"
        f"<script>{script}</script>"
        "</body></html>"
    )


# -- generation ----------------------------------------------------------------


def _plan_for(n_services: int, seed: int) -> ChainPlan:
    """Size the chain so round(0.05 * wallets) equals the exchange count."""
    n_ex = max(1, round(n_services / 12))
    while 19 * n_ex - n_services < 4:
        n_ex += 1
    n_cust = 19 * n_ex - n_services
    return ChainPlan(
        seed=seed,
        n_customers=n_cust,
        n_services=n_services,
        n_exchanges=n_ex,
        payments=max(8, 4 * n_services),
    )


def generate(spec: WorldSpec) -> World:
    spec.validate()
    seed = spec.seed
    truth = GroundTruth()
    horizon = spec.churn_weeks * WEEK

    # Names. Index order is the canonical domain order everywhere below.
    name_rng = _child(seed, "names")
    hosts: list[str] = []
    versions: dict[str, str] = {}
    seen = set()
    while len(hosts) < spec.n_domains:
        host, version = _make_host(name_rng, spec.v2_fraction)
        if host in seen:
            continue
        seen.add(host)
        hosts.append(host)
        versions[host] = version

    # Labels.
    cat_rng = _child(seed, "categories")
    categories = _apportion(spec.n_domains, spec.category_mix)
    cat_rng.shuffle(categories)
    label_rng = _child(seed, "labels")
    language = {h: label_rng.choice(spec.languages) for h in hosts}
    illicit = {h: label_rng.random() < spec.illicit_fraction for h in hosts}
    tracked = {h: label_rng.random() < spec.tracked_fraction for h in hosts}
    category = dict(zip(hosts, categories))

    # Mirror clusters claim the front of a shuffled host list; subsequent
    # special roles draw from the remainder so roles never overlap.
    pool_rng = _child(seed, "pools")
    shuffled = hosts[:]
    pool_rng.shuffle(shuffled)
    mirror_of: dict[str, Optional[int]] = {h: None for h in hosts}
    cursor = 0
    for cidx, size in enumerate(spec.mirror_cluster_sizes):
        members = shuffled[cursor:cursor + size]
        cursor += size
        leader = members[0]
        for m in members:
            mirror_of[m] = cidx
            category[m] = category[leader]
            language[m] = language[leader]
            illicit[m] = illicit[leader]
            tracked[m] = tracked[leader]
        truth.mirror_clusters.append(tuple(sorted(members)))

    def take(n: int) -> list[str]:
        nonlocal cursor
        picked = shuffled[cursor:cursor + n]
        cursor += len(picked)
        return picked

    redirect_hosts = take(min(spec.n_redirect_domains, spec.n_domains))
    meta_hosts = take(spec.n_meta_refresh_domains)
    robots_hosts = take(spec.n_robots_domains)
    isolated_hosts = take(spec.n_isolated_domains)
    moved_host = redirect_hosts[1] if len(redirect_hosts) > 1 else None

    role: dict[str, str] = {h: "content" for h in hosts}
    for h in redirect_hosts:
        role[h] = "redirect"
    if moved_host is not None:
        role[moved_host] = "moved"
    for h in meta_hosts:
        role[h] = "meta-refresh"
    for h in isolated_hosts:
        role[h] = "isolated"

    content_hosts = [h for h in hosts if role[h] in ("content", "isolated")
                     and h not in robots_hosts]

    # Attribution and decoys.
    attr_rng = _child(seed, "attribution")
    eligible = [h for h in content_hosts if mirror_of[h] is None]
    attr_rng.shuffle(eligible)
    n_attr = max(1, round(spec.attributed_fraction * spec.n_domains))
    n_decoy = round(spec.decoy_fraction * spec.n_domains)
    attributed_hosts = sorted(eligible[:n_attr])
    decoy_hosts = sorted(eligible[n_attr:n_attr + n_decoy])

    plan = _plan_for(len(attributed_hosts), seed)
    chain, chain_truth = generate_chain(plan)
    rates = default_rate_table(start=0.0, days=int(horizon / DAY) + 7,
                               seed=seed + 7)
    donate_for: dict[str, str] = {}
    for i, h in enumerate(attributed_hosts):
        donate_for[h] = chain_truth.service_public_address[i]
    decoy_for: dict[str, str] = {}
    for i, h in enumerate(decoy_hosts):
        decoy_for[h] = chain_truth.customer_addresses[
            i % len(chain_truth.customer_addresses)]

    truth.wallets = {w: frozenset(m) for w, m in chain_truth.wallets.items()}
    truth.address_wallet = dict(chain_truth.address_wallet)
    truth.outlier_wallets = set(chain_truth.outlier_wallets)
    labels: dict[str, set[str]] = {}
    for h, addr in donate_for.items():
        labels.setdefault(truth.address_wallet[addr], set()).add(h)
    truth.wallet_labels = {w: tuple(sorted(v)) for w, v in labels.items()}

    # Templates: one per mirror cluster, one per remaining domain.
    templates: dict[str, _Template] = {}
    for cidx, members in enumerate(truth.mirror_clusters):
        t = _make_template(_child(seed, "template", "mirror", cidx), cidx)
        for m in members:
            templates[m] = t
    next_tid = len(truth.mirror_clusters)
    for h in hosts:
        if h not in templates:
            templates[h] = _make_template(
                _child(seed, "template", h), next_tid)
            next_tid += 1

    # Link topology over non-isolated hosts.
    link_rng = _child(seed, "links")
    linkable = [h for h in hosts if role[h] != "isolated"]
    out_links: dict[str, list[str]] = {h: [] for h in hosts}
    for h in hosts:
        if role[h] == "isolated":
            continue
        if category[h] == "indexer":
            k = link_rng.randint(8, 15)
        else:
            k = link_rng.randint(*spec.outlink_range)
        k = min(k, len(linkable) - 1)
        choices = [x for x in link_rng.sample(linkable, k + 1) if x != h][:k]
        out_links[h] = choices

    # External (regular web) URL pool and verdicts.
    ext_rng = _child(seed, "external")
    external_urls = []
    for k in range(spec.n_external_urls):
        suffix = _EXTERNAL_SUFFIXES[k % len(_EXTERNAL_SUFFIXES)]
        sub = "www." if ext_rng.random() < 0.4 else ""
        external_urls.append(f"http://{sub}site{k:02d}.{suffix}/page{k}.html")
    verdict_lines = []
    for u in external_urls:
        total = ext_rng.randint(3, 5)
        malicious = ext_rng.random() < spec.malicious_plant_rate
        flagging = ext_rng.randint(1, total) if malicious else 0
        truth.url_malicious[u] = malicious
        verdict_lines.append(f"{u}\t{flagging}\t{total}")
    verdict_feed = "\n".join(verdict_lines) + "\n"
    ext_for: dict[str, list[str]] = {h: [] for h in hosts}
    for h in hosts:
        if role[h] in ("moved",):
            continue
        if ext_rng.random() < spec.external_link_fraction and external_urls:
            ext_for[h] = ext_rng.sample(
                external_urls, ext_rng.randint(1, min(3, len(external_urls))))

    # Image placement on content hosts.
    img_rng = _child(seed, "images")
    placements: dict[str, list[tuple[str, bytes, int]]] = {h: [] for h in hosts}
    img_pool = [h for h in content_hosts] or hosts
    planted_hashes: list[int] = []
    sim_cluster_id = 0
    for c in range(spec.n_similarity_clusters):
        base = similarity_base(_np_child(seed, "simbase", c),
                               taken=planted_hashes)
        for m in range(spec.similarity_cluster_size):
            host = img_pool[(c * spec.similarity_cluster_size + m) % len(img_pool)]
            png = similarity_member(base, _np_child(seed, "simmem", c, m))
            path = f"/img/sim{c}_{m}.png"
            placements[host].append((path, png, SIMILARITY_SIZE))
            truth.images[f"http://{host}{path}"] = ImageTruth(
                url=f"http://{host}{path}",
                similarity_cluster=sim_cluster_id, camera=None)
        sim_cluster_id += 1
    cam_pool = img_pool[::-1]
    for c in range(spec.n_cameras):
        pattern = camera_pattern(_np_child(seed, "campat", c))
        for m in range(spec.images_per_camera):
            host = cam_pool[(c * spec.images_per_camera + m) % len(cam_pool)]
            png = camera_capture(pattern, _np_child(seed, "camimg", c, m),
                                 taken=planted_hashes)
            path = f"/img/cam{c}_{m}.png"
            placements[host].append((path, png, CAMERA_SIZE))
            truth.images[f"http://{host}{path}"] = ImageTruth(
                url=f"http://{host}{path}",
                similarity_cluster=None, camera=c)
    for s in range(spec.n_standalone_images):
        host = img_pool[(s * 7) % len(img_pool)]
        png = distinct_image(_np_child(seed, "lone", s), taken=planted_hashes)
        path = f"/img/lone{s}.png"
        placements[host].append((path, png, SIMILARITY_SIZE))
        truth.images[f"http://{host}{path}"] = ImageTruth(
            url=f"http://{host}{path}", similarity_cluster=None, camera=None)

    # Churn schedules.
    churn_rng = _child(seed, "churn")
    for h in hosts:
        schedule = [(0.0, not (churn_rng.random() < spec.start_down_fraction))]
        state = schedule[0][1]
        for week in range(1, spec.churn_weeks + 1):
            if churn_rng.random() < spec.churn_flip_fraction:
                at = week * WEEK - churn_rng.uniform(3600.0, 80 * 3600.0)
                state = not state
                schedule.append((at, state))
        truth.churn[h] = tuple(schedule)

    # Domain truth records.
    for h in hosts:
        truth.domains[h] = DomainTruth(
            host=h,
            version=versions[h],
            category=category[h],
            language=language[h],
            illicit=illicit[h],
            mirror_cluster=mirror_of[h],
            tracked=tracked[h],
            attributed=(donate_for[h],) if h in donate_for else (),
            role=role[h],
            has_robots=h in robots_hosts,
        )

    # Page bodies.
    pages: dict[str, dict[str, PageBlob]] = {}
    html = "text/html; charset=utf-8"
    for h in hosts:
        dt = truth.domains[h]
        t = templates[h]
        page_rng = _child(seed, "pages", h)
        site: dict[str, PageBlob] = {}
        n_sub = page_rng.randint(*spec.subpage_range)
        sub_paths = [f"/p{i + 1}" for i in range(n_sub)]
        if dt.has_robots:
            sub_paths.append("/private")
            site["/robots.txt"] = PageBlob(
                200, "text/plain", b"User-agent: *\nDisallow: /private\n")
        onion_hrefs = [f"http://{x}/" for x in out_links[h]]
        home_imgs = [
            (path, size, size) for path, _, size in placements[h]
        ]
        home = _content_page(
            page_rng, t, dt, sub_paths, onion_hrefs, ext_for[h], home_imgs,
            donate_for.get(h), decoy_for.get(h), title_extra="home",
        )
        if dt.role == "redirect":
            site["/"] = PageBlob(302, html, b"moved", location="/home")
            site["/home"] = PageBlob(200, html, home.encode())
        elif dt.role == "moved":
            target = out_links[h][0] if out_links[h] else hosts[0]
            site["/"] = PageBlob(302, html, b"moved",
                                 location=f"http://{target}/")
        elif dt.role == "meta-refresh":
            stub = ("<html><head><meta http-equiv=\"refresh\" "
                    "content=\"1;url=/home\"></head>"
                    "<body>redirecting</body></html>")
            site["/"] = PageBlob(200, html, stub.encode())
            site["/home"] = PageBlob(200, html, home.encode())
        else:
            site["/"] = PageBlob(200, html, home.encode())
        for i, sp in enumerate(sub_paths):
            sub = _content_page(
                page_rng, t, dt, ["/"], [], [], [], None, None,
                title_extra=f"page {i}",
            )
            site[sp] = PageBlob(200, html, sub.encode())
        site["/style.css"] = PageBlob(200, "text/css", t.css_body.encode())
        for path, png, _ in placements[h]:
            site[path] = PageBlob(200, "image/png", png)
        pages[h] = site

    return World(
        spec=spec,
        pages=pages,
        truth=truth,
        chain=chain,
        rates=rates,
        verdict_feed=verdict_feed,
        seeds=tuple(f"http://{h}/" for h in sorted(hosts)),
        horizon=horizon,
    )


# -- serialization ----------------------------------------------------------------


def _spec_to_lines(spec: WorldSpec) -> str:
    out = []
    for f in fields(spec):
        out.append(f"{f.name}={getattr(spec, f.name)!r}")
    return "\n".join(out) + "\n"


def _spec_from_lines(text: str) -> WorldSpec:
    import ast

    kwargs = {}
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        key, _, value = line.partition("=")
        kwargs[key.strip()] = ast.literal_eval(value.strip())
    return WorldSpec(**kwargs)


def save_world(world: World, directory: str | Path) -> Path:
    """Write the full world: spec, page/asset bodies, chain feed, rate
    table, verdict feed, seeds, and the ground-truth manifest."""
    root = Path(directory)
    root.mkdir(parents=True, exist_ok=True)
    (root / "spec.txt").write_text(_spec_to_lines(world.spec))
    (root / "chain.tsv").write_text(format_tx_feed(world.chain))
    (root / "rates.tsv").write_text(
        "".join(f"{ts!r}\t{rate}\n" for ts, rate in world.rates.points))
    (root / "verdicts.tsv").write_text(world.verdict_feed)
    (root / "seeds.txt").write_text("".join(u + "\n" for u in world.seeds))

    pages_dir = root / "pages"
    for host in sorted(world.pages):
        host_dir = pages_dir / host
        host_dir.mkdir(parents=True, exist_ok=True)
        for path in sorted(world.pages[host]):
            blob = world.pages[host][path]
            fname = quote(path, safe="")
            (host_dir / fname).write_bytes(blob.body)
            meta = f"{blob.status}\t{blob.content_type}\t{blob.location or ''}\n"
            (host_dir / (fname + ".meta")).write_text(meta)

    truth = world.truth
    lines = []
    for host in sorted(truth.domains):
        d = truth.domains[host]
        lines.append("\t".join((
            d.host, d.version, d.category, d.language, str(int(d.illicit)),
            "" if d.mirror_cluster is None else str(d.mirror_cluster),
            str(int(d.tracked)), ",".join(d.attributed), d.role,
            str(int(d.has_robots)),
        )))
    (root / "truth_domains.tsv").write_text("".join(l + "\n" for l in lines))
    (root / "truth_images.tsv").write_text("".join(
        f"{u}\t{'' if t.similarity_cluster is None else t.similarity_cluster}"
        f"\t{'' if t.camera is None else t.camera}\n"
        for u, t in sorted(truth.images.items())))
    (root / "truth_addresses.tsv").write_text("".join(
        f"{a}\t{w}\t{int(w in truth.outlier_wallets)}\n"
        for a, w in sorted(truth.address_wallet.items())))
    (root / "truth_urls.tsv").write_text("".join(
        f"{u}\t{int(m)}\n" for u, m in sorted(truth.url_malicious.items())))
    (root / "truth_churn.tsv").write_text("".join(
        h + "\t" + ",".join(f"{ts!r}:{int(up)}" for ts, up in sched) + "\n"
        for h, sched in sorted(truth.churn.items())))
    counts = (
        f"domains={len(truth.domains)}\n"
        f"pages={sum(len(s) for s in world.pages.values())}\n"
        f"images={len(truth.images)}\n"
        f"txs={len(world.chain)}\n"
        f"wallets={len(truth.wallets)}\n"
    )
    (root / "manifest.txt").write_text(counts)
    return root


def load_world(directory: str | Path) -> World:
    """Rebuild a world from its directory. Generation is deterministic, so
    the spec is the authoritative source; the manifest guards against a
    mismatched generator version."""
    root = Path(directory)
    spec = _spec_from_lines((root / "spec.txt").read_text())
    world = generate(spec)
    manifest = (root / "manifest.txt").read_text()
    expected = f"domains={len(world.truth.domains)}\n"
    if not manifest.startswith(expected):
        raise ValueError("world directory does not match this generator")
    return world

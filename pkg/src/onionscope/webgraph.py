"""Typed domain graph: SCCs, bow-tie regions, clustering, link reports.

Nodes are domains (onion = type-1, regular web = type-2); every edge
starts at a type-1 node because only onion pages are crawled. Analytics
run on the onion-only restriction of the graph.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from importlib import resources
from typing import Iterable, Optional, Sequence

from .model import PageDocument

TYPE_ONION = "type-1"
TYPE_REGULAR = "type-2"


class EdgeTypeViolation(ValueError):
    pass


@dataclass
class DomainGraph:
    node_types: dict[str, str] = field(default_factory=dict)
    edges: set[tuple[str, str]] = field(default_factory=set)

    def add_node(self, domain: str, node_type: str) -> None:
        prev = self.node_types.get(domain)
        if prev is not None and prev != node_type:
            raise EdgeTypeViolation(
                f"{domain} already registered as {prev}, not {node_type}")
        self.node_types[domain] = node_type

    def add_edge(self, src: str, dst: str, dst_type: str) -> None:
        """Source nodes are always onion domains; only the target varies."""
        if src == dst:
            return  # a domain linking itself is not an edge between domains
        self.add_node(src, TYPE_ONION)
        self.add_node(dst, dst_type)
        self.edges.add((src, dst))

    def nodes_of_type(self, node_type: str) -> list[str]:
        return sorted(d for d, t in self.node_types.items() if t == node_type)

    def onion_subgraph(self) -> dict[str, set[str]]:
        """Adjacency over type-1 nodes only, every type-1 node present."""
        adj: dict[str, set[str]] = {
            d: set() for d, t in self.node_types.items() if t == TYPE_ONION
        }
        for src, dst in self.edges:
            if src in adj and dst in adj:
                adj[src].add(dst)
        return adj

    def check_invariants(self) -> None:
        for src, _ in self.edges:
            if self.node_types.get(src) != TYPE_ONION:
                raise EdgeTypeViolation(f"edge source {src} is not type-1")


def build(documents: Iterable[PageDocument]) -> DomainGraph:
    """One node per distinct domain, one edge per linked ordered pair."""
    graph = DomainGraph()
    for doc in documents:
        src_domain = doc.url.host
        graph.add_node(src_domain, TYPE_ONION)
        for target in doc.out_urls:
            dst_type = TYPE_ONION if target.is_onion else TYPE_REGULAR
            graph.add_edge(src_domain, target.host, dst_type)
    graph.check_invariants()
    return graph


# -- strongly connected components ----------------------------------------


def _tarjan(adj: dict[str, set[str]]) -> list[list[str]]:
    """Iterative Tarjan: recursion-free so million-node graphs cannot blow
    the interpreter stack."""
    index_of: dict[str, int] = {}
    lowlink: dict[str, int] = {}
    on_stack: set[str] = set()
    stack: list[str] = []
    components: list[list[str]] = []
    counter = 0

    for root in adj:
        if root in index_of:
            continue
        work = [(root, iter(sorted(adj[root])))]
        index_of[root] = lowlink[root] = counter
        counter += 1
        stack.append(root)
        on_stack.add(root)
        while work:
            node, children = work[-1]
            advanced = False
            for child in children:
                if child not in index_of:
                    index_of[child] = lowlink[child] = counter
                    counter += 1
                    stack.append(child)
                    on_stack.add(child)
                    work.append((child, iter(sorted(adj[child]))))
                    advanced = True
                    break
                if child in on_stack:
                    lowlink[node] = min(lowlink[node], index_of[child])
            if advanced:
                continue
            work.pop()
            if work:
                parent = work[-1][0]
                lowlink[parent] = min(lowlink[parent], lowlink[node])
            if lowlink[node] == index_of[node]:
                component = []
                while True:
                    w = stack.pop()
                    on_stack.discard(w)
                    component.append(w)
                    if w == node:
                        break
                components.append(sorted(component))
    return components


def scc(graph: DomainGraph) -> tuple[list[list[str]], list[str]]:
    """All SCCs of the onion restriction plus the largest one. Largest =
    most nodes, ties by internal edge count, then by smallest member id."""
    adj = graph.onion_subgraph()
    components = _tarjan(adj)
    if not components:
        return [], []

    def internal_edges(comp: list[str]) -> int:
        members = set(comp)
        return sum(1 for src in comp for dst in adj[src] if dst in members)

    components.sort(key=lambda c: c[0])
    lscc = min(components,
               key=lambda c: (-len(c), -internal_edges(c), c[0]))
    return components, lscc


# -- clustering -------------------------------------------------------------


def avg_clustering(graph: DomainGraph) -> float:
    """Mean local clustering on the undirected projection of the onion
    subgraph; nodes of degree < 2 contribute 0."""
    adj = graph.onion_subgraph()
    if not adj:
        return 0.0
    und: dict[str, set[str]] = {n: set() for n in adj}
    for src, targets in adj.items():
        for dst in targets:
            und[src].add(dst)
            und[dst].add(src)
    total = 0.0
    for node, neighbors in und.items():
        d = len(neighbors)
        if d < 2:
            continue
        nb = sorted(neighbors)
        links = sum(
            1
            for i in range(len(nb))
            for j in range(i + 1, len(nb))
            if nb[j] in und[nb[i]]
        )
        total += 2.0 * links / (d * (d - 1))
    return total / len(und)


# -- bow-tie ---------------------------------------------------------------


@dataclass(slots=True)
class BowTie:
    core: set[str]
    inbound: set[str]
    outbound: set[str]
    tubes: set[str]
    tendrils: set[str]
    disconnected: set[str]

    def regions(self) -> dict[str, set[str]]:
        return {
            "core": self.core,
            "in": self.inbound,
            "out": self.outbound,
            "tubes": self.tubes,
            "tendrils": self.tendrils,
            "disconnected": self.disconnected,
        }

    def check_partition(self, nodes: Iterable[str]) -> None:
        all_nodes = set(nodes)
        union: set[str] = set()
        for name, region in self.regions().items():
            overlap = union & region
            if overlap:
                raise AssertionError(f"{name} overlaps earlier region: {overlap}")
            union |= region
        if union != all_nodes:
            raise AssertionError("bow-tie regions do not cover the node set")


def _reach(adj: dict[str, set[str]], sources: Iterable[str]) -> set[str]:
    seen = set(sources)
    frontier = list(seen)
    while frontier:
        node = frontier.pop()
        for child in adj.get(node, ()):
            if child not in seen:
                seen.add(child)
                frontier.append(child)
    return seen


def _reverse(adj: dict[str, set[str]]) -> dict[str, set[str]]:
    rev: dict[str, set[str]] = {n: set() for n in adj}
    for src, targets in adj.items():
        for dst in targets:
            rev[dst].add(src)
    return rev


def bowtie(graph: DomainGraph) -> BowTie:
    """Six-way decomposition around the largest SCC."""
    adj = graph.onion_subgraph()
    if not adj:
        return BowTie(set(), set(), set(), set(), set(), set())
    _, lscc = scc(graph)
    core = set(lscc)
    rev = _reverse(adj)

    forward = _reach(adj, core)        # core plus everything it reaches
    backward = _reach(rev, core)       # core plus everything reaching it
    outbound = forward - core
    inbound = backward - core

    rest = set(adj) - core - inbound - outbound
    from_in = _reach(adj, inbound) & rest
    to_out = _reach(rev, outbound) & rest
    tubes = from_in & to_out
    tendrils = (from_in | to_out) - tubes
    disconnected = rest - from_in - to_out

    tie = BowTie(core, inbound, outbound, tubes, tendrils, disconnected)
    tie.check_partition(adj.keys())
    return tie


# -- degree centrality -------------------------------------------------------


def top_degree(graph: DomainGraph, k: int) -> list[tuple[str, int]]:
    """Type-1 nodes ranked by total (in+out) degree in the onion subgraph,
    descending; ties broken by domain id."""
    if k < 1:
        raise ValueError("k must be >= 1")
    adj = graph.onion_subgraph()
    degree = {n: len(targets) for n, targets in adj.items()}
    for targets in adj.values():
        for dst in targets:
            degree[dst] += 1
    ranked = sorted(degree.items(), key=lambda item: (-item[1], item[0]))
    return ranked[:k]


# -- malicious regular-web links ---------------------------------------------


@dataclass(slots=True)
class ScannerVerdict:
    url: str
    scanners_flagging: int
    total_scanners: int

    def __post_init__(self):
        if self.scanners_flagging < 0 or self.total_scanners < 0:
            raise ValueError("scanner counts must be >= 0")
        if self.scanners_flagging > self.total_scanners:
            raise ValueError("flagging count exceeds scanner count")

    @property
    def flagged(self) -> bool:
        return self.scanners_flagging >= 1


_suffix_cache: Optional[frozenset[str]] = None


def _public_suffixes() -> frozenset[str]:
    global _suffix_cache
    if _suffix_cache is None:
        text = resources.files("onionscope.data").joinpath(
            "public_suffixes.dat").read_text()
        entries = set()
        for line in text.splitlines():
            line = line.split("#", 1)[0].strip().lower()
            if line:
                entries.add(line)
        _suffix_cache = frozenset(entries)
    return _suffix_cache


def root_level_domain(host: str) -> str:
    """Registrable root: longest known public suffix plus one label. Hosts
    that are themselves suffixes, or unknown single labels, return as-is."""
    labels = host.lower().rstrip(".").split(".")
    suffixes = _public_suffixes()
    for start in range(len(labels)):
        candidate = ".".join(labels[start:])
        if candidate in suffixes:
            if start == 0:
                return candidate
            return ".".join(labels[start - 1:])
    # unknown TLD: treat the final label as the suffix
    if len(labels) >= 2:
        return ".".join(labels[-2:])
    return host.lower()


@dataclass(slots=True)
class MaliciousReport:
    flagged_urls: set[str]
    by_source_category: dict[str, int]
    by_root_domain: dict[str, int]

    def to_json(self) -> dict:
        return {
            "flagged_urls": sorted(self.flagged_urls),
            "by_source_category": dict(sorted(self.by_source_category.items())),
            "by_root_domain": dict(sorted(self.by_root_domain.items())),
        }


def malicious_report(
    links: Iterable[tuple[str, str]],
    verdicts: dict[str, ScannerVerdict],
    source_categories: Optional[dict[str, str]] = None,
) -> MaliciousReport:
    """Flag regular-web URLs marked by at least one scanner.

    ``links`` are (source onion domain, regular URL) pairs; a URL with no
    verdict is unflagged. Counts are per flagged (source, url) pair for the
    category breakdown and per flagged URL for the root-domain breakdown.
    """
    source_categories = source_categories or {}
    flagged: set[str] = set()
    by_cat: dict[str, int] = {}
    seen_pairs: set[tuple[str, str]] = set()
    for src_domain, url in links:
        verdict = verdicts.get(url)
        if verdict is None or not verdict.flagged:
            continue
        flagged.add(url)
        pair = (src_domain, url)
        if pair in seen_pairs:
            continue
        seen_pairs.add(pair)
        category = source_categories.get(src_domain, "other")
        by_cat[category] = by_cat.get(category, 0) + 1

    by_root: dict[str, int] = {}
    for url in flagged:
        host = url.split("://", 1)[-1].split("/", 1)[0].split(":")[0]
        root = root_level_domain(host)
        by_root[root] = by_root.get(root, 0) + 1
    return MaliciousReport(flagged, by_cat, by_root)


# -- external formats ---------------------------------------------------------


def export_edge_list(graph: DomainGraph) -> str:
    """Tab-separated: src, dst, src_type, dst_type; one edge per line."""
    lines = []
    for src, dst in sorted(graph.edges):
        lines.append("\t".join(
            (src, dst, graph.node_types[src], graph.node_types[dst])))
    return "\n".join(lines) + ("\n" if lines else "")


def parse_verdict_feed(text: str) -> list[ScannerVerdict]:
    """Tab-separated: url, scanners_flagging, total_scanners. Blank lines
    and '#' comments ignored; malformed lines raise."""
    verdicts = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) != 3:
            raise ValueError(f"verdict line {lineno}: expected 3 fields")
        verdicts.append(ScannerVerdict(parts[0], int(parts[1]), int(parts[2])))
    return verdicts

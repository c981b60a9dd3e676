"""Graph analytics against brute-force reachability and triangle oracles."""

import itertools
import random

import pytest

from conftest import make_parsed_page
from onionscope.webgraph import (
    TYPE_ONION,
    TYPE_REGULAR,
    BowTie,
    DomainGraph,
    EdgeTypeViolation,
    ScannerVerdict,
    avg_clustering,
    bowtie,
    build,
    export_edge_list,
    malicious_report,
    parse_verdict_feed,
    root_level_domain,
    scc,
    top_degree,
)


def graph_from_edges(edges, extra_nodes=()):
    g = DomainGraph()
    for node in extra_nodes:
        g.add_node(node, TYPE_ONION)
    for src, dst in edges:
        g.add_edge(src, dst, TYPE_ONION)
    return g


def random_digraph(rng, n):
    names = [f"n{i:02d}" for i in range(n)]
    edges = set()
    density = rng.uniform(0.05, 0.35)
    for a, b in itertools.permutations(names, 2):
        if rng.random() < density:
            edges.add((a, b))
    return names, edges


# -- oracles written from the definitions, no shared code with the module --

def oracle_reachability(nodes, edges):
    """Floyd-Warshall style transitive closure."""
    reach = {a: {a} for a in nodes}
    for a, b in edges:
        reach[a].add(b)
    changed = True
    while changed:
        changed = False
        for a in nodes:
            extra = set()
            for b in reach[a]:
                extra |= reach[b]
            if not extra <= reach[a]:
                reach[a] |= extra
                changed = True
    return reach


def oracle_scc(nodes, edges):
    """SCC by mutual reachability intersection."""
    reach = oracle_reachability(nodes, edges)
    assigned = set()
    comps = []
    for a in sorted(nodes):
        if a in assigned:
            continue
        comp = sorted(b for b in reach[a] if a in reach[b])
        comps.append(comp)
        assigned.update(comp)
    return sorted(comps)


def oracle_bowtie(nodes, edges):
    reach = oracle_reachability(nodes, edges)
    comps = oracle_scc(nodes, edges)

    def internal_edges(comp):
        members = set(comp)
        return sum(1 for a, b in edges if a in members and b in members)

    core = set(min(comps, key=lambda c: (-len(c), -internal_edges(c), c[0])))
    inbound = {n for n in nodes
               if n not in core and reach[n] & core}
    outbound = {n for n in nodes
                if n not in core and any(n in reach[c] for c in core)}
    rest = set(nodes) - core - inbound - outbound
    from_in = {n for n in rest if any(n in reach[i] for i in inbound)}
    to_out = {n for n in rest if reach[n] & outbound}
    tubes = from_in & to_out
    tendrils = (from_in | to_out) - tubes
    disconnected = rest - from_in - to_out
    return {
        "core": core, "in": inbound, "out": outbound,
        "tubes": tubes, "tendrils": tendrils, "disconnected": disconnected,
    }


def oracle_clustering(nodes, edges):
    und = {n: set() for n in nodes}
    for a, b in edges:
        und[a].add(b)
        und[b].add(a)
    total = 0.0
    for n in nodes:
        nb = sorted(und[n])
        d = len(nb)
        if d < 2:
            continue
        t = sum(1 for x, y in itertools.combinations(nb, 2) if y in und[x])
        total += 2 * t / (d * (d - 1))
    return total / len(nodes) if nodes else 0.0


class TestBuild:
    def test_no_documents_empty(self):
        g = build([])
        assert not g.node_types and not g.edges

    def test_duplicate_links_single_edge(self):
        page = make_parsed_page(
            '<a href="http://bbbbbbbbbbbbbbbb.onion/x">1</a>'
            '<a href="http://bbbbbbbbbbbbbbbb.onion/y">2</a>',
            url="http://aaaaaaaaaaaaaaaa.onion/")
        g = build([page.document])
        assert g.edges == {("aaaaaaaaaaaaaaaa.onion", "bbbbbbbbbbbbbbbb.onion")}

    def test_regular_target_typed(self):
        page = make_parsed_page(
            '<a href="https://example.com/p">out</a>',
            url="http://aaaaaaaaaaaaaaaa.onion/")
        g = build([page.document])
        assert g.node_types["example.com"] == TYPE_REGULAR
        assert g.node_types["aaaaaaaaaaaaaaaa.onion"] == TYPE_ONION

    def test_self_links_dropped(self):
        page = make_parsed_page(
            '<a href="/about">me</a>',
            url="http://aaaaaaaaaaaaaaaa.onion/")
        g = build([page.document])
        assert not g.edges

    def test_source_always_onion_invariant(self):
        g = DomainGraph()
        g.add_node("example.com", TYPE_REGULAR)
        g.edges.add(("example.com", "x.onion"))
        g.add_node("x.onion", TYPE_ONION)
        with pytest.raises(EdgeTypeViolation):
            g.check_invariants()


class TestScc:
    def test_three_cycle(self):
        g = graph_from_edges([("a", "b"), ("b", "c"), ("c", "a")])
        comps, lscc = scc(g)
        assert comps == [["a", "b", "c"]]
        assert lscc == ["a", "b", "c"]

    def test_chain_singletons(self):
        g = graph_from_edges([("a", "b"), ("b", "c")])
        comps, _ = scc(g)
        assert comps == [["a"], ["b"], ["c"]]

    def test_lscc_tie_breaks_to_smallest_id(self):
        g = graph_from_edges([
            ("a", "b"), ("b", "a"),        # 2-cycle, 2 edges
            ("x", "y"), ("y", "x"),        # 2-cycle, 2 edges
        ])
        _, lscc = scc(g)
        assert lscc == ["a", "b"]

    def test_matches_oracle_random(self):
        rng = random.Random(1001)
        for _ in range(150):
            nodes, edges = random_digraph(rng, rng.randrange(2, 13))
            g = graph_from_edges(edges, extra_nodes=nodes)
            comps, _ = scc(g)
            assert comps == oracle_scc(nodes, edges)


class TestClustering:
    def test_triangle(self):
        g = graph_from_edges([("a", "b"), ("b", "c"), ("c", "a")])
        assert avg_clustering(g) == pytest.approx(1.0)

    def test_star(self):
        g = graph_from_edges([("hub", f"s{i}") for i in range(4)])
        assert avg_clustering(g) == pytest.approx(0.0)

    def test_matches_oracle_random(self):
        rng = random.Random(77)
        for _ in range(100):
            nodes, edges = random_digraph(rng, rng.randrange(2, 11))
            g = graph_from_edges(edges, extra_nodes=nodes)
            assert avg_clustering(g) == pytest.approx(
                oracle_clustering(nodes, edges))

    def test_empty_graph(self):
        assert avg_clustering(DomainGraph()) == 0.0


class TestBowtie:
    def test_single_cycle_all_core(self):
        g = graph_from_edges([("a", "b"), ("b", "c"), ("c", "a")])
        tie = bowtie(g)
        assert tie.core == {"a", "b", "c"}
        assert not (tie.inbound or tie.outbound or tie.tubes
                    or tie.tendrils or tie.disconnected)

    def test_walkthrough_example(self):
        g = graph_from_edges([
            ("a", "b"), ("b", "c"), ("c", "b"), ("b", "d"),
        ])
        tie = bowtie(g)
        assert tie.core == {"b", "c"}
        assert tie.inbound == {"a"}
        assert tie.outbound == {"d"}

    def test_tube_between_in_and_out(self):
        g = graph_from_edges([
            ("core1", "core2"), ("core2", "core1"),
            ("in1", "core1"),
            ("core2", "out1"),
            ("in1", "tube1"), ("tube1", "out1"),
        ])
        tie = bowtie(g)
        assert tie.tubes == {"tube1"}

    def test_tendril_from_in(self):
        g = graph_from_edges([
            ("c1", "c2"), ("c2", "c1"),
            ("in1", "c1"), ("in1", "tend1"),
        ])
        tie = bowtie(g)
        assert tie.tendrils == {"tend1"}

    def test_matches_oracle_random(self):
        rng = random.Random(4040)
        for _ in range(150):
            nodes, edges = random_digraph(rng, rng.randrange(2, 13))
            g = graph_from_edges(edges, extra_nodes=nodes)
            tie = bowtie(g)
            expected = oracle_bowtie(nodes, edges)
            got = {name: set(region) for name, region in tie.regions().items()}
            assert got == expected

    def test_partition_invariant_random(self):
        rng = random.Random(5050)
        for _ in range(60):
            nodes, edges = random_digraph(rng, rng.randrange(2, 13))
            g = graph_from_edges(edges, extra_nodes=nodes)
            tie = bowtie(g)
            tie.check_partition(nodes)  # raises on violation


class TestTopDegree:
    def test_single_node(self):
        g = DomainGraph()
        g.add_node("solo.onion", TYPE_ONION)
        assert top_degree(g, 5) == [("solo.onion", 0)]

    def test_hub_first(self):
        g = graph_from_edges([("hub", f"s{i}") for i in range(5)])
        ranked = top_degree(g, 3)
        assert ranked[0] == ("hub", 5)
        assert all(deg == 1 for _, deg in ranked[1:])

    def test_tie_broken_by_id(self):
        g = graph_from_edges([("a", "b"), ("c", "d")])
        ranked = top_degree(g, 4)
        assert [n for n, _ in ranked] == ["a", "b", "c", "d"]

    def test_regular_nodes_excluded(self):
        g = DomainGraph()
        g.add_edge("a.onion", "example.com", TYPE_REGULAR)
        ranked = top_degree(g, 10)
        assert ranked == [("a.onion", 0)]

    def test_k_validated(self):
        with pytest.raises(ValueError):
            top_degree(DomainGraph(), 0)


class TestRootDomain:
    def test_two_level_suffix(self):
        assert root_level_domain("deep.sub.example.co.uk") == "example.co.uk"

    def test_plain_com(self):
        assert root_level_domain("www.example.com") == "example.com"

    def test_hosting_platform_suffix(self):
        assert root_level_domain("project.user.github.io") == "user.github.io"

    def test_unknown_tld_falls_back(self):
        assert root_level_domain("a.b.unknowntld") == "b.unknowntld"

    def test_bare_suffix_returned_as_is(self):
        assert root_level_domain("com") == "com"


class TestMaliciousReport:
    def test_zero_scanners_unflagged(self):
        verdicts = {"http://a.com/x": ScannerVerdict("http://a.com/x", 0, 70)}
        report = malicious_report([("d1.onion", "http://a.com/x")], verdicts)
        assert report.flagged_urls == set()

    def test_one_scanner_flags(self):
        verdicts = {"http://a.com/x": ScannerVerdict("http://a.com/x", 1, 70)}
        report = malicious_report([("d1.onion", "http://a.com/x")], verdicts)
        assert report.flagged_urls == {"http://a.com/x"}

    def test_missing_verdict_unflagged(self):
        report = malicious_report([("d1.onion", "http://a.com/x")], {})
        assert report.flagged_urls == set()

    def test_breakdown_hand_count(self):
        urls = [
            ("m1.onion", "http://bad1.com/a"),
            ("m1.onion", "http://bad2.net/b"),
            ("m2.onion", "http://bad2.net/b"),
            ("m2.onion", "http://clean.org/c"),
        ]
        verdicts = {
            "http://bad1.com/a": ScannerVerdict("http://bad1.com/a", 3, 70),
            "http://bad2.net/b": ScannerVerdict("http://bad2.net/b", 1, 70),
            "http://clean.org/c": ScannerVerdict("http://clean.org/c", 0, 70),
        }
        cats = {"m1.onion": "marketplace", "m2.onion": "pornography"}
        report = malicious_report(urls, verdicts, cats)
        assert report.flagged_urls == {"http://bad1.com/a", "http://bad2.net/b"}
        assert report.by_source_category == {"marketplace": 2, "pornography": 1}
        assert report.by_root_domain == {"bad1.com": 1, "bad2.net": 1}

    def test_verdict_validation(self):
        with pytest.raises(ValueError):
            ScannerVerdict("u", 5, 3)
        with pytest.raises(ValueError):
            ScannerVerdict("u", -1, 3)


class TestFormats:
    def test_edge_list_roundtrip_layout(self):
        g = DomainGraph()
        g.add_edge("a.onion", "b.onion", TYPE_ONION)
        g.add_edge("a.onion", "example.com", TYPE_REGULAR)
        text = export_edge_list(g)
        lines = text.strip().split("\n")
        assert lines == [
            "a.onion\tb.onion\ttype-1\ttype-1",
            "a.onion\texample.com\ttype-1\ttype-2",
        ]

    def test_verdict_feed_parses(self):
        text = "# header\nhttp://a.com/x\t2\t70\n\nhttp://b.com/y\t0\t70\n"
        verdicts = parse_verdict_feed(text)
        assert len(verdicts) == 2
        assert verdicts[0].flagged and not verdicts[1].flagged

    def test_verdict_feed_malformed_rejected(self):
        with pytest.raises(ValueError):
            parse_verdict_feed("http://a.com/x\t2\n")

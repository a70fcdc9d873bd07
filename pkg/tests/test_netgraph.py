"""Network construction, centralities against brute-force oracles, filters."""

from __future__ import annotations

from collections import deque
from fractions import Fraction

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from coinsignal.corpus import CoinEntry, CoinRegistry, Tweet
from coinsignal.netgraph import (
    AuthorProfile,
    CentralityScores,
    InfluencerCriteria,
    WeightedGraph,
    adjacency_matrix,
    build_comention_network,
    build_retweet_network,
    centrality,
    degree_share_core,
    degree_share_filter,
    derive_profiles,
    edge_weight_share_filter,
    filter_influencers,
    matrix_pearson,
    merge_profile_overrides,
    read_edge_csv,
    tag_similarity_matrix,
    top_k_union,
    write_edge_csv,
)

T0 = 1704067200


def undirected(*edges, extra=()):
    return WeightedGraph.from_edges(False, list(edges), extra_nodes=extra)


def directed(*edges, extra=()):
    return WeightedGraph.from_edges(True, list(edges), extra_nodes=extra)


def random_graph(seed, max_nodes=64, directed_flag=None):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, max_nodes + 1))
    names = [f"n{i:02d}" for i in range(n)]
    if directed_flag is None:
        directed_flag = bool(rng.integers(0, 2))
    edges = []
    for i in range(n):
        for j in range(n):
            if i == j or (not directed_flag and i > j):
                continue
            if rng.random() < 0.12:
                edges.append((names[i], names[j], int(rng.integers(1, 6))))
    return WeightedGraph.from_edges(directed_flag, edges, extra_nodes=names)


class TestWeightedGraph:
    def test_canonical_order_enforced(self):
        with pytest.raises(ValueError, match="canonical"):
            WeightedGraph(directed=False, nodes=("a", "b"), edges={("b", "a"): 1})

    def test_self_loop_rejected(self):
        with pytest.raises(ValueError, match="self-loop"):
            WeightedGraph(directed=True, nodes=("a",), edges={("a", "a"): 1})

    def test_nonpositive_weight_rejected(self):
        with pytest.raises(ValueError, match="non-positive"):
            WeightedGraph(directed=False, nodes=("a", "b"), edges={("a", "b"): 0})

    def test_from_edges_accumulates_and_canonicalizes(self):
        g = undirected(("b", "a", 1), ("a", "b", 2))
        assert g.edges == {("a", "b"): 3}
        assert g.weight("b", "a") == 3

    def test_csv_round_trip(self, tmp_path):
        g = undirected(("a", "b", 3), ("a", "c", 1), ("b", "c", 2))
        path = tmp_path / "edges.csv"
        write_edge_csv(g, str(path))
        lines = path.read_text().strip().splitlines()
        assert lines[0] == "u,v,weight"
        assert lines[1] == "a,b,3"
        back = read_edge_csv(str(path), directed=False)
        assert back.edges == g.edges
        assert back.nodes == g.nodes

    def test_induced_subgraph(self):
        g = undirected(("a", "b", 1), ("b", "c", 2), ("a", "c", 3))
        sub = g.induced({"a", "c"})
        assert sub.nodes == ("a", "c")
        assert sub.edges == {("a", "c"): 3}


class TestBuildNetworks:
    def test_triple_mention_gives_triangle(self):
        g = build_comention_network([frozenset({"BTC", "ETH", "SOL"})])
        assert g.edges == {("BTC", "ETH"): 1, ("BTC", "SOL"): 1, ("ETH", "SOL"): 1}

    def test_repeat_pair_accumulates(self):
        g = build_comention_network([frozenset({"BTC", "ETH"})] * 2)
        assert g.edges == {("BTC", "ETH"): 2}

    def test_singletons_add_nodes_only(self):
        g = build_comention_network([frozenset({"BTC"}), frozenset()])
        assert g.nodes == ("BTC",)
        assert g.edges == {}

    def test_total_weight_identity_on_fixture(self):
        # sum of weights must equal sum over records of C(m, 2)
        rng = np.random.default_rng(55)
        coins = [f"C{i}" for i in range(8)]
        sets = []
        expected = 0
        for _ in range(500):
            m = int(rng.integers(0, 5))
            sets.append(frozenset(rng.choice(coins, size=m, replace=False)))
            expected += m * (m - 1) // 2
        g = build_comention_network(sets)
        assert g.total_edge_weight() == expected
        assert all(isinstance(w, int) for w in g.edges.values())

    def test_retweet_edges(self):
        tweets = [
            Tweet("t1", "A", "influencer", T0, "x", retweeted_author_id="B"),
            Tweet("t2", "A", "influencer", T0 + 1, "y", retweeted_author_id="B"),
            Tweet("t3", "B", "influencer", T0 + 2, "z"),
        ]
        g = build_retweet_network(tweets)
        assert g.directed
        assert g.edges == {("A", "B"): 2}

    def test_no_retweets_no_edges(self):
        tweets = [Tweet("t1", "A", "news", T0, "x")]
        g = build_retweet_network(tweets)
        assert g.nodes == ("A",) and g.edges == {}

    def test_self_retweet_dropped(self):
        tweets = [Tweet("t1", "A", "influencer", T0, "x", retweeted_author_id="A")]
        assert build_retweet_network(tweets).edges == {}

    def test_in_weight_tally_on_fixture(self):
        rng = np.random.default_rng(56)
        authors = [f"a{i}" for i in range(12)]
        tweets = []
        tally = {}
        for i in range(100):
            src, dst = rng.choice(authors, size=2, replace=False)
            tweets.append(
                Tweet(f"t{i}", str(src), "influencer", T0 + i, "x",
                      retweeted_author_id=str(dst))
            )
            tally[str(dst)] = tally.get(str(dst), 0) + 1
        g = build_retweet_network(tweets)
        for author in authors:
            in_weight = sum(w for (u, v), w in g.edges.items() if v == author)
            assert in_weight == tally.get(author, 0)


def dense_pagerank(graph, damping=0.85):
    nodes = graph.nodes
    n = len(nodes)
    index = {node: i for i, node in enumerate(nodes)}
    m = np.zeros((n, n))
    for (u, v), w in graph.edges.items():
        m[index[u], index[v]] += w
        if not graph.directed:
            m[index[v], index[u]] += w
    out = m.sum(axis=1)
    p = np.empty((n, n))
    for i in range(n):
        p[i] = 1.0 / n if out[i] == 0 else m[i] / out[i]
    score = np.full(n, 1.0 / n)
    for _ in range(200000):
        new = (1 - damping) / n + damping * (p.T @ score)
        if np.abs(new - score).sum() < 1e-14:
            score = new
            break
        score = new
    return {node: float(score[index[node]]) for node in nodes}


def enumerated_betweenness(graph):
    """Exhaustive shortest-path listing with multiplicity products."""
    adjacency = graph.adjacency()
    totals = {v: Fraction(0) for v in graph.nodes}
    for s in graph.nodes:
        dist = {s: 0}
        queue = deque([s])
        while queue:
            v = queue.popleft()
            for w_node, _ in adjacency[v]:
                if w_node not in dist:
                    dist[w_node] = dist[v] + 1
                    queue.append(w_node)
        for t in graph.nodes:
            if t == s or t not in dist:
                continue
            paths = []

            def extend(path, mult):
                v = path[-1]
                if v == t:
                    paths.append((tuple(path), mult))
                    return
                for w_node, weight in adjacency[v]:
                    if dist.get(w_node) == len(path) and len(path) <= dist[t]:
                        extend(path + [w_node], mult * Fraction(weight))

            extend([s], Fraction(1))
            sigma = sum(m for _, m in paths)
            for path, m in paths:
                for interior in path[1:-1]:
                    totals[interior] += m / sigma
    if not graph.directed:
        totals = {v: x / 2 for v, x in totals.items()}
    return {v: float(x) for v, x in totals.items()}


def floyd_warshall_closeness(graph):
    nodes = graph.nodes
    n = len(nodes)
    index = {node: i for i, node in enumerate(nodes)}
    big = 10**9
    d = [[0 if i == j else big for j in range(n)] for i in range(n)]
    for (u, v), _ in graph.edges.items():
        d[index[u]][index[v]] = 1
        if not graph.directed:
            d[index[v]][index[u]] = 1
    for k in range(n):
        for i in range(n):
            for j in range(n):
                if d[i][k] + d[k][j] < d[i][j]:
                    d[i][j] = d[i][k] + d[k][j]
    out = {}
    for node in nodes:
        i = index[node]
        reach = [d[i][j] for j in range(n) if j != i and d[i][j] < big]
        out[node] = float(Fraction(len(reach), sum(reach))) if reach else 0.0
    return out


class TestPageRank:
    def test_two_node_symmetry(self):
        g = undirected(("a", "b", 1))
        scores = centrality(g, "pagerank").scores
        assert scores["a"] == pytest.approx(0.5, abs=1e-12)
        assert scores["b"] == pytest.approx(0.5, abs=1e-12)

    def test_matches_dense_oracle_on_seeded_graphs(self):
        for seed in range(20):
            g = random_graph(seed)
            got = centrality(g, "pagerank").scores
            want = dense_pagerank(g)
            for node in g.nodes:
                assert got[node] == pytest.approx(want[node], abs=1e-8), (seed, node)

    def test_sums_to_one(self):
        for seed in range(10):
            g = random_graph(100 + seed)
            assert sum(centrality(g, "pagerank").scores.values()) == pytest.approx(
                1.0, abs=1e-9
            )

    def test_weight_scale_invariance(self):
        g = random_graph(7, max_nodes=20, directed_flag=True)
        scaled = WeightedGraph(
            directed=True,
            nodes=g.nodes,
            edges={pair: w * 37 for pair, w in g.edges.items()},
        )
        a = centrality(g, "pagerank").scores
        b = centrality(scaled, "pagerank").scores
        for node in g.nodes:
            assert a[node] == pytest.approx(b[node], abs=1e-9)

    def test_dangling_mass_spread(self):
        # b has no outgoing edges; scores still sum to 1
        g = directed(("a", "b", 2))
        scores = centrality(g, "pagerank").scores
        assert sum(scores.values()) == pytest.approx(1.0, abs=1e-12)
        assert scores["b"] > scores["a"]


class TestBetweenness:
    def test_path_middle_is_unique_maximum(self):
        g = undirected(("a", "b", 1), ("b", "c", 1))
        scores = centrality(g, "betweenness").scores
        assert scores["b"] > scores["a"] == scores["c"] == 0.0
        assert scores["b"] == 1.0  # one (a, c) pair, halved for both directions

    def test_matches_enumeration_exactly(self):
        for seed in range(25):
            g = random_graph(seed, max_nodes=8)
            got = centrality(g, "betweenness").scores
            want = enumerated_betweenness(g)
            assert got == want, seed  # bit-for-bit, both sides exact

    def test_workers_equal_serial(self):
        g = random_graph(3, max_nodes=30)
        serial = centrality(g, "betweenness", workers=1).scores
        threaded = centrality(g, "betweenness", workers=4).scores
        assert serial == threaded

    def test_parallel_edge_multiplicity_counts(self):
        # two routes a-b-d (weight product 4) and a-c-d (product 1):
        # b takes 4/5 of the pair dependency, c takes 1/5
        g = undirected(("a", "b", 2), ("b", "d", 2), ("a", "c", 1), ("c", "d", 1))
        scores = centrality(g, "betweenness").scores
        assert scores["b"] == pytest.approx(4 / 5)
        assert scores["c"] == pytest.approx(1 / 5)


class TestCloseness:
    def test_path_values(self):
        g = undirected(("a", "b", 1), ("b", "c", 1))
        scores = centrality(g, "closeness").scores
        assert scores["b"] == pytest.approx(1.0)
        assert scores["a"] == pytest.approx(2 / 3)

    def test_isolated_node_zero(self):
        g = undirected(("a", "b", 1), extra=["z"])
        assert centrality(g, "closeness").scores["z"] == 0.0

    def test_matches_floyd_warshall(self):
        for seed in range(15):
            g = random_graph(seed, max_nodes=24)
            got = centrality(g, "closeness").scores
            want = floyd_warshall_closeness(g)
            for node in g.nodes:
                assert got[node] == pytest.approx(want[node], abs=1e-12), seed


class TestInverseWeightMode:
    def test_heavy_detour_wins(self):
        # direct a-c length 1; detour a-b-c length 1/10 + 1/10 = 1/5
        g = undirected(("a", "c", 1), ("a", "b", 10), ("b", "c", 10))
        hop = centrality(g, "betweenness", distance_mode="hop").scores
        inv = centrality(g, "betweenness", distance_mode="inverse_weight").scores
        assert hop["b"] == 0.0
        assert inv["b"] == 1.0

    def test_closeness_uses_inverse_lengths(self):
        g = undirected(("a", "b", 4))
        scores = centrality(g, "closeness", distance_mode="inverse_weight").scores
        assert scores["a"] == pytest.approx(4.0)

    def test_unknown_mode_rejected(self):
        g = undirected(("a", "b", 1))
        with pytest.raises(ValueError, match="distance mode"):
            centrality(g, "betweenness", distance_mode="euclidean")

    def test_unknown_metric_rejected(self):
        g = undirected(("a", "b", 1))
        with pytest.raises(ValueError, match="metric"):
            centrality(g, "eigenvector")


class TestTopKUnion:
    def scores_of(self, metric, mapping):
        return CentralityScores(metric=metric, scores=mapping)

    def test_identical_rankings(self):
        s = {"a": 3.0, "b": 2.0, "c": 1.0}
        sets = [
            self.scores_of("betweenness", s),
            self.scores_of("closeness", dict(s)),
            self.scores_of("betweenness", dict(s)),
        ]
        assert top_k_union(sets, 2) == {"a", "b"}

    def test_disjoint_rankings(self):
        sets = [
            self.scores_of("betweenness", {"a": 2, "b": 1, "x": 0, "y": 0, "p": 0, "q": 0}),
            self.scores_of("closeness", {"x": 2, "y": 1, "a": 0, "b": 0, "p": 0, "q": 0}),
            self.scores_of("betweenness", {"p": 2, "q": 1, "a": 0, "b": 0, "x": 0, "y": 0}),
        ]
        assert top_k_union(sets, 2) == {"a", "b", "x", "y", "p", "q"}

    def test_boundary_tie_takes_exactly_k_by_id(self):
        scores = self.scores_of("closeness", {"d": 1.0, "b": 0.5, "c": 0.5, "a": 0.5})
        assert top_k_union([scores], 2) == {"d", "a"}

    def test_k_beyond_node_count_takes_all(self):
        scores = self.scores_of("closeness", {"a": 1.0, "b": 0.5})
        assert top_k_union([scores], 10) == {"a", "b"}

    @given(st.integers(1, 12), st.integers(0, 10**6))
    @settings(max_examples=50, deadline=None)
    def test_size_bounds(self, k, seed):
        rng = np.random.default_rng(seed)
        nodes = [f"n{i}" for i in range(int(rng.integers(1, 20)))]
        sets = [
            self.scores_of(
                "closeness", {n: float(rng.random()) for n in nodes}
            )
            for _ in range(3)
        ]
        union = top_k_union(sets, k)
        k_eff = min(k, len(nodes))
        assert k_eff <= len(union) <= 3 * k_eff


class TestInfluencerFilter:
    def good_profile(self, author="u"):
        return AuthorProfile(
            author_id=author,
            followers=10_000,
            last_tweet_at=T0 - 86400,
            recent_engagements=(250.0,) * 10,
            bio="crypto analyst",
        )

    def test_low_followers_rejected_first(self):
        profile = AuthorProfile(
            author_id="u", followers=4999, last_tweet_at=T0,
            recent_engagements=(500.0,), bio="x",
        )
        accepted, rejections = filter_influencers(
            ["u"], {"u": profile}, InfluencerCriteria(), as_of=T0
        )
        assert accepted == set()
        assert rejections == {"u": "followers"}

    def test_boundary_engagement_accepted(self):
        profile = AuthorProfile(
            author_id="u", followers=10_000, last_tweet_at=T0,
            recent_engagements=(200.0,) * 10, bio="x",
        )
        accepted, rejections = filter_influencers(
            ["u"], {"u": profile}, InfluencerCriteria(), as_of=T0
        )
        assert accepted == {"u"}
        assert rejections == {}

    def test_inactivity_rejected(self):
        profile = AuthorProfile(
            author_id="u", followers=10_000,
            last_tweet_at=T0 - 120 * 86400,
            recent_engagements=(500.0,), bio="x",
        )
        _, rejections = filter_influencers(
            ["u"], {"u": profile}, InfluencerCriteria(), as_of=T0
        )
        assert rejections == {"u": "inactivity"}

    def test_engagement_rejected_after_activity(self):
        profile = AuthorProfile(
            author_id="u", followers=10_000, last_tweet_at=T0,
            recent_engagements=(10.0, 20.0), bio="x",
        )
        _, rejections = filter_influencers(
            ["u"], {"u": profile}, InfluencerCriteria(), as_of=T0
        )
        assert rejections == {"u": "engagement"}

    def test_description_filter_applies_last(self):
        criteria = InfluencerCriteria(description_filter=lambda bio: "crypto" in bio)
        profile = self.good_profile()
        accepted, _ = filter_influencers(["u"], {"u": profile}, criteria, as_of=T0)
        assert accepted == {"u"}
        bad = AuthorProfile(
            author_id="u", followers=10_000, last_tweet_at=T0 - 1,
            recent_engagements=(300.0,), bio="cooking videos",
        )
        _, rejections = filter_influencers(["u"], {"u": bad}, criteria, as_of=T0)
        assert rejections == {"u": "description"}

    def test_missing_data_reasons(self):
        profiles = {
            "no_followers": AuthorProfile(
                author_id="no_followers", last_tweet_at=T0,
                recent_engagements=(300.0,),
            ),
            "no_engagement": AuthorProfile(
                author_id="no_engagement", followers=10_000, last_tweet_at=T0,
            ),
        }
        _, rejections = filter_influencers(
            ["no_followers", "no_engagement", "unknown"],
            profiles,
            InfluencerCriteria(),
            as_of=T0,
        )
        assert rejections == {
            "no_followers": "missing data",
            "no_engagement": "missing data",
            "unknown": "missing data",
        }

    def test_derive_profiles_from_corpus(self):
        tweets = [
            Tweet("t1", "u", "influencer", T0, "a", followers=100, engagement=10.0),
            Tweet("t2", "u", "influencer", T0 + 10, "b", engagement=20.0),
            Tweet("t3", "u", "influencer", T0 + 20, "c", followers=6000),
            Tweet("t4", "v", "news", T0, "d"),
        ]
        profiles = derive_profiles(tweets)
        u = profiles["u"]
        assert u.followers == 6000  # newest record carrying a count
        assert u.last_tweet_at == T0 + 20
        assert u.recent_engagements == (10.0, 20.0)
        assert profiles["v"].followers is None

    def test_derive_profiles_keeps_last_ten(self):
        tweets = [
            Tweet(f"t{i}", "u", "influencer", T0 + i, "x", engagement=float(i))
            for i in range(15)
        ]
        profiles = derive_profiles(tweets)
        assert profiles["u"].recent_engagements == tuple(float(i) for i in range(5, 15))

    def test_merge_overrides(self):
        base = derive_profiles(
            [Tweet("t1", "u", "influencer", T0, "x", engagement=5.0)]
        )
        merged = merge_profile_overrides(
            base, {"u": {"followers": 9000, "bio": "trader"}, "w": {"bio": "bot"}}
        )
        assert merged["u"].followers == 9000
        assert merged["u"].bio == "trader"
        assert merged["u"].recent_engagements == (5.0,)
        assert merged["w"].last_tweet_at is None


class TestStructureFilters:
    def star(self):
        return undirected(*[("hub", f"leaf{i}", 1) for i in range(9)])

    def test_star_keeps_center_only(self):
        kept = degree_share_filter(self.star(), 0.1)
        assert kept.nodes == ("hub",)
        assert kept.edges == {}

    def test_tiny_theta_keeps_everything(self):
        g = random_graph(9, max_nodes=20)
        if g.edges:
            kept = degree_share_filter(g, 1e-9)
            assert set(kept.nodes) >= {u for (u, v) in kept.edges for u in (u, v)}
            assert kept.edges == g.edges

    @given(st.integers(0, 10**6))
    @settings(max_examples=30, deadline=None)
    def test_theta_monotonicity(self, seed):
        g = random_graph(seed, max_nodes=16)
        small = degree_share_filter(g, 0.02)
        large = degree_share_filter(g, 0.2)
        assert set(large.nodes) <= set(small.nodes)

    def test_core_variant_iterates_to_fixpoint(self):
        # removing the tail node drags its neighbor below the bar next round
        g = undirected(
            ("a", "b", 10), ("a", "c", 10), ("b", "c", 10), ("c", "d", 3), ("d", "e", 1)
        )
        single = degree_share_filter(g, 0.08)
        core = degree_share_core(g, 0.08)
        assert "e" not in single.nodes
        assert set(core.nodes) <= set(single.nodes)
        total = sum(core.weighted_degree(n) for n in core.nodes)
        assert all(core.weighted_degree(n) >= 0.08 * total for n in core.nodes)

    def test_edge_share_example(self):
        g = undirected(("a", "b", 10), ("a", "c", 5), ("b", "c", 1))
        kept = edge_weight_share_filter(g, 0.1)
        assert kept == [("a", "b", 10), ("a", "c", 5)]

    def test_single_edge_always_kept(self):
        g = undirected(("a", "b", 7))
        assert edge_weight_share_filter(g, 0.99) == [("a", "b", 7)]

    def test_sort_is_weight_then_pair(self):
        g = undirected(("x", "y", 5), ("a", "b", 5), ("a", "c", 9))
        kept = edge_weight_share_filter(g, 0.01)
        assert kept == [("a", "c", 9), ("a", "b", 5), ("x", "y", 5)]


class TestTagSimilarity:
    def registry(self):
        return CoinRegistry(
            coins=(
                CoinEntry("AAA", ("aaa",), ("x", "y")),
                CoinEntry("BBB", ("bbb",), ("x", "z")),
                CoinEntry("CCC", ("ccc",), ("p", "q")),
                CoinEntry("DDD", ("ddd",), ("x", "y")),
                CoinEntry("EEE", ("eee",), ()),
            )
        )

    def test_identical_tags(self):
        m = tag_similarity_matrix(self.registry(), ["AAA", "DDD"])
        assert m.values[0, 1] == pytest.approx(1.0)

    def test_disjoint_tags(self):
        m = tag_similarity_matrix(self.registry(), ["AAA", "CCC"])
        assert m.values[0, 1] == 0.0

    def test_half_overlap(self):
        m = tag_similarity_matrix(self.registry(), ["AAA", "BBB"])
        assert m.values[0, 1] == pytest.approx(0.5)

    def test_untagged_coin_rows_zero(self):
        m = tag_similarity_matrix(self.registry(), ["AAA", "EEE"])
        assert m.values[1, 0] == 0.0
        assert m.values[1, 1] == 0.0  # no tags, no unit diagonal
        assert m.values[0, 0] == 1.0

    def test_symmetry(self):
        m = tag_similarity_matrix(self.registry(), ["AAA", "BBB", "CCC", "DDD"])
        assert np.array_equal(m.values, m.values.T)


def t_two_sided_quadrature(t, df):
    with mpmath.workdps(40):
        nu = mpmath.mpf(df)
        coeff = mpmath.gamma((nu + 1) / 2) / (
            mpmath.sqrt(nu * mpmath.pi) * mpmath.gamma(nu / 2)
        )
        density = lambda x: coeff * (1 + x * x / nu) ** (-(nu + 1) / 2)
        return float(2 * mpmath.quad(density, [abs(t), mpmath.inf]))


class TestMatrixPearson:
    def symmetric(self, seed, n=6):
        rng = np.random.default_rng(seed)
        m = rng.normal(size=(n, n))
        return (m + m.T) / 2

    def test_affine_gives_unit_correlation(self):
        m1 = self.symmetric(0)
        r, p = matrix_pearson(m1, 2.0 * m1 + 3.0)
        assert r == pytest.approx(1.0, abs=1e-12)
        assert p == 0.0

    def test_negation_gives_minus_one(self):
        m1 = self.symmetric(1)
        r, _ = matrix_pearson(m1, -m1)
        assert r == pytest.approx(-1.0, abs=1e-12)

    def test_matches_quadrature_oracle(self):
        m1 = self.symmetric(2)
        m2 = self.symmetric(3)
        r, p = matrix_pearson(m1, m2)
        x = m1[np.triu_indices(6, 1)]
        y = m2[np.triu_indices(6, 1)]
        want_r = float(np.corrcoef(x, y)[0, 1])
        assert r == pytest.approx(want_r, abs=1e-10)
        t = r * np.sqrt((len(x) - 2) / (1 - r * r))
        assert p == pytest.approx(t_two_sided_quadrature(t, len(x) - 2), abs=1e-10)

    def test_symmetric_in_arguments(self):
        m1 = self.symmetric(4)
        m2 = self.symmetric(5)
        r_ab, p_ab = matrix_pearson(m1, m2)
        r_ba, p_ba = matrix_pearson(m2, m1)
        assert r_ab == pytest.approx(r_ba, abs=1e-15)
        assert p_ab == pytest.approx(p_ba, abs=1e-15)

    def test_affine_invariance_tight(self):
        m1 = self.symmetric(6)
        m2 = self.symmetric(7)
        r_base, _ = matrix_pearson(m1, m2)
        r_moved, _ = matrix_pearson(0.25 * m1 + 11.0, m2)
        assert abs(r_base - r_moved) < 1e-12

    def test_constant_matrix_degenerate(self):
        m1 = self.symmetric(8)
        with pytest.raises(ValueError, match="degenerate matrix"):
            matrix_pearson(m1, np.ones((6, 6)))

    def test_small_dimension_rejected(self):
        m = np.eye(2)
        with pytest.raises(ValueError, match=">= 3"):
            matrix_pearson(m, m)

    def test_asymmetric_rejected(self):
        m = self.symmetric(9)
        bad = m.copy()
        bad[0, 1] += 1.0
        with pytest.raises(ValueError, match="symmetric"):
            matrix_pearson(m, bad)

    def test_adjacency_matrix_alignment(self):
        g = undirected(("a", "b", 3), ("b", "c", 1))
        m = adjacency_matrix(g, ["a", "b", "c"])
        assert m[0, 1] == 3 and m[1, 0] == 3
        assert m[1, 2] == 1 and m[0, 2] == 0
        assert np.array_equal(m, m.T)

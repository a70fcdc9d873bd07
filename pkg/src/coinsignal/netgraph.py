"""Co-mention and retweet networks, centralities, and structure filters.

Graphs are small immutable structures with canonical edge keys. The
centrality block treats an integer edge weight as that many parallel
unit-length links: shortest paths are counted by hops, and a path's
multiplicity is the product of the weights along it. Betweenness runs
the Brandes accumulation in exact arithmetic (integer path counts,
rational dependencies) so results are independent of summation order;
floats appear only in the reported scores. An alternative mode treats
1/weight as a continuous edge length for callers who want heavy edges
to read as short ones.
"""

from __future__ import annotations

import csv
import heapq
from collections import deque
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Callable, Iterable

import numpy as np

CENTRALITY_METRICS = ("pagerank", "betweenness", "closeness")
DISTANCE_MODES = ("hop", "inverse_weight")

_PAGERANK_DAMPING = 0.85
_PAGERANK_TOL = 1e-10
_PAGERANK_MAX_ITER = 10_000


@dataclass(frozen=True)
class WeightedGraph:
    """Positive-weight graph; undirected edges stored once with u < v."""

    directed: bool
    nodes: tuple[str, ...]
    edges: dict

    def __post_init__(self):
        object.__setattr__(self, "nodes", tuple(sorted(set(self.nodes))))
        node_set = set(self.nodes)
        for (u, v), w in self.edges.items():
            if u == v:
                raise ValueError(f"self-loop on {u!r}")
            if not self.directed and u > v:
                raise ValueError(f"undirected edge ({u!r}, {v!r}) not in canonical order")
            if u not in node_set or v not in node_set:
                raise ValueError(f"edge ({u!r}, {v!r}) references unknown node")
            if not w > 0:
                raise ValueError(f"edge ({u!r}, {v!r}) has non-positive weight {w!r}")

    @classmethod
    def from_edges(
        cls,
        directed: bool,
        edges: Iterable[tuple[str, str, float]],
        extra_nodes: Iterable[str] = (),
    ) -> "WeightedGraph":
        """Accumulate parallel occurrences of a pair into one summed weight."""
        acc: dict[tuple[str, str], float] = {}
        nodes = set(extra_nodes)
        for u, v, w in edges:
            if not directed and u > v:
                u, v = v, u
            nodes.update((u, v))
            acc[(u, v)] = acc.get((u, v), 0) + w
        return cls(directed=directed, nodes=tuple(nodes), edges=acc)

    def weight(self, u: str, v: str) -> float:
        if not self.directed and u > v:
            u, v = v, u
        return self.edges.get((u, v), 0)

    def weighted_degree(self, node: str) -> float:
        """Sum of incident edge weights (in plus out for directed graphs)."""
        total = 0
        for (u, v), w in self.edges.items():
            if node in (u, v):
                total += w
        return total

    def adjacency(self) -> dict[str, list[tuple[str, float]]]:
        """Traversal structure: out-neighbors, both directions if undirected."""
        out: dict[str, list[tuple[str, float]]] = {n: [] for n in self.nodes}
        for (u, v), w in sorted(self.edges.items()):
            out[u].append((v, w))
            if not self.directed:
                out[v].append((u, w))
        return out

    def binarized(self) -> "WeightedGraph":
        return WeightedGraph(
            directed=self.directed,
            nodes=self.nodes,
            edges={pair: 1 for pair in self.edges},
        )

    def induced(self, keep: Iterable[str]) -> "WeightedGraph":
        kept = set(keep)
        return WeightedGraph(
            directed=self.directed,
            nodes=tuple(n for n in self.nodes if n in kept),
            edges={
                (u, v): w
                for (u, v), w in self.edges.items()
                if u in kept and v in kept
            },
        )

    def total_edge_weight(self) -> float:
        return sum(self.edges.values())


def _format_weight(w) -> str:
    if isinstance(w, int):
        return str(w)
    return str(int(w)) if float(w).is_integer() else repr(float(w))


def write_edge_csv(graph: WeightedGraph, path: str) -> None:
    """Rows `u,v,weight` sorted by u then v; canonical order throughout."""
    with open(path, "w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["u", "v", "weight"])
        for (u, v), w in sorted(graph.edges.items()):
            writer.writerow([u, v, _format_weight(w)])


def read_edge_csv(path: str, *, directed: bool) -> WeightedGraph:
    edges = []
    with open(path, encoding="utf-8", newline="") as handle:
        reader = csv.reader(handle)
        header = next(reader, None)
        if header != ["u", "v", "weight"]:
            raise ValueError(f"bad edge header: {header!r}")
        for row in reader:
            if not row:
                continue
            weight = float(row[2])
            edges.append((row[0], row[1], int(weight) if weight.is_integer() else weight))
    return WeightedGraph.from_edges(directed, edges)


def build_comention_network(mention_sets: Iterable[frozenset[str]]) -> WeightedGraph:
    """Each record mentioning m >= 2 coins adds 1 to all C(m,2) pair weights."""
    pair_counts: dict[tuple[str, str], int] = {}
    nodes: set[str] = set()
    for mentioned in mention_sets:
        coins = sorted(mentioned)
        nodes.update(coins)
        for u, v in combinations(coins, 2):
            pair_counts[(u, v)] = pair_counts.get((u, v), 0) + 1
    return WeightedGraph(directed=False, nodes=tuple(nodes), edges=pair_counts)


def build_retweet_network(tweets) -> WeightedGraph:
    """Directed retweeter-to-author edges weighted by retweet count.

    Records without a retweet reference contribute their author as an
    isolated node; self-retweets are dropped (no self-loops).
    """
    counts: dict[tuple[str, str], int] = {}
    nodes: set[str] = set()
    for tweet in tweets:
        nodes.add(tweet.author_id)
        target = tweet.retweeted_author_id
        if target is None or target == tweet.author_id:
            continue
        nodes.add(target)
        counts[(tweet.author_id, target)] = counts.get((tweet.author_id, target), 0) + 1
    return WeightedGraph(directed=True, nodes=tuple(nodes), edges=counts)


@dataclass(frozen=True)
class CentralityScores:
    metric: str
    scores: dict

    def __post_init__(self):
        if self.metric not in CENTRALITY_METRICS:
            raise ValueError(f"unknown metric {self.metric!r}")
        if any(s < 0 for s in self.scores.values()):
            raise ValueError("centrality scores must be non-negative")
        if self.metric == "pagerank" and self.scores:
            total = sum(self.scores.values())
            if abs(total - 1.0) > 1e-9:
                raise ValueError(f"pagerank scores sum to {total!r}, not 1")


def _pagerank(graph: WeightedGraph) -> dict[str, float]:
    nodes = graph.nodes
    n = len(nodes)
    index = {node: i for i, node in enumerate(nodes)}

    src, dst, wgt = [], [], []
    for (u, v), w in sorted(graph.edges.items()):
        src.append(index[u]); dst.append(index[v]); wgt.append(float(w))
        if not graph.directed:
            src.append(index[v]); dst.append(index[u]); wgt.append(float(w))
    src = np.array(src, dtype=np.intp)
    dst = np.array(dst, dtype=np.intp)
    wgt = np.array(wgt, dtype=np.float64)

    out_weight = np.zeros(n)
    np.add.at(out_weight, src, wgt)
    dangling = out_weight == 0.0
    norm = np.where(dangling, 1.0, out_weight)

    score = np.full(n, 1.0 / n)
    base = (1.0 - _PAGERANK_DAMPING) / n
    for _ in range(_PAGERANK_MAX_ITER):
        flow = np.zeros(n)
        np.add.at(flow, dst, score[src] * wgt / norm[src])
        dangling_mass = float(score[dangling].sum()) / n
        new = base + _PAGERANK_DAMPING * (flow + dangling_mass)
        if float(np.abs(new - score).sum()) < _PAGERANK_TOL:
            score = new
            break
        score = new
    else:
        raise RuntimeError("pagerank failed to converge")
    return {node: float(score[index[node]]) for node in nodes}


def _edge_multiplicity(w) -> Fraction:
    return Fraction(w) if not isinstance(w, Fraction) else w


def _shortest_path_dag(
    adjacency: dict[str, list[tuple[str, float]]],
    source: str,
    distance_mode: str,
):
    """Distances, path multiplicities, and predecessors from one source.

    Hop mode runs a BFS with unit lengths and a weight-w edge standing
    for w parallel links, so sigma is the sum of multiplicity products.
    Inverse mode runs Dijkstra on exact rational lengths 1/w, each edge
    a single link, so distance ties are decided exactly. Returns
    (order visited, sigma, predecessors, dist).
    """
    sigma: dict[str, Fraction] = {source: Fraction(1)}
    preds: dict[str, list[str]] = {source: []}
    order: list[str] = []

    if distance_mode == "hop":
        dist = {source: 0}
        queue = deque([source])
        while queue:
            v = queue.popleft()
            order.append(v)
            for w_node, weight in adjacency[v]:
                if w_node not in dist:
                    dist[w_node] = dist[v] + 1
                    queue.append(w_node)
                if dist[w_node] == dist[v] + 1:
                    sigma[w_node] = sigma.get(w_node, Fraction(0)) + sigma[v] * _edge_multiplicity(weight)
                    preds.setdefault(w_node, []).append(v)
        return order, sigma, preds, dist

    # inverse_weight: heavier edges are shorter single links
    dist: dict[str, Fraction] = {source: Fraction(0)}
    done: set[str] = set()
    counter = 0
    heap: list[tuple[Fraction, int, str]] = [(Fraction(0), counter, source)]
    while heap:
        d, _, v = heapq.heappop(heap)
        if v in done:
            continue
        done.add(v)
        order.append(v)
        for w_node, weight in adjacency[v]:
            candidate = d + 1 / _edge_multiplicity(weight)
            if w_node not in dist or candidate < dist[w_node]:
                dist[w_node] = candidate
                sigma[w_node] = sigma[v]
                preds[w_node] = [v]
                counter += 1
                heapq.heappush(heap, (candidate, counter, w_node))
            elif candidate == dist[w_node] and w_node not in done:
                sigma[w_node] += sigma[v]
                preds[w_node].append(v)
    return order, sigma, preds, dist


def _betweenness(
    graph: WeightedGraph, distance_mode: str, workers: int
) -> dict[str, float]:
    adjacency = graph.adjacency()
    nodes = graph.nodes

    def accumulate(source: str) -> dict[str, Fraction]:
        order, sigma, preds, _ = _shortest_path_dag(adjacency, source, distance_mode)
        delta = {v: Fraction(0) for v in order}
        partial: dict[str, Fraction] = {}
        for w_node in reversed(order):
            for v in preds[w_node]:
                # share of w_node's paths running through v, times v's count
                if distance_mode == "hop":
                    through = sigma[v] * _edge_multiplicity(graph.weight(v, w_node))
                else:
                    through = sigma[v]
                delta[v] += through / sigma[w_node] * (1 + delta[w_node])
            if w_node != source:
                partial[w_node] = delta[w_node]
        return partial

    totals = {v: Fraction(0) for v in nodes}
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            partials = list(pool.map(accumulate, nodes))
    else:
        partials = [accumulate(s) for s in nodes]
    # exact rationals: the reduction order cannot change the sum
    for partial in partials:
        for v, value in partial.items():
            totals[v] += value
    half = Fraction(1, 2) if not graph.directed else Fraction(1)
    return {v: float(totals[v] * half) for v in nodes}


def _closeness(graph: WeightedGraph, distance_mode: str) -> dict[str, float]:
    adjacency = graph.adjacency()
    out = {}
    for node in graph.nodes:
        _, _, _, dist = _shortest_path_dag(adjacency, node, distance_mode)
        reachable = [d for v, d in dist.items() if v != node]
        if not reachable:
            out[node] = 0.0
            continue
        total = sum(reachable, start=Fraction(0))
        out[node] = float(Fraction(len(reachable)) / total)
    return out


def centrality(
    graph: WeightedGraph,
    metric: str,
    *,
    distance_mode: str = "hop",
    workers: int = 1,
) -> CentralityScores:
    """One score per node under the requested metric.

    PageRank follows the damped (0.85) weighted random surfer with
    dangling mass spread uniformly, iterated to an L1 change below
    1e-10. Betweenness and closeness run over shortest paths in the
    selected distance mode, exactly.
    """
    if metric not in CENTRALITY_METRICS:
        raise ValueError(f"unknown metric {metric!r}")
    if distance_mode not in DISTANCE_MODES:
        raise ValueError(f"unknown distance mode {distance_mode!r}")
    if not graph.nodes:
        raise ValueError("graph has no nodes")
    if metric == "pagerank":
        scores = _pagerank(graph)
    elif metric == "betweenness":
        scores = _betweenness(graph, distance_mode, workers)
    else:
        scores = _closeness(graph, distance_mode)
    return CentralityScores(metric=metric, scores=scores)


def top_k_union(score_sets: list[CentralityScores], k: int) -> set[str]:
    """Union of exactly-k top scorers per metric, ties broken by node id."""
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    union: set[str] = set()
    for scores in score_sets:
        ranked = sorted(scores.scores.items(), key=lambda item: (-item[1], item[0]))
        union.update(node for node, _ in ranked[:k])
    return union


@dataclass(frozen=True)
class AuthorProfile:
    """What the influencer screen needs to know about one author."""

    author_id: str
    followers: int | None = None
    last_tweet_at: int | None = None
    recent_engagements: tuple[float, ...] = ()
    bio: str | None = None


@dataclass(frozen=True)
class InfluencerCriteria:
    min_followers: int = 5000
    min_avg_engagement: float = 200.0
    activity_window_days: int = 90
    description_filter: Callable[[str], bool] | None = None

    def __post_init__(self):
        if self.min_followers < 0 or self.min_avg_engagement < 0 or self.activity_window_days < 0:
            raise ValueError("criteria thresholds must be non-negative")


def derive_profiles(tweets) -> dict[str, AuthorProfile]:
    """Per-author profile data recovered from the corpus itself.

    Follower counts come from the newest record that carries one;
    engagements from the last ten tweets that carry a number. Bios are
    not in the corpus and stay None unless merged from a profile file.
    """
    by_author: dict[str, list] = {}
    for tweet in tweets:
        by_author.setdefault(tweet.author_id, []).append(tweet)
    profiles = {}
    for author, items in sorted(by_author.items()):
        items.sort(key=lambda t: (t.created_at, t.id))
        followers = None
        for tweet in reversed(items):
            if tweet.followers is not None:
                followers = tweet.followers
                break
        engagements = tuple(
            t.engagement for t in items[-10:] if t.engagement is not None
        )
        profiles[author] = AuthorProfile(
            author_id=author,
            followers=followers,
            last_tweet_at=items[-1].created_at,
            recent_engagements=engagements,
        )
    return profiles


def merge_profile_overrides(
    profiles: dict[str, AuthorProfile], overrides: dict[str, dict]
) -> dict[str, AuthorProfile]:
    """Layer externally supplied follower counts and bios over derived data."""
    merged = dict(profiles)
    for author, fields in sorted(overrides.items()):
        base = merged.get(author, AuthorProfile(author_id=author))
        merged[author] = AuthorProfile(
            author_id=author,
            followers=fields.get("followers", base.followers),
            last_tweet_at=base.last_tweet_at,
            recent_engagements=base.recent_engagements,
            bio=fields.get("bio", base.bio),
        )
    return merged


def filter_influencers(
    candidates: Iterable[str],
    profiles: dict[str, AuthorProfile],
    criteria: InfluencerCriteria,
    *,
    as_of: int,
) -> tuple[set[str], dict[str, str]]:
    """Screen candidates; rejections carry the first failing criterion.

    Checks run in a fixed order (followers, inactivity, engagement,
    description) and a field the active check needs but cannot find is
    reported as "missing data". A None description_filter skips the bio
    check entirely.
    """
    accepted: set[str] = set()
    rejections: dict[str, str] = {}
    window_s = criteria.activity_window_days * 86400
    for candidate in sorted(set(candidates)):
        profile = profiles.get(candidate)
        if profile is None:
            rejections[candidate] = "missing data"
            continue
        if profile.followers is None:
            rejections[candidate] = "missing data"
            continue
        if profile.followers < criteria.min_followers:
            rejections[candidate] = "followers"
            continue
        if profile.last_tweet_at is None:
            rejections[candidate] = "missing data"
            continue
        if as_of - profile.last_tweet_at > window_s:
            rejections[candidate] = "inactivity"
            continue
        if not profile.recent_engagements:
            rejections[candidate] = "missing data"
            continue
        mean_engagement = sum(profile.recent_engagements) / len(profile.recent_engagements)
        if mean_engagement < criteria.min_avg_engagement:
            rejections[candidate] = "engagement"
            continue
        if criteria.description_filter is not None:
            if profile.bio is None:
                rejections[candidate] = "missing data"
                continue
            if not criteria.description_filter(profile.bio):
                rejections[candidate] = "description"
                continue
        accepted.add(candidate)
    return accepted, rejections


def degree_share_filter(graph: WeightedGraph, theta: float) -> WeightedGraph:
    """Single pass: keep nodes holding >= theta of the original degree sum."""
    if not 0 < theta < 1:
        raise ValueError(f"theta must be in (0, 1), got {theta}")
    degree = {n: 0 for n in graph.nodes}
    for (u, v), w in graph.edges.items():
        degree[u] += w
        degree[v] += w
    total = sum(degree.values())
    if total == 0:
        return graph.induced(set())
    keep = {n for n in graph.nodes if degree[n] >= theta * total}
    return graph.induced(keep)


def degree_share_core(graph: WeightedGraph, theta: float) -> WeightedGraph:
    """Iterated variant: re-apply the share rule until no node falls out."""
    if not 0 < theta < 1:
        raise ValueError(f"theta must be in (0, 1), got {theta}")
    current = graph
    while True:
        filtered = degree_share_filter(current, theta)
        if set(filtered.nodes) == set(current.nodes):
            return filtered
        current = filtered


def edge_weight_share_filter(
    graph: WeightedGraph, theta: float
) -> list[tuple[str, str, float]]:
    """Edges carrying >= theta of total weight, heaviest first."""
    if not 0 < theta < 1:
        raise ValueError(f"theta must be in (0, 1), got {theta}")
    total = graph.total_edge_weight()
    kept = [
        (u, v, w) for (u, v), w in graph.edges.items() if w >= theta * total
    ]
    kept.sort(key=lambda row: (-row[2], row[0], row[1]))
    return kept


@dataclass(frozen=True)
class SimilarityMatrix:
    coins: tuple[str, ...]
    values: np.ndarray


def tag_similarity_matrix(registry, coins: Iterable[str]) -> SimilarityMatrix:
    """Cosine similarity of binary tag vectors; zero rows give zeros."""
    order = tuple(coins)
    tag_sets = [set(registry.tags_for(c)) for c in order]
    n = len(order)
    values = np.zeros((n, n))
    for i in range(n):
        for j in range(n):
            a, b = tag_sets[i], tag_sets[j]
            if not a or not b:
                continue
            values[i, j] = len(a & b) / np.sqrt(len(a) * len(b))
    return SimilarityMatrix(coins=order, values=values)


def adjacency_matrix(graph: WeightedGraph, order: Iterable[str]) -> np.ndarray:
    """Dense symmetric weight matrix over ``order`` (zero where no edge)."""
    nodes = tuple(order)
    index = {node: i for i, node in enumerate(nodes)}
    out = np.zeros((len(nodes), len(nodes)))
    for (u, v), w in graph.edges.items():
        if u in index and v in index:
            out[index[u], index[v]] = w
            if not graph.directed:
                out[index[v], index[u]] = w
    return out


def matrix_pearson(m1: np.ndarray, m2: np.ndarray) -> tuple[float, float]:
    """Pearson r over strict upper triangles, with a t-transform p-value."""
    from coinsignal.econometrics.special import t_pvalue_two_sided

    a = np.asarray(m1, dtype=np.float64)
    b = np.asarray(m2, dtype=np.float64)
    if a.shape != b.shape or a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"need equal square matrices, got {a.shape} and {b.shape}")
    n = a.shape[0]
    if n < 3:
        raise ValueError(f"need dimension >= 3, got {n}")
    for name, m in (("first", a), ("second", b)):
        if not np.allclose(m, m.T, atol=1e-12, rtol=0.0):
            raise ValueError(f"{name} matrix is not symmetric")

    rows, cols = np.triu_indices(n, k=1)
    x = a[rows, cols]
    y = b[rows, cols]
    dx = x - x.mean()
    dy = y - y.mean()
    vx = float(dx @ dx)
    vy = float(dy @ dy)
    if vx == 0.0 or vy == 0.0:
        raise ValueError("degenerate matrix: upper triangle has zero variance")
    r = float(dx @ dy) / np.sqrt(vx * vy)
    pairs = x.shape[0]
    if abs(r) >= 1.0:
        return r, 0.0
    t = r * np.sqrt((pairs - 2) / (1.0 - r * r))
    return r, t_pvalue_two_sided(float(t), pairs - 2)

"""Graph metrics with brute-force-verifiable semantics.

Every function here is a pure function of an immutable :class:`CallGraph`.
Distances are unweighted hop counts; edge weights affect reporting only.
Iteration is always in ascending node id, so results are bitwise
deterministic across runs.

Conventions, stated per metric because self-loops and direction matter:

* degree counts stored arcs, so a self-loop contributes 1 in and 1 out;
* closeness defaults to the undirected view with reachable-set scaling,
  directed in/out modes sit behind a flag;
* betweenness is Brandes over the graph's own direction, unnormalized by
  default (undirected graphs use unordered pairs, i.e. half the directed
  accumulation);
* clustering and assortativity use the undirected view with self-loops
  removed.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Mapping, Sequence

from .errors import DomainError
from .graph import CallGraph
from .validation import check_call_graph


@dataclass(frozen=True)
class NodeMetrics:
    """Per-node metric bundle; ``degree == in_degree + out_degree``."""

    degree: int
    in_degree: int
    out_degree: int
    closeness: float
    betweenness: float
    clustering: float
    feature_norm: float = 0.0


@dataclass(frozen=True)
class MetricsReport:
    """One column of a comparison table.

    ``assortativity`` is None when the remaining-degree variance is zero
    (degree-regular graphs); it is reported as undefined, never a number.
    ``empty`` flags reports whose averages are 0 by convention because
    there were no nodes.
    """

    n_nodes: int
    n_edges: int
    avg_degree: float
    density: float
    n_components: int
    avg_clustering: float
    assortativity: float | None
    avg_betweenness: float
    avg_betweenness_normalized: float
    avg_closeness: float
    cyclomatic: int
    empty: bool = False


# Paper-style row order for rendered tables; extras trail the canonical rows.
REPORT_ROWS: tuple[tuple[str, str], ...] = (
    ("Number of nodes", "n_nodes"),
    ("Number of edges", "n_edges"),
    ("Average degree", "avg_degree"),
    ("Density", "density"),
    ("Number of connected components", "n_components"),
    ("Average clustering", "avg_clustering"),
    ("Degree assortativity coefficient", "assortativity"),
    ("Avg. betweenness centrality", "avg_betweenness"),
    ("Avg. closeness centrality", "avg_closeness"),
    ("Cyclomatic Complexity", "cyclomatic"),
    ("Avg. betweenness centrality (normalized)", "avg_betweenness_normalized"),
)


def _undirected_adjacency(g: CallGraph, drop_self: bool) -> list[tuple[int, ...]]:
    if drop_self:
        return [tuple(w for w in g.neighbors(v) if w != v) for v in range(g.n)]
    return [g.neighbors(v) for v in range(g.n)]


def degree_centrality(g: CallGraph) -> dict[int, tuple[int, int, int]]:
    """Per node: (in, out, total) over stored arcs; totals sum to 2m."""
    check_call_graph(g)
    out = {}
    for v in range(g.n):
        i = len(g.in_neighbors(v))
        o = len(g.out_neighbors(v))
        out[v] = (i, o, i + o)
    return out


def _bfs_distances(adj: Sequence[Sequence[int]], s: int) -> dict[int, int]:
    dist = {s: 0}
    queue = deque([s])
    while queue:
        v = queue.popleft()
        dv = dist[v]
        for w in adj[v]:
            if w not in dist:
                dist[w] = dv + 1
                queue.append(w)
    return dist


def closeness_centrality(g: CallGraph, mode: str = "undirected") -> dict[int, float]:
    """Reachability-scaled closeness: ((r-1)/(n-1)) * ((r-1)/S).

    ``r`` counts the nodes reachable from v (v included) and S sums their
    hop distances. Isolated nodes and single-node graphs score 0.
    ``mode`` picks the distance orientation: 'undirected' (default), 'out'
    (v to others), or 'in' (others to v).
    """
    check_call_graph(g)
    if mode == "undirected":
        adj: Sequence[Sequence[int]] = [g.neighbors(v) for v in range(g.n)]
    elif mode == "out":
        adj = [g.out_neighbors(v) for v in range(g.n)]
    elif mode == "in":
        adj = [g.in_neighbors(v) for v in range(g.n)]
    else:
        raise DomainError(f"unknown closeness mode {mode!r}")
    n = g.n
    result = {}
    for v in range(n):
        dist = _bfs_distances(adj, v)
        peers = len(dist) - 1
        if peers <= 0 or n <= 1:
            result[v] = 0.0
            continue
        total = sum(dist.values())
        result[v] = (peers / (n - 1)) * (peers / total)
    return result


def betweenness_centrality(g: CallGraph, normalized: bool = False) -> dict[int, float]:
    """Brandes betweenness over the graph's own direction.

    Directed graphs sum over ordered (s, t) pairs; undirected graphs over
    unordered pairs. Normalization divides by (n-1)(n-2) for directed and
    (n-1)(n-2)/2 for undirected input; with n < 3 the normalizer is
    undefined and all values are 0.
    """
    check_call_graph(g)
    n = g.n
    if g.directed:
        adj: Sequence[Sequence[int]] = [g.out_neighbors(v) for v in range(n)]
    else:
        adj = [g.neighbors(v) for v in range(n)]
    bc = [0.0] * n
    for s in range(n):
        dist = {s: 0}
        sigma = {s: 1}
        preds: dict[int, list[int]] = {s: []}
        order = []
        queue = deque([s])
        while queue:
            v = queue.popleft()
            order.append(v)
            dv = dist[v]
            sv = sigma[v]
            for w in adj[v]:
                if w not in dist:
                    dist[w] = dv + 1
                    sigma[w] = 0
                    preds[w] = []
                    queue.append(w)
                if dist[w] == dv + 1:
                    sigma[w] += sv
                    preds[w].append(v)
        delta = dict.fromkeys(order, 0.0)
        for w in reversed(order):
            coeff = (1.0 + delta[w]) / sigma[w]
            for v in preds[w]:
                delta[v] += sigma[v] * coeff
            if w != s:
                bc[w] += delta[w]
    if not g.directed:
        bc = [x / 2.0 for x in bc]
    if normalized:
        if n < 3:
            return {v: 0.0 for v in range(n)}
        scale = (n - 1) * (n - 2)
        if not g.directed:
            scale /= 2.0
        bc = [x / scale for x in bc]
    return {v: bc[v] for v in range(n)}


def clustering_coefficients(g: CallGraph) -> tuple[dict[int, float], float]:
    """Triangle density per node on the undirected view, self-loops removed.

    C_i = 2 t_i / (k_i (k_i - 1)), zero for k_i < 2; the average runs over
    all nodes.
    """
    check_call_graph(g)
    adj = _undirected_adjacency(g, drop_self=True)
    sets = [set(a) for a in adj]
    coeffs = {}
    for v in range(g.n):
        k = len(adj[v])
        if k < 2:
            coeffs[v] = 0.0
            continue
        nbrs = adj[v]
        t = 0
        for i in range(k):
            si = sets[nbrs[i]]
            for j in range(i + 1, k):
                if nbrs[j] in si:
                    t += 1
        coeffs[v] = 2.0 * t / (k * (k - 1))
    avg = sum(coeffs.values()) / g.n if g.n else 0.0
    return coeffs, avg


def connected_components(g: CallGraph, kind: str = "weak") -> list[set[int]]:
    """Weak components of the undirected view, or strongly connected sets."""
    check_call_graph(g)
    if kind == "weak":
        comps = _weak_components(g)
    elif kind == "strong":
        comps = _strong_components(g)
    else:
        raise DomainError(f"unknown component kind {kind!r}")
    return sorted(comps, key=min)


def _weak_components(g: CallGraph) -> list[set[int]]:
    seen = [False] * g.n
    comps = []
    for s in range(g.n):
        if seen[s]:
            continue
        comp = {s}
        seen[s] = True
        queue = deque([s])
        while queue:
            v = queue.popleft()
            for w in g.neighbors(v):
                if not seen[w]:
                    seen[w] = True
                    comp.add(w)
                    queue.append(w)
        comps.append(comp)
    return comps


def _strong_components(g: CallGraph) -> list[set[int]]:
    # Iterative Tarjan; undirected graphs treat every edge as reciprocal.
    if g.directed:
        adj: Sequence[Sequence[int]] = [g.out_neighbors(v) for v in range(g.n)]
    else:
        adj = [g.neighbors(v) for v in range(g.n)]
    n = g.n
    index = [-1] * n
    low = [0] * n
    on_stack = [False] * n
    stack: list[int] = []
    comps: list[set[int]] = []
    counter = 0
    for root in range(n):
        if index[root] != -1:
            continue
        work = [(root, 0)]
        while work:
            v, pi = work.pop()
            if pi == 0:
                index[v] = low[v] = counter
                counter += 1
                stack.append(v)
                on_stack[v] = True
            recurse = False
            for i in range(pi, len(adj[v])):
                w = adj[v][i]
                if index[w] == -1:
                    work.append((v, i + 1))
                    work.append((w, 0))
                    recurse = True
                    break
                if on_stack[w]:
                    low[v] = min(low[v], index[w])
            if recurse:
                continue
            if low[v] == index[v]:
                comp = set()
                while True:
                    w = stack.pop()
                    on_stack[w] = False
                    comp.add(w)
                    if w == v:
                        break
                comps.append(comp)
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[v])
    return comps


def degree_assortativity(g: CallGraph) -> float | None:
    """Newman's degree assortativity on the undirected view.

    Uses the remaining-degree distribution over edge ends (self-loops
    excluded). Computed in exact integer arithmetic, so regular graphs
    return None (zero variance) and hand-derivable cases are exact.
    """
    check_call_graph(g)
    pairs = set()
    for e in g.edges:
        if e.source != e.target:
            pairs.add((min(e.source, e.target), max(e.source, e.target)))
    if not pairs:
        return None
    adj = _undirected_adjacency(g, drop_self=True)
    rem = [len(a) - 1 for a in adj]
    m2 = 0
    s_jk = 0
    s_j = 0
    s_j2 = 0
    for u, v in pairs:
        ju, jv = rem[u], rem[v]
        s_jk += 2 * ju * jv
        s_j += ju + jv
        s_j2 += ju * ju + jv * jv
        m2 += 2
    denom = m2 * s_j2 - s_j * s_j
    if denom == 0:
        return None
    return (m2 * s_jk - s_j * s_j) / denom


def cyclomatic_complexity(g: CallGraph) -> int:
    """Edges - nodes + 2 * weak components."""
    check_call_graph(g)
    return g.m - g.n + 2 * len(_weak_components(g))


def density(g: CallGraph) -> float:
    """2m / (n(n-1)); graphs with fewer than 2 nodes have density 0."""
    check_call_graph(g)
    if g.n < 2:
        return 0.0
    return 2.0 * g.m / (g.n * (g.n - 1))


def feature_norms(features: Mapping[int, Sequence[float]]) -> dict[int, float]:
    """Euclidean norm of each node's feature vector."""
    dims = {len(vec) for vec in features.values()}
    if len(dims) > 1:
        raise DomainError(f"feature vectors have mismatched dimensions: {sorted(dims)}")
    if dims and next(iter(dims)) < 1:
        raise DomainError("feature vectors must have at least one dimension")
    return {i: sum(float(x) * float(x) for x in vec) ** 0.5 for i, vec in features.items()}


def node_metrics(
    g: CallGraph, features: Mapping[int, Sequence[float]] | None = None
) -> dict[int, NodeMetrics]:
    """All per-node metrics in one pass; feature norms are 0 unless given."""
    check_call_graph(g)
    degrees = degree_centrality(g)
    closeness = closeness_centrality(g)
    betweenness = betweenness_centrality(g)
    clustering, _ = clustering_coefficients(g)
    norms = feature_norms(features) if features is not None else {}
    return {
        v: NodeMetrics(
            degree=degrees[v][2],
            in_degree=degrees[v][0],
            out_degree=degrees[v][1],
            closeness=closeness[v],
            betweenness=betweenness[v],
            clustering=clustering[v],
            feature_norm=norms.get(v, 0.0),
        )
        for v in range(g.n)
    }


def metrics_report(g: CallGraph) -> MetricsReport:
    """Aggregate every metric into one table column.

    Averages are arithmetic means over all nodes; on an empty graph they
    are 0 by convention and the report carries an explicit empty flag.
    """
    check_call_graph(g)
    n, m = g.n, g.m
    if n == 0:
        return MetricsReport(
            n_nodes=0,
            n_edges=0,
            avg_degree=0.0,
            density=0.0,
            n_components=0,
            avg_clustering=0.0,
            assortativity=None,
            avg_betweenness=0.0,
            avg_betweenness_normalized=0.0,
            avg_closeness=0.0,
            cyclomatic=0,
            empty=True,
        )
    n_components = len(_weak_components(g))
    _, avg_clustering = clustering_coefficients(g)
    bc = betweenness_centrality(g, normalized=False)
    bc_norm = betweenness_centrality(g, normalized=True)
    cc = closeness_centrality(g)
    return MetricsReport(
        n_nodes=n,
        n_edges=m,
        avg_degree=2.0 * m / n,
        density=density(g),
        n_components=n_components,
        avg_clustering=avg_clustering,
        assortativity=degree_assortativity(g),
        avg_betweenness=sum(bc[v] for v in range(n)) / n,
        avg_betweenness_normalized=sum(bc_norm[v] for v in range(n)) / n,
        avg_closeness=sum(cc[v] for v in range(n)) / n,
        cyclomatic=m - n + 2 * n_components,
    )

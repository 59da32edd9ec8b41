"""Naive brute-force metric reimplementations, independent of the package.

These recompute every metric from first principles (all-pairs BFS, path
counting by distance-ordered dynamic programming, explicit joint degree
distributions) and exist solely to cross-check the production
implementations.
"""

from __future__ import annotations

from collections import deque

import numpy as np


def adjacency(g, directed: bool) -> list[list[int]]:
    n = g.n
    out = [[] for _ in range(n)]
    for e in g.edges:
        out[e.source].append(e.target)
        if not directed and e.source != e.target:
            out[e.target].append(e.source)
    return [sorted(set(a)) for a in out]


def bfs_row(adj, s, n):
    dist = np.full(n, np.inf)
    dist[s] = 0
    queue = deque([s])
    while queue:
        v = queue.popleft()
        for w in adj[v]:
            if np.isinf(dist[w]):
                dist[w] = dist[v] + 1
                queue.append(w)
    return dist


def path_counts(adj, dist_row, s, n):
    """Shortest-path counts from s by processing nodes in distance order."""
    adj_sets = [set(a) for a in adj]
    sigma = np.zeros(n)
    sigma[s] = 1
    order = sorted(
        (v for v in range(n) if np.isfinite(dist_row[v])), key=lambda v: dist_row[v]
    )
    for v in order:
        if v == s:
            continue
        total = 0
        for u in range(n):
            if dist_row[u] == dist_row[v] - 1 and v in adj_sets[u]:
                total += sigma[u]
        sigma[v] = total
    return sigma


def naive_betweenness(g) -> dict[int, float]:
    """BC(v) = sum over (s, t) of sigma_sv * sigma_vt / sigma_st.

    Directed graphs sum over ordered pairs; undirected halve the total.
    """
    n = g.n
    use_directed = g.directed
    adj = adjacency(g, use_directed)
    dist = np.array([bfs_row(adj, s, n) for s in range(n)])
    sigma = np.array([path_counts(adj, dist[s], s, n) for s in range(n)])
    safe_sigma = np.where(sigma == 0, 1.0, sigma)
    ids = np.arange(n)
    bc = {}
    for v in range(n):
        through = dist[:, v][:, None] + dist[v, :][None, :]
        on_path = np.isfinite(through) & (through == dist) & (sigma > 0)
        on_path[v, :] = False
        on_path[:, v] = False
        on_path[ids, ids] = False
        contrib = sigma[:, v][:, None] * sigma[v, :][None, :] / safe_sigma
        total = float(contrib[on_path].sum())
        bc[v] = total / (1 if use_directed else 2)
    return bc


def naive_closeness(g) -> dict[int, float]:
    n = g.n
    adj = adjacency(g, directed=False)
    out = {}
    for v in range(n):
        dist = bfs_row(adj, v, n)
        reachable = [d for d in dist if np.isfinite(d)]
        peers = len(reachable) - 1
        if peers <= 0 or n <= 1:
            out[v] = 0.0
        else:
            out[v] = (peers / (n - 1)) * (peers / sum(reachable))
    return out


def naive_clustering(g) -> tuple[dict[int, float], float]:
    n = g.n
    nbrs = [set() for _ in range(n)]
    for e in g.edges:
        if e.source != e.target:
            nbrs[e.source].add(e.target)
            nbrs[e.target].add(e.source)
    coeffs = {}
    for v in range(n):
        k = len(nbrs[v])
        if k < 2:
            coeffs[v] = 0.0
            continue
        triangles = 0
        members = sorted(nbrs[v])
        for i in range(k):
            for j in range(i + 1, k):
                if members[j] in nbrs[members[i]]:
                    triangles += 1
        coeffs[v] = 2.0 * triangles / (k * (k - 1))
    return coeffs, (sum(coeffs.values()) / n if n else 0.0)


def naive_weak_components(g) -> list[set[int]]:
    adj = adjacency(g, directed=False)
    seen = set()
    comps = []
    for s in range(g.n):
        if s in seen:
            continue
        comp = set()
        stack = [s]
        while stack:
            v = stack.pop()
            if v in comp:
                continue
            comp.add(v)
            stack.extend(adj[v])
        seen |= comp
        comps.append(comp)
    return sorted(comps, key=min)


def naive_strong_components(g) -> list[set[int]]:
    """Reachability closure intersected with reverse reachability."""
    n = g.n
    adj = adjacency(g, directed=g.directed)
    reach = []
    for s in range(n):
        row = bfs_row(adj, s, n)
        reach.append({v for v in range(n) if np.isfinite(row[v])})
    assigned = set()
    comps = []
    for s in range(n):
        if s in assigned:
            continue
        comp = {v for v in reach[s] if s in reach[v]}
        assigned |= comp
        comps.append(comp)
    return sorted(comps, key=min)


def naive_assortativity(g) -> float | None:
    from fractions import Fraction

    pairs = set()
    for e in g.edges:
        if e.source != e.target:
            pairs.add((min(e.source, e.target), max(e.source, e.target)))
    if not pairs:
        return None
    nbrs = [set() for _ in range(g.n)]
    for u, v in pairs:
        nbrs[u].add(v)
        nbrs[v].add(u)
    # joint distribution over remaining degrees at edge ends, in exact rationals
    e_jk: dict[tuple[int, int], Fraction] = {}
    m2 = 2 * len(pairs)
    unit = Fraction(1, m2)
    for u, v in pairs:
        ju, jv = len(nbrs[u]) - 1, len(nbrs[v]) - 1
        e_jk[(ju, jv)] = e_jk.get((ju, jv), Fraction(0)) + unit
        e_jk[(jv, ju)] = e_jk.get((jv, ju), Fraction(0)) + unit
    q: dict[int, Fraction] = {}
    for (j, _), w in e_jk.items():
        q[j] = q.get(j, Fraction(0)) + w
    mean_q = sum(j * w for j, w in q.items())
    var_q = sum(j * j * w for j, w in q.items()) - mean_q * mean_q
    if var_q == 0:
        return None
    # sum_{jk} jk * q_j * q_k collapses to mean_q^2, covering cells where e_jk = 0
    num = sum(j * k * w for (j, k), w in e_jk.items()) - mean_q * mean_q
    return float(num / var_q)


def naive_degrees(g) -> dict[int, tuple[int, int, int]]:
    ins = [0] * g.n
    outs = [0] * g.n
    for e in g.edges:
        outs[e.source] += 1
        ins[e.target] += 1
    return {v: (ins[v], outs[v], ins[v] + outs[v]) for v in range(g.n)}

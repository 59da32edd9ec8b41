"""Shared graph constructors for the test suite."""

from __future__ import annotations

import random

from upgrade_lens.graph import CallGraph, GraphBuilder


def build_graph(n: int, edges, flags: dict[int, dict] | None = None) -> CallGraph:
    """Small literal graphs: ``edges`` is a list of (source, target[, weight])."""
    builder = GraphBuilder()
    flags = flags or {}
    for i in range(n):
        builder.add_function("m.py", f"f{i}", **flags.get(i, {}))
    for spec in edges:
        if len(spec) == 2:
            builder.add_call(spec[0], spec[1])
        else:
            builder.add_call(spec[0], spec[1], spec[2])
    return builder.build()


def random_call_graph(
    seed: int,
    n: int | None = None,
    p: float | None = None,
    self_loops: bool = False,
    flag_nodes: bool = False,
) -> CallGraph:
    """Seeded directed G(n, p) in the acceptance regime (n <= 64, p in [0.05, 0.3])."""
    rng = random.Random(seed)
    if n is None:
        n = rng.randint(4, 64)
    if p is None:
        p = rng.uniform(0.05, 0.3)
    builder = GraphBuilder()
    for i in range(n):
        changed = flag_nodes and rng.random() < 0.25
        builder.add_function(
            "m.py",
            f"f{i}",
            changed=changed,
            vulnerable=flag_nodes and rng.random() < 0.1,
        )
    for s in range(n):
        for t in range(n):
            if s == t and not (self_loops and rng.random() < 0.02):
                continue
            if s != t and rng.random() >= p:
                continue
            builder.add_call(s, t)
    return builder.build()


def component_graph(n: int, m: int, p: int, seed: int = 0) -> CallGraph:
    """Synthetic directed graph with exactly n nodes, m edges, p weak components.

    Nodes are split into p groups, each connected by a random spanning
    tree; remaining edges are sprinkled within groups, so components stay
    small and metric passes stay fast on table-sized graphs.
    """
    if not (p >= 1 and n >= p and m >= n - p):
        raise ValueError("need p >= 1, n >= p, m >= n - p")
    rng = random.Random(seed)
    builder = GraphBuilder()
    for i in range(n):
        builder.add_function("m.py", f"f{i}")

    sizes = [n // p] * p
    for i in range(n % p):
        sizes[i] += 1
    groups = []
    start = 0
    for size in sizes:
        groups.append(list(range(start, start + size)))
        start += size

    used = set()
    for members in groups:
        for idx in range(1, len(members)):
            parent = members[rng.randrange(idx)]
            child = members[idx]
            pair = (parent, child) if rng.random() < 0.5 else (child, parent)
            used.add(pair)
            builder.add_call(*pair)

    extra = m - (n - p)
    eligible = [g for g in groups if len(g) >= 2]
    capacity = {i: len(g) * (len(g) - 1) - (len(g) - 1) for i, g in enumerate(eligible)}
    gi = 0
    placed = 0
    while placed < extra:
        group = eligible[gi % len(eligible)]
        gi += 1
        if capacity[(gi - 1) % len(eligible)] <= 0:
            continue
        while True:
            s, t = rng.sample(group, 2)
            if (s, t) not in used:
                used.add((s, t))
                builder.add_call(s, t)
                capacity[(gi - 1) % len(eligible)] -= 1
                placed += 1
                break
    return builder.build()

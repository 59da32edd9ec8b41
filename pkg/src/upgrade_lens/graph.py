"""Call-graph data model and serialization.

A :class:`CallGraph` is a directed graph of function nodes joined by
caller-to-callee edges. Graphs are immutable once constructed; every
transformation returns a new graph. Parallel calls between the same pair
of functions collapse into a single edge whose weight accumulates the
call count.

Serialization is a line-oriented JSON format: a header record carrying
the schema version, one ``fn`` record per function, then one ``call``
record per edge. A CSV import for externally produced caller/callee edge
tables is provided alongside.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field, replace
from typing import Iterable, Mapping

from .errors import IntegrityError, ParseError

SCHEMA = "upgrade-lens/1"

ROLE_CALLER = "caller"
ROLE_CALLEE = "callee"

CODEQL_COLUMNS = ("caller_path", "caller_name", "callee_path", "callee_name")


@dataclass(frozen=True)
class FunctionNode:
    """One function, identified by its (path, name) pair."""

    id: int
    path: str
    name: str
    changed: bool = False
    vulnerable: bool = False
    critical: bool = False
    roles: frozenset[str] = frozenset()

    @property
    def key(self) -> tuple[str, str]:
        return (self.path, self.name)


@dataclass(frozen=True)
class CallEdge:
    """A directed caller-to-callee edge with an accumulated call count."""

    source: int
    target: int
    weight: float = 1.0


@dataclass(frozen=True)
class CallGraph:
    """Immutable function call graph.

    ``directed`` is True for every loaded or extracted graph; it is False
    only for graphs produced by :func:`undirected_projection`, whose edges
    are canonical unordered pairs stored as (min, max).
    """

    nodes: tuple[FunctionNode, ...]
    edges: tuple[CallEdge, ...]
    directed: bool = True

    _out: tuple[tuple[int, ...], ...] = field(init=False, repr=False, compare=False, default=())
    _in: tuple[tuple[int, ...], ...] = field(init=False, repr=False, compare=False, default=())
    _nbrs: tuple[tuple[int, ...], ...] = field(init=False, repr=False, compare=False, default=())
    _by_key: Mapping[tuple[str, str], int] = field(
        init=False, repr=False, compare=False, default_factory=dict
    )

    def __post_init__(self):
        n = len(self.nodes)
        by_key: dict[tuple[str, str], int] = {}
        for i, node in enumerate(self.nodes):
            if node.id != i:
                raise IntegrityError(f"node ids must be dense 0..n-1, found id {node.id} at index {i}")
            if node.key in by_key:
                raise IntegrityError(f"duplicate function {node.key!r}")
            if node.critical and not node.changed:
                raise IntegrityError(f"function {node.key!r} is critical but not changed")
            by_key[node.key] = i
        out: list[set[int]] = [set() for _ in range(n)]
        inc: list[set[int]] = [set() for _ in range(n)]
        seen_pairs: set[tuple[int, int]] = set()
        for e in self.edges:
            if not (0 <= e.source < n and 0 <= e.target < n):
                raise IntegrityError(f"edge ({e.source}, {e.target}) references an unknown node")
            if e.weight <= 0:
                raise IntegrityError(f"edge ({e.source}, {e.target}) has non-positive weight {e.weight}")
            pair = (e.source, e.target)
            if pair in seen_pairs:
                raise IntegrityError(f"duplicate edge pair {pair}")
            seen_pairs.add(pair)
            out[e.source].add(e.target)
            inc[e.target].add(e.source)
        object.__setattr__(self, "_out", tuple(tuple(sorted(s)) for s in out))
        object.__setattr__(self, "_in", tuple(tuple(sorted(s)) for s in inc))
        object.__setattr__(self, "_nbrs", tuple(tuple(sorted(a | b)) for a, b in zip(out, inc)))
        object.__setattr__(self, "_by_key", by_key)

    @property
    def n(self) -> int:
        """Node count."""
        return len(self.nodes)

    @property
    def m(self) -> int:
        """Edge count (collapsed pairs)."""
        return len(self.edges)

    def out_neighbors(self, i: int) -> tuple[int, ...]:
        return self._out[i]

    def in_neighbors(self, i: int) -> tuple[int, ...]:
        return self._in[i]

    def neighbors(self, i: int) -> tuple[int, ...]:
        """Neighbors ignoring direction (the undirected view of the graph)."""
        return self._nbrs[i]

    def id_of(self, path: str, name: str) -> int | None:
        return self._by_key.get((path, name))

    def keys(self) -> set[tuple[str, str]]:
        return set(self._by_key)

    @property
    def self_loops(self) -> tuple[int, ...]:
        """Ids of recursive functions, flagged so metrics can state their treatment."""
        return tuple(sorted(e.source for e in self.edges if e.source == e.target))


class GraphBuilder:
    """Accumulates functions and calls, then freezes them into a CallGraph.

    Repeated calls between the same pair accumulate weight; duplicate
    function keys are rejected. Roles are derived from edge direction at
    build time.
    """

    def __init__(self):
        self._specs: list[tuple[str, str, bool, bool, bool]] = []
        self._ids: dict[tuple[str, str], int] = {}
        self._weights: dict[tuple[int, int], float] = {}

    def add_function(
        self,
        path: str,
        name: str,
        *,
        changed: bool = False,
        vulnerable: bool = False,
        critical: bool = False,
    ) -> int:
        key = (path, name)
        if key in self._ids:
            raise IntegrityError(f"duplicate function {key!r}")
        node_id = len(self._specs)
        self._ids[key] = node_id
        self._specs.append((path, name, changed, vulnerable, critical))
        return node_id

    def has_function(self, path: str, name: str) -> bool:
        return (path, name) in self._ids

    def id_of(self, path: str, name: str) -> int:
        return self._ids[(path, name)]

    def add_call(self, source: int, target: int, weight: float = 1.0) -> None:
        if not (0 <= source < len(self._specs) and 0 <= target < len(self._specs)):
            raise IntegrityError(f"call ({source}, {target}) references an unknown function")
        if weight <= 0:
            raise IntegrityError(f"call ({source}, {target}) has non-positive weight {weight}")
        pair = (source, target)
        self._weights[pair] = self._weights.get(pair, 0.0) + weight

    def build(self, directed: bool = True) -> CallGraph:
        return _assemble(self._specs, self._weights, directed)


def _assemble(
    specs: Iterable[tuple[str, str, bool, bool, bool]],
    weights: Mapping[tuple[int, int], float],
    directed: bool,
) -> CallGraph:
    """Construct a CallGraph, deriving roles from the (already collapsed) edges."""
    out_deg: dict[int, int] = {}
    in_deg: dict[int, int] = {}
    for s, t in weights:
        out_deg[s] = out_deg.get(s, 0) + 1
        in_deg[t] = in_deg.get(t, 0) + 1
    nodes = []
    for i, (path, name, changed, vulnerable, critical) in enumerate(specs):
        roles = set()
        if out_deg.get(i, 0) > 0:
            roles.add(ROLE_CALLER)
        if in_deg.get(i, 0) > 0:
            roles.add(ROLE_CALLEE)
        nodes.append(
            FunctionNode(
                id=i,
                path=path,
                name=name,
                changed=changed,
                vulnerable=vulnerable,
                critical=critical,
                roles=frozenset(roles),
            )
        )
    edges = tuple(
        CallEdge(s, t, w) for (s, t), w in sorted(weights.items())
    )
    return CallGraph(nodes=tuple(nodes), edges=edges, directed=directed)


def load_graph(document: str) -> CallGraph:
    """Parse the line-oriented interchange format into a CallGraph.

    Node ids are assigned densely, 0..n-1, in document order. Repeated
    call records for the same pair accumulate their counts.
    """
    builder = GraphBuilder()
    pending_calls: list[tuple[int, tuple[str, str], tuple[str, str], float]] = []
    saw_header = False
    for lineno, raw in enumerate(document.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        try:
            record = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ParseError(f"invalid record: {exc.msg}", line=lineno, column=exc.colno) from exc
        if not isinstance(record, dict):
            raise ParseError("record must be an object", line=lineno)
        if not saw_header:
            schema = record.get("schema")
            if schema != SCHEMA:
                raise ParseError(f"expected header with schema {SCHEMA!r}, got {schema!r}", line=lineno)
            saw_header = True
            continue
        kind = record.get("kind")
        if kind == "fn":
            path, name = record.get("path"), record.get("name")
            if not isinstance(path, str) or not isinstance(name, str):
                raise ParseError("fn record needs string 'path' and 'name'", line=lineno)
            try:
                builder.add_function(
                    path,
                    name,
                    changed=bool(record.get("changed", False)),
                    vulnerable=bool(record.get("vulnerable", False)),
                    critical=bool(record.get("critical", False)),
                )
            except IntegrityError as exc:
                raise IntegrityError(f"{exc} (line {lineno})") from exc
        elif kind == "call":
            src, dst = record.get("from"), record.get("to")
            if not _is_key(src) or not _is_key(dst):
                raise ParseError("call record needs 'from' and 'to' as [path, name] pairs", line=lineno)
            count = record.get("count", 1)
            if not isinstance(count, (int, float)) or isinstance(count, bool) or count <= 0:
                raise ParseError(f"call record has invalid count {count!r}", line=lineno)
            pending_calls.append((lineno, (src[0], src[1]), (dst[0], dst[1]), float(count)))
        else:
            raise ParseError(f"unknown record kind {kind!r}", line=lineno)
    if not saw_header:
        raise ParseError("empty document: missing header record", line=1)
    for lineno, src, dst, count in pending_calls:
        if not builder.has_function(*src):
            raise IntegrityError(f"call references unknown function {src!r} (line {lineno})")
        if not builder.has_function(*dst):
            raise IntegrityError(f"call references unknown function {dst!r} (line {lineno})")
        builder.add_call(builder.id_of(*src), builder.id_of(*dst), count)
    return builder.build()


def _is_key(value) -> bool:
    return (
        isinstance(value, list)
        and len(value) == 2
        and all(isinstance(p, str) for p in value)
    )


def save_graph(g: CallGraph) -> str:
    """Serialize a graph so that ``load_graph(save_graph(g)) == g``."""
    lines = [json.dumps({"schema": SCHEMA}, sort_keys=True)]
    for node in g.nodes:
        lines.append(
            json.dumps(
                {
                    "kind": "fn",
                    "path": node.path,
                    "name": node.name,
                    "changed": node.changed,
                    "vulnerable": node.vulnerable,
                    "critical": node.critical,
                },
                sort_keys=True,
            )
        )
    for e in g.edges:
        src, dst = g.nodes[e.source], g.nodes[e.target]
        lines.append(
            json.dumps(
                {
                    "kind": "call",
                    "from": [src.path, src.name],
                    "to": [dst.path, dst.name],
                    "count": e.weight,
                },
                sort_keys=True,
            )
        )
    return "\n".join(lines) + "\n"


def import_codeql_edges(rows: str) -> CallGraph:
    """Build a graph from a caller/callee CSV edge table.

    Each row is ``caller_path,caller_name,callee_path,callee_name``. An
    optional literal header row is skipped. Nodes deduplicate by
    (path, name); duplicate rows accumulate edge weight.
    """
    builder = GraphBuilder()

    def intern(path: str, name: str) -> int:
        if builder.has_function(path, name):
            return builder.id_of(path, name)
        return builder.add_function(path, name)

    reader = csv.reader(io.StringIO(rows))
    for rowno, row in enumerate(reader, start=1):
        if not row:
            continue
        if rowno == 1 and tuple(row) == CODEQL_COLUMNS:
            continue
        if len(row) != 4 or any(not f for f in row):
            raise ParseError(f"expected 4 non-empty fields, got {row!r}", line=rowno)
        caller = intern(row[0], row[1])
        callee = intern(row[2], row[3])
        builder.add_call(caller, callee)
    return builder.build()


def induced_subgraph(g: CallGraph, keep: Iterable[int]) -> CallGraph:
    """Subgraph on ``keep``: those nodes and every edge with both endpoints kept.

    Node attributes (flags, roles) are preserved; ids are renumbered
    densely in ascending order of the original ids.
    """
    from .validation import check_node_ids

    keep_set = check_node_ids(g, keep)
    order = sorted(keep_set)
    remap = {old: new for new, old in enumerate(order)}
    nodes = tuple(replace(g.nodes[old], id=new) for new, old in enumerate(order))
    edges = tuple(
        CallEdge(remap[e.source], remap[e.target], e.weight)
        for e in g.edges
        if e.source in keep_set and e.target in keep_set
    )
    return CallGraph(nodes=nodes, edges=edges, directed=g.directed)


def undirected_projection(g: CallGraph) -> CallGraph:
    """Collapse edge direction: one edge per unordered endpoint pair.

    Reciprocal pairs merge with summed weight. The result is marked
    undirected so metrics dispatch on it; projecting twice is a no-op.
    """
    weights: dict[tuple[int, int], float] = {}
    for e in g.edges:
        pair = (min(e.source, e.target), max(e.source, e.target))
        weights[pair] = weights.get(pair, 0.0) + e.weight
    edges = tuple(CallEdge(s, t, w) for (s, t), w in sorted(weights.items()))
    return CallGraph(nodes=g.nodes, edges=edges, directed=False)

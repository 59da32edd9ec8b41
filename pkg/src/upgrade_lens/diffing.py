"""Base-vs-upgraded graph comparison and changed/unchanged partitioning.

Change detection is digest-based: a function counts as changed when it
was added by the upgrade or its body digest differs between versions.
Deleting a function marks each of its former neighbors (callers and
callees in the base graph) as changed, a one-hop impact radius.

The changed/unchanged node sets form a true partition; edges crossing
the partition belong to neither induced subgraph and are counted
separately so nothing is silently dropped.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Iterable, Mapping, Sequence

from .errors import DomainError, IntegrityError
from .graph import CallGraph, induced_subgraph
from .metrics import REPORT_ROWS, MetricsReport, metrics_report

HashPair = tuple[str | None, str | None]


@dataclass(frozen=True)
class UpgradeComparison:
    """Base and upgraded graphs with the changed partition and broken label."""

    base: CallGraph
    upgraded: CallGraph
    changed_ids: frozenset[int]
    broken: bool = False
    critical_ids: frozenset[int] = frozenset()

    def __post_init__(self):
        n = self.upgraded.n
        if any(not 0 <= i < n for i in self.changed_ids):
            raise IntegrityError("changed_ids outside the upgraded graph")
        if not self.critical_ids <= self.changed_ids:
            raise IntegrityError("critical_ids must be a subset of changed_ids")
        if self.critical_ids and not self.broken:
            raise IntegrityError("non-empty critical set requires broken=True")


def diff_versions(
    base: CallGraph,
    upgraded: CallGraph,
    body_hashes: Mapping[tuple[str, str], HashPair],
) -> UpgradeComparison:
    """Mark upgraded-graph nodes whose bodies differ from the base version.

    ``body_hashes`` maps every (path, name) in either version to its
    (base digest, upgraded digest) pair, with None on the side where the
    function does not exist.
    """
    base_keys = base.keys()
    upgraded_keys = upgraded.keys()
    for key in sorted(base_keys | upgraded_keys):
        pair = body_hashes.get(key)
        if pair is None:
            raise IntegrityError(f"body digest missing for {key!r}")
        if key in base_keys and pair[0] is None:
            raise IntegrityError(f"base digest missing for {key!r}")
        if key in upgraded_keys and pair[1] is None:
            raise IntegrityError(f"upgraded digest missing for {key!r}")

    changed: set[int] = set()
    for node in upgraded.nodes:
        if node.key not in base_keys:
            changed.add(node.id)
            continue
        old, new = body_hashes[node.key]
        if old != new:
            changed.add(node.id)

    # One-hop impact of deletions: former neighbors that survived.
    for key in base_keys - upgraded_keys:
        deleted = base.id_of(*key)
        for nbr in base.neighbors(deleted):
            nbr_key = base.nodes[nbr].key
            survivor = upgraded.id_of(*nbr_key)
            if survivor is not None:
                changed.add(survivor)

    # Criticality is assigned later from diagnostics; stale critical flags
    # in the input document would otherwise conflict with the changed rule.
    nodes = tuple(
        replace(n, changed=n.id in changed, critical=False) for n in upgraded.nodes
    )
    marked = CallGraph(nodes=nodes, edges=upgraded.edges, directed=upgraded.directed)
    return UpgradeComparison(base=base, upgraded=marked, changed_ids=frozenset(changed))


def mark_critical(
    cmp: UpgradeComparison, diagnostics: Sequence[tuple[str, str]]
) -> UpgradeComparison:
    """Flag the functions named by compiler/test diagnostics as critical.

    Named nodes become critical (and changed); a non-empty list marks the
    upgrade broken. Idempotent. Unresolvable names raise listing the
    offender.
    """
    ids = set()
    for path, name in diagnostics:
        node_id = cmp.upgraded.id_of(path, name)
        if node_id is None:
            raise DomainError(f"diagnostic names unknown function ({path!r}, {name!r})")
        ids.add(node_id)
    if not ids:
        return replace(cmp, broken=cmp.broken or False)
    critical = cmp.critical_ids | ids
    nodes = tuple(
        replace(n, critical=n.id in critical, changed=n.changed or n.id in critical)
        for n in cmp.upgraded.nodes
    )
    marked = CallGraph(nodes=nodes, edges=cmp.upgraded.edges, directed=cmp.upgraded.directed)
    return UpgradeComparison(
        base=cmp.base,
        upgraded=marked,
        changed_ids=cmp.changed_ids | critical,
        broken=True,
        critical_ids=frozenset(critical),
    )


def partition_subgraphs(cmp: UpgradeComparison) -> tuple[CallGraph, CallGraph]:
    """Induced (changed, unchanged) subgraphs of the upgraded graph."""
    all_ids = set(range(cmp.upgraded.n))
    changed = induced_subgraph(cmp.upgraded, cmp.changed_ids)
    unchanged = induced_subgraph(cmp.upgraded, all_ids - cmp.changed_ids)
    return changed, unchanged


def cross_partition_edges(cmp: UpgradeComparison) -> int:
    """Edges of the upgraded graph with exactly one changed endpoint."""
    return sum(
        1
        for e in cmp.upgraded.edges
        if (e.source in cmp.changed_ids) != (e.target in cmp.changed_ids)
    )


@dataclass(frozen=True)
class ComparisonTable:
    """Metric columns for a base graph and its upgrade variants.

    Column order: base, then per variant one unchanged and one changed
    column. ``cross_edges`` counts partition-crossing edges per variant.
    """

    labels: tuple[str, ...]
    columns: Mapping[str, MetricsReport]
    cross_edges: Mapping[str, int]

    def rows(self) -> list[tuple[str, list]]:
        out = []
        for title, attr in REPORT_ROWS:
            out.append((title, [getattr(self.columns[c], attr) for c in self.labels]))
        out.append(
            (
                "Cross-partition edges",
                [self.cross_edges.get(c.rsplit("/", 1)[0]) for c in self.labels],
            )
        )
        return out


def _variant_label(cmp: UpgradeComparison, counts: dict[str, int]) -> str:
    stem = "broken" if cmp.broken else "non_broken"
    counts[stem] = counts.get(stem, 0) + 1
    return stem if counts[stem] == 1 else f"{stem}_{counts[stem]}"


def comparison_table(
    base: CallGraph, variants: Iterable[UpgradeComparison]
) -> ComparisonTable:
    """One metrics column for the base, plus unchanged/changed per variant."""
    labels = ["base"]
    columns = {"base": metrics_report(base)}
    cross: dict[str, int] = {}
    counts: dict[str, int] = {}
    for cmp in variants:
        stem = _variant_label(cmp, counts)
        changed, unchanged = partition_subgraphs(cmp)
        columns[f"{stem}/unchanged"] = metrics_report(unchanged)
        columns[f"{stem}/changed"] = metrics_report(changed)
        labels.extend([f"{stem}/unchanged", f"{stem}/changed"])
        cross[stem] = cross_partition_edges(cmp)
    return ComparisonTable(tuple(labels), columns, cross)

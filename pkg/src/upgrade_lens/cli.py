"""Command-line interface: extract | metrics | diff | score | scan.

Every command is deterministic given its inputs and seed, never mutates
its inputs, and writes all artifacts under --out. Errors exit with 2
(parse/integrity), 3 (domain), or 4 (transport); stderr carries one
machine-readable JSON record per error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from pathlib import Path

from .attention import GraphAttentionScorer
from .decomposition import pca_project
from .diffing import ComparisonTable, comparison_table, diff_versions, mark_critical, partition_subgraphs
from .errors import DomainError, IntegrityError, ParseError, TransportError, UpgradeLensError
from .extract import extract_call_graph
from .graph import CallGraph, load_graph, save_graph
from .metrics import (
    REPORT_ROWS,
    MetricsReport,
    betweenness_centrality,
    closeness_centrality,
    clustering_coefficients,
    degree_centrality,
    metrics_report,
)
from .osv import FixtureTransport, LiveTransport, query_osv_batch
from .render import render_histogram_svg, render_scatter_svg
from .sbom import map_vulnerabilities, parse_sbom
from .stats import closeness_histogram, compare_changed_vs_all
from .validation import check_metric_weights

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_DOMAIN = 3
EXIT_TRANSPORT = 4


def _write(path: Path, text: str) -> None:
    path.write_text(text, encoding="utf-8", newline="")


def _write_json(path: Path, payload) -> None:
    _write(path, json.dumps(payload, sort_keys=True, indent=2) + "\n")


def _csv_text(rows) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerows(rows)
    return buffer.getvalue()


def _cell(value) -> str:
    if value is None:
        return "undefined"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _aligned(rows: list[list[str]]) -> str:
    widths = [max(len(r[c]) for r in rows) for c in range(len(rows[0]))]
    lines = []
    for row in rows:
        lines.append("  ".join(cell.ljust(w) for cell, w in zip(row, widths)).rstrip())
    return "\n".join(lines) + "\n"


def _report_dict(report: MetricsReport) -> dict:
    return {
        "n_nodes": report.n_nodes,
        "n_edges": report.n_edges,
        "avg_degree": report.avg_degree,
        "density": report.density,
        "n_components": report.n_components,
        "avg_clustering": report.avg_clustering,
        "assortativity": report.assortativity,
        "avg_betweenness": report.avg_betweenness,
        "avg_betweenness_normalized": report.avg_betweenness_normalized,
        "avg_closeness": report.avg_closeness,
        "cyclomatic": report.cyclomatic,
        "empty": report.empty,
    }


def _load_graph_file(path: str) -> CallGraph:
    return load_graph(Path(path).read_text(encoding="utf-8"))


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _histogram_files(out: Path, stem: str, values: list[float], bins: int, title: str) -> None:
    edges, counts = closeness_histogram(values, bins)
    rows = [("edge", "count")] + [(repr(e), str(c)) for e, c in zip(edges[:-1], counts)]
    _write(out / f"{stem}.csv", _csv_text(rows))
    _write(out / f"{stem}.svg", render_histogram_svg(edges, counts, title))


def cmd_extract(args) -> int:
    out = _out_dir(args)
    graph = extract_call_graph(args.source)
    _write(out / "graph.jsonl", save_graph(graph))
    print(f"extracted {graph.n} functions and {graph.m} calls")
    return EXIT_OK


def cmd_metrics(args) -> int:
    out = _out_dir(args)
    graph = _load_graph_file(args.graph)
    report = metrics_report(graph)
    _write_json(out / "metrics.json", _report_dict(report))
    rows = [["metric", "value"]] + [
        [title, _cell(getattr(report, attr))] for title, attr in REPORT_ROWS
    ]
    _write(out / "metrics.csv", _csv_text(rows))
    _write(out / "metrics.txt", _aligned(rows))

    closeness = closeness_centrality(graph, mode=args.closeness_mode)
    betweenness = betweenness_centrality(graph, normalized=args.normalized_bc)
    degrees = degree_centrality(graph)
    clustering, _ = clustering_coefficients(graph)
    node_rows = [
        ["id", "path", "name", "in_degree", "out_degree", "degree", "closeness", "betweenness", "clustering"]
    ]
    for v in range(graph.n):
        node = graph.nodes[v]
        i_deg, o_deg, t_deg = degrees[v]
        node_rows.append(
            [
                str(v),
                node.path,
                node.name,
                str(i_deg),
                str(o_deg),
                str(t_deg),
                repr(closeness[v]),
                repr(betweenness[v]),
                repr(clustering[v]),
            ]
        )
    _write(out / "nodes.csv", _csv_text(node_rows))
    values = [closeness[v] for v in range(graph.n)]
    _histogram_files(out, "closeness_histogram", values, args.bins, "Closeness centrality")
    print(f"metrics written for {graph.n} nodes, {graph.m} edges")
    return EXIT_OK


def _read_hashes(path: str) -> dict[tuple[str, str], tuple[str | None, str | None]]:
    hashes: dict[tuple[str, str], tuple[str | None, str | None]] = {}
    with open(path, encoding="utf-8", newline="") as handle:
        for rowno, row in enumerate(csv.reader(handle), start=1):
            if not row:
                continue
            if rowno == 1 and row[:2] == ["path", "name"]:
                continue
            if len(row) != 4:
                raise ParseError(f"hash row needs 4 fields, got {row!r}", line=rowno)
            hashes[(row[0], row[1])] = (row[2] or None, row[3] or None)
    return hashes


def _read_diagnostics(path: str | None) -> list[tuple[str, str]]:
    if path is None:
        return []
    diagnostics = []
    with open(path, encoding="utf-8", newline="") as handle:
        for rowno, row in enumerate(csv.reader(handle), start=1):
            if not row:
                continue
            if rowno == 1 and row[:2] == ["path", "name"]:
                continue
            if len(row) < 2:
                raise ParseError(f"diagnostic row needs path,name[,message], got {row!r}", line=rowno)
            diagnostics.append((row[0], row[1]))
    return diagnostics


def _table_rows(table: ComparisonTable) -> list[list[str]]:
    header = ["metric", *table.labels]
    rows = [header]
    for title, values in table.rows():
        rows.append([title, *[_cell(v) for v in values]])
    return rows


def cmd_diff(args) -> int:
    out = _out_dir(args)
    base = _load_graph_file(args.base)
    upgraded = _load_graph_file(args.upgraded)
    hashes = _read_hashes(args.hashes)
    diagnostics = _read_diagnostics(args.diagnostics)
    cmp = diff_versions(base, upgraded, hashes)
    cmp = mark_critical(cmp, diagnostics)
    table = comparison_table(base, [cmp])
    rows = _table_rows(table)
    _write(out / "comparison.csv", _csv_text(rows))
    _write(out / "comparison.txt", _aligned(rows))
    _write_json(
        out / "comparison.json",
        {
            "columns": {label: _report_dict(table.columns[label]) for label in table.labels},
            "cross_partition_edges": dict(table.cross_edges),
            "broken": cmp.broken,
            "changed_ids": sorted(cmp.changed_ids),
            "critical_ids": sorted(cmp.critical_ids),
        },
    )
    changed, unchanged = partition_subgraphs(cmp)
    _write(out / "marked.jsonl", save_graph(cmp.upgraded))
    _write(out / "changed.jsonl", save_graph(changed))
    _write(out / "unchanged.jsonl", save_graph(unchanged))

    if len(cmp.changed_ids) >= 2:
        welch, ks = compare_changed_vs_all(cmp)
        stats_payload = {
            "welch_t": {"statistic": welch.statistic, "p_value": welch.p_value,
                        "n_a": welch.n_a, "n_b": welch.n_b},
            "ks_two_sample": {"statistic": ks.statistic, "p_value": ks.p_value,
                              "n_a": ks.n_a, "n_b": ks.n_b},
        }
    else:
        stats_payload = {"skipped": "fewer than 2 changed nodes"}
    _write_json(out / "stats.json", stats_payload)

    closeness = closeness_centrality(cmp.upgraded)
    all_values = [closeness[v] for v in range(cmp.upgraded.n)]
    changed_values = [closeness[v] for v in sorted(cmp.changed_ids)]
    unchanged_values = [closeness[v] for v in range(cmp.upgraded.n) if v not in cmp.changed_ids]
    _histogram_files(out, "closeness_all", all_values, args.bins, "Closeness centrality: all nodes")
    _histogram_files(out, "closeness_changed", changed_values, args.bins, "Closeness centrality: changed nodes")
    _histogram_files(out, "closeness_unchanged", unchanged_values, args.bins, "Closeness centrality: unchanged nodes")
    print(f"diff written: {len(cmp.changed_ids)} changed, {cmp.upgraded.n - len(cmp.changed_ids)} unchanged")
    return EXIT_OK


def cmd_score(args) -> int:
    out = _out_dir(args)
    graph = _load_graph_file(args.graph)
    weights = check_metric_weights([float(p) for p in args.weights.split(",")])
    scorer = GraphAttentionScorer(metric_weights=weights, seed=args.seed)
    scorer.fit(graph)
    report = scorer.score_report(graph)
    rows = [["id", "path", "name", "score", "critical"]]
    for v in range(graph.n):
        node = graph.nodes[v]
        rows.append([str(v), node.path, node.name, repr(report.scores[v]), str(node.critical).lower()])
    _write(out / "scores.csv", _csv_text(rows))
    summary = {
        "critical_count": report.summary.critical_count,
        "max_critical_score": report.summary.max_critical_score,
        "min_critical_score": report.summary.min_critical_score,
        "avg_critical_score": report.summary.avg_critical_score,
        "avg_score": report.summary.avg_score,
    }
    _write_json(out / "summary.json", summary)
    text_rows = [["statistic", "value"]] + [[k, _cell(v)] for k, v in summary.items()]
    _write(out / "summary.txt", _aligned(text_rows))

    critical_ids = [n.id for n in graph.nodes if n.critical]
    if graph.n >= 2:
        embeddings = scorer.transform(graph)
        projected = pca_project(embeddings, 2)
        pca_rows = [["id", "x", "y"]] + [
            [str(v), repr(float(projected[v, 0])), repr(float(projected[v, 1]))]
            for v in range(graph.n)
        ]
        points = [(float(projected[v, 0]), float(projected[v, 1])) for v in range(graph.n)]
    else:
        pca_rows = [["id", "x", "y"]]
        points = []
    _write(out / "pca.csv", _csv_text(pca_rows))
    _write(out / "scatter.svg", render_scatter_svg(points, critical_ids, "Embedding projection"))
    print(f"scores written for {graph.n} nodes")
    return EXIT_OK


def cmd_scan(args) -> int:
    out = _out_dir(args)
    document = Path(args.sbom).read_text(encoding="utf-8")
    packages = parse_sbom(document)
    if args.transport == "fixture":
        if not args.fixtures:
            raise DomainError("--transport fixture requires --fixtures DIR")
        transport = FixtureTransport(args.fixtures)
    else:
        transport = LiveTransport()
    records = query_osv_batch(packages, transport)
    plans = map_vulnerabilities(packages, records)
    payload = [
        {
            "package": {
                "name": plan.package.name,
                "version": plan.package.version,
                "ecosystem": plan.package.ecosystem,
                "purl": plan.package.purl,
            },
            "vulnerabilities": [
                {
                    "id": v.id,
                    "fixed_version": v.fixed_version,
                    "summary": v.summary,
                    "ranges": [
                        {"introduced": r.introduced, "fixed": r.fixed}
                        for r in v.affected_ranges
                    ],
                }
                for v in plan.vulnerabilities
            ],
            "target_version": plan.target_version,
            "no_fix": plan.no_fix,
            "diagnostics": list(plan.diagnostics),
        }
        for plan in plans
    ]
    _write_json(out / "remediation.json", payload)
    rows = [["package", "version", "ecosystem", "target_version", "no_fix", "vulnerabilities"]]
    for plan in plans:
        rows.append(
            [
                plan.package.name,
                plan.package.version,
                plan.package.ecosystem,
                plan.target_version or "",
                str(plan.no_fix).lower(),
                ";".join(v.id for v in plan.vulnerabilities),
            ]
        )
    _write(out / "remediation.csv", _csv_text(rows))
    _write(out / "remediation.txt", _aligned(rows))
    print(f"scan finished: {len(plans)} vulnerable of {len(packages)} packages")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="upgrade-lens",
        description="Profile dependency upgrades through call-graph analysis",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_extract = sub.add_parser("extract", help="extract a call graph from a Python source tree")
    p_extract.add_argument("source")
    p_extract.add_argument("--out", required=True)
    p_extract.set_defaults(func=cmd_extract)

    p_metrics = sub.add_parser("metrics", help="compute the metric report for a graph file")
    p_metrics.add_argument("graph")
    p_metrics.add_argument("--out", required=True)
    p_metrics.add_argument("--bins", type=int, default=50)
    p_metrics.add_argument("--normalized-bc", action="store_true")
    p_metrics.add_argument(
        "--closeness-mode", choices=("undirected", "in", "out"), default="undirected"
    )
    p_metrics.set_defaults(func=cmd_metrics)

    p_diff = sub.add_parser("diff", help="compare base and upgraded graphs")
    p_diff.add_argument("base")
    p_diff.add_argument("upgraded")
    p_diff.add_argument("--hashes", required=True)
    p_diff.add_argument("--diagnostics")
    p_diff.add_argument("--out", required=True)
    p_diff.add_argument("--bins", type=int, default=50)
    p_diff.set_defaults(func=cmd_diff)

    p_score = sub.add_parser("score", help="attention-based node importance scores")
    p_score.add_argument("graph")
    p_score.add_argument("--out", required=True)
    p_score.add_argument("--weights", default="1,1,1")
    p_score.add_argument("--seed", type=int, default=42)
    p_score.set_defaults(func=cmd_score)

    p_scan = sub.add_parser("scan", help="map SBOM packages to known vulnerabilities")
    p_scan.add_argument("sbom")
    p_scan.add_argument("--out", required=True)
    p_scan.add_argument("--transport", choices=("live", "fixture"), default="live")
    p_scan.add_argument("--fixtures")
    p_scan.set_defaults(func=cmd_scan)
    return parser


def _error_record(kind: str, exc: Exception) -> None:
    print(json.dumps({"error": kind, "message": str(exc)}, sort_keys=True), file=sys.stderr)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ParseError as exc:
        _error_record("parse", exc)
        return EXIT_PARSE
    except IntegrityError as exc:
        _error_record("integrity", exc)
        return EXIT_PARSE
    except DomainError as exc:
        _error_record("domain", exc)
        return EXIT_DOMAIN
    except TransportError as exc:
        _error_record("transport", exc)
        return EXIT_TRANSPORT
    except UpgradeLensError as exc:  # pragma: no cover - safety net
        _error_record("error", exc)
        return EXIT_PARSE
    except OSError as exc:
        _error_record("io", exc)
        return EXIT_PARSE


if __name__ == "__main__":
    sys.exit(main())

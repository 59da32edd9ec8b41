"""Centrality-weighted graph attention scoring.

A single attention layer over the call graph: node features are linearly
transformed, per-edge coefficients come from a LeakyReLU-scored softmax
over each caller's callees, and every coefficient is multiplied by a
centrality factor blending degree, feature norm, and closeness of the
edge endpoints. A node's importance is the total weighted attention it
receives, min-max normalized to [0, 1].

Default parameters (identity transform, all-ones attention vector) make
scoring fully deterministic without training. Optional training fits the
transform and attention vector by gradient descent on an edge
reconstruction loss with seeded negative sampling.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Sequence

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.exceptions import NotFittedError

from .errors import DomainError
from .graph import CallGraph
from .metrics import (
    betweenness_centrality,
    closeness_centrality,
    degree_centrality,
    clustering_coefficients,
)
from .validation import (
    check_call_graph,
    check_feature_matrix,
    check_metric_weights,
    check_node_ids,
)

FEATURE_COLUMNS = (
    "in_degree",
    "out_degree",
    "total_degree",
    "closeness",
    "betweenness",
    "clustering",
    "changed",
    "vulnerable",
)

Edge = tuple[int, int]

_MASK64 = (1 << 64) - 1


def splitmix64(seed: int) -> Iterator[int]:
    """Deterministic 64-bit stream used for negative sampling."""
    x = seed & _MASK64
    while True:
        x = (x + 0x9E3779B97F4A7C15) & _MASK64
        z = x
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
        yield z ^ (z >> 31)


def _minmax(column: np.ndarray) -> np.ndarray:
    lo = column.min()
    hi = column.max()
    if hi == lo:
        return np.zeros_like(column)
    return (column - lo) / (hi - lo)


def _minmax_neutral(column: np.ndarray) -> np.ndarray:
    # Degenerate columns take the uninformative midpoint rather than 0; a
    # zero here would annihilate every attention product on symmetric graphs.
    lo = column.min()
    hi = column.max()
    if hi == lo:
        return np.full_like(column, 0.5)
    return (column - lo) / (hi - lo)


def build_features(g: CallGraph) -> np.ndarray:
    """Per-node feature matrix, one row per node, columns FEATURE_COLUMNS.

    Metric columns are min-max normalized over the graph; constant
    columns map to 0. Flag columns are already 0/1.
    """
    check_call_graph(g)
    if g.n < 1:
        raise DomainError("feature matrix needs at least one node")
    degrees = degree_centrality(g)
    closeness = closeness_centrality(g)
    betweenness = betweenness_centrality(g)
    clustering, _ = clustering_coefficients(g)
    raw = np.zeros((g.n, len(FEATURE_COLUMNS)))
    for v in range(g.n):
        i_deg, o_deg, t_deg = degrees[v]
        node = g.nodes[v]
        raw[v] = (
            i_deg,
            o_deg,
            t_deg,
            closeness[v],
            betweenness[v],
            clustering[v],
            float(node.changed),
            float(node.vulnerable),
        )
    out = np.empty_like(raw)
    for c in range(6):
        out[:, c] = _minmax(raw[:, c])
    out[:, 6:] = raw[:, 6:]
    return out


def centrality_edge_weights(
    g: CallGraph,
    features: np.ndarray,
    weights: Sequence[float] = (1.0, 1.0, 1.0),
) -> dict[Edge, float]:
    """Per-edge centrality factor in [0, 1].

    Each node gets a composite score: the convex combination (by the
    given degree/norm/closeness weights) of its min-max-normalized total
    degree, feature-row norm, and closeness. An edge's factor is the mean
    of its endpoint scores.
    """
    check_call_graph(g)
    features = check_feature_matrix(features, n_rows=g.n)
    w_d, w_n, w_c = check_metric_weights(weights)
    degrees = degree_centrality(g)
    closeness = closeness_centrality(g)
    d_hat = _minmax_neutral(np.array([float(degrees[v][2]) for v in range(g.n)]))
    c_hat = _minmax_neutral(np.array([closeness[v] for v in range(g.n)]))
    n_hat = _minmax_neutral(np.sqrt((features * features).sum(axis=1)))
    # exact-rational normalization keeps the convex weights, and through them
    # every factor, bitwise invariant under scaling of the weight triple
    total = Fraction(w_d) + Fraction(w_n) + Fraction(w_c)
    f_d, f_n, f_c = (float(Fraction(w) / total) for w in (w_d, w_n, w_c))
    s = np.clip(f_d * d_hat + f_n * n_hat + f_c * c_hat, 0.0, 1.0)
    return {(e.source, e.target): (s[e.source] + s[e.target]) / 2.0 for e in g.edges}


@dataclass(frozen=True)
class AttentionParams:
    """Learnable layer parameters: linear transform and attention vector."""

    transform: np.ndarray  # (out_dim, n_features)
    attention: np.ndarray  # (2 * out_dim,)
    leaky_slope: float = 0.2

    @property
    def out_dim(self) -> int:
        return self.transform.shape[0]


def default_params(n_features: int, out_dim: int | None = None, leaky_slope: float = 0.2) -> AttentionParams:
    """Deterministic parameters: (truncated) identity transform, all-ones vector."""
    out = n_features if out_dim is None else out_dim
    return AttentionParams(
        transform=np.eye(out, n_features),
        attention=np.ones(2 * out),
        leaky_slope=leaky_slope,
    )


@dataclass(frozen=True)
class AttentionMap:
    """Per-edge attention values.

    ``coefficients`` are softmax-normalized per caller (rows sum to 1 over
    each caller's callees); ``centrality_factors`` are the [0, 1] edge
    factors; ``weighted`` is their elementwise product, so every weighted
    value is bounded by its coefficient.
    """

    coefficients: dict[Edge, float]
    centrality_factors: dict[Edge, float]
    weighted: dict[Edge, float]


def _edge_arrays(g: CallGraph) -> tuple[np.ndarray, np.ndarray, list[tuple[int, int]]]:
    """Edge endpoints plus contiguous [start, end) slices grouped by source.

    Relies on edges being stored sorted by (source, target).
    """
    src = np.array([e.source for e in g.edges], dtype=np.intp)
    dst = np.array([e.target for e in g.edges], dtype=np.intp)
    groups = []
    start = 0
    for k in range(1, len(src) + 1):
        if k == len(src) or src[k] != src[start]:
            groups.append((start, k))
            start = k
    return src, dst, groups


def _edge_scores(
    z: np.ndarray, src: np.ndarray, dst: np.ndarray, params: AttentionParams
) -> tuple[np.ndarray, np.ndarray]:
    half = params.out_dim
    a_src = params.attention[:half]
    a_dst = params.attention[half:]
    u = z[src] @ a_src + z[dst] @ a_dst
    e = np.where(u > 0, u, params.leaky_slope * u)
    return u, e


def _softmax_groups(e: np.ndarray, groups: list[tuple[int, int]]) -> np.ndarray:
    alpha = np.empty_like(e)
    for start, end in groups:
        seg = e[start:end]
        shifted = np.exp(seg - seg.max())
        alpha[start:end] = shifted / shifted.sum()
    return alpha


def attention_coefficients(
    g: CallGraph,
    features: np.ndarray,
    params: AttentionParams,
    edge_weights: dict[Edge, float],
) -> AttentionMap:
    """Softmax attention per caller, scaled by the centrality factors.

    Callers with no callees simply emit no coefficients. The softmax is
    computed with max-subtraction so large scores cannot overflow.
    """
    check_call_graph(g)
    features = check_feature_matrix(features, n_rows=g.n)
    if params.transform.shape[1] != features.shape[1]:
        raise DomainError(
            f"transform expects {params.transform.shape[1]} features, matrix has {features.shape[1]}"
        )
    if params.attention.shape != (2 * params.out_dim,):
        raise DomainError("attention vector must have length 2 * out_dim")
    if not g.edges:
        return AttentionMap({}, {}, {})
    z = features @ params.transform.T
    src, dst, groups = _edge_arrays(g)
    _, e = _edge_scores(z, src, dst, params)
    alpha = _softmax_groups(e, groups)
    coefficients = {}
    factors = {}
    weighted = {}
    for idx, edge in enumerate(g.edges):
        key = (edge.source, edge.target)
        coefficients[key] = float(alpha[idx])
        factor = edge_weights[key]
        factors[key] = float(factor)
        weighted[key] = float(alpha[idx] * factor)
    return AttentionMap(coefficients, factors, weighted)


def aggregate(
    g: CallGraph,
    features: np.ndarray,
    params: AttentionParams,
    att: AttentionMap,
) -> np.ndarray:
    """New node representations: ELU of the weighted neighbor sum.

    Nodes with no callees aggregate nothing and get a zero row (ELU(0)).
    """
    check_call_graph(g)
    features = check_feature_matrix(features, n_rows=g.n)
    z = features @ params.transform.T
    acc = np.zeros((g.n, params.out_dim))
    for (s, t), w in att.weighted.items():
        acc[s] += w * z[t]
    return np.where(acc > 0, acc, np.expm1(acc))


@dataclass(frozen=True)
class ScoreSummary:
    """Headline statistics of a scoring run.

    The critical-score fields are None when no critical functions exist.
    """

    critical_count: int
    max_critical_score: float | None
    min_critical_score: float | None
    avg_critical_score: float | None
    avg_score: float


@dataclass(frozen=True)
class NodeScores:
    scores: dict[int, float]
    summary: ScoreSummary


def node_scores(g: CallGraph, att: AttentionMap, critical: Sequence[int] = ()) -> NodeScores:
    """Importance in [0, 1]: min-max-normalized total attention received.

    When every node receives the same raw attention the normalization is
    degenerate and all scores are the 0.5 sentinel.
    """
    check_call_graph(g)
    critical_ids = check_node_ids(g, critical, what="critical id")
    raw = np.zeros(g.n)
    for (_, t), w in att.weighted.items():
        raw[t] += w
    if g.n == 0:
        return NodeScores({}, ScoreSummary(0, None, None, None, 0.0))
    lo, hi = raw.min(), raw.max()
    if hi == lo:
        scores = {v: 0.5 for v in range(g.n)}
    else:
        scores = {v: float((raw[v] - lo) / (hi - lo)) for v in range(g.n)}
    avg_score = sum(scores.values()) / g.n
    if critical_ids:
        crit = [scores[v] for v in sorted(critical_ids)]
        summary = ScoreSummary(
            critical_count=len(crit),
            max_critical_score=max(crit),
            min_critical_score=min(crit),
            avg_critical_score=sum(crit) / len(crit),
            avg_score=avg_score,
        )
    else:
        summary = ScoreSummary(0, None, None, None, avg_score)
    return NodeScores(scores, summary)


@dataclass(frozen=True)
class TrainingConfig:
    epochs: int = 100
    learning_rate: float = 0.05
    negative_samples: int = 1
    seed: int = 42


def negative_pairs(g: CallGraph, config: TrainingConfig) -> list[Edge]:
    """Seeded corrupted pairs: for each edge, ``negative_samples`` random targets."""
    stream = splitmix64(config.seed)
    pairs = []
    for e in g.edges:
        for _ in range(config.negative_samples):
            pairs.append((e.source, next(stream) % g.n))
    return pairs


def _softplus(x: float) -> float:
    if x > 0:
        return x + math.log1p(math.exp(-x))
    return math.log1p(math.exp(x))


def _forward(
    g: CallGraph,
    features: np.ndarray,
    params: AttentionParams,
    factors: np.ndarray,
    src: np.ndarray,
    dst: np.ndarray,
    groups: list[tuple[int, int]],
):
    z = features @ params.transform.T
    u, e = _edge_scores(z, src, dst, params)
    alpha = _softmax_groups(e, groups)
    weighted = alpha * factors
    acc = np.zeros((g.n, params.out_dim))
    np.add.at(acc, src, weighted[:, None] * z[dst])
    emb = np.where(acc > 0, acc, np.expm1(acc))
    return z, u, alpha, weighted, acc, emb


def reconstruction_loss(
    g: CallGraph,
    features: np.ndarray,
    params: AttentionParams,
    negatives: Sequence[Edge],
) -> float:
    """Edge reconstruction objective the trainer minimizes.

    Positive edges contribute -log sigmoid(h_i . h_j); negative pairs
    contribute -log(1 - sigmoid(h_i . h_k)).
    """
    features = check_feature_matrix(features, n_rows=g.n)
    src, dst, groups = _edge_arrays(g)
    factor_map = centrality_edge_weights(g, features)
    factors = np.array([factor_map[(e.source, e.target)] for e in g.edges])
    *_, emb = _forward(g, features, params, factors, src, dst, groups)
    loss = 0.0
    for i, j in zip(src, dst):
        loss += _softplus(-float(emb[i] @ emb[j]))
    for i, k in negatives:
        loss += _softplus(float(emb[i] @ emb[k]))
    return loss


def _gradients(
    g: CallGraph,
    features: np.ndarray,
    params: AttentionParams,
    factors: np.ndarray,
    negatives: Sequence[Edge],
    src: np.ndarray,
    dst: np.ndarray,
    groups: list[tuple[int, int]],
) -> tuple[float, np.ndarray, np.ndarray]:
    """Loss plus analytic gradients w.r.t. the transform and attention vector."""
    z, u, alpha, weighted, acc, emb = _forward(g, features, params, factors, src, dst, groups)
    n, half = g.n, params.out_dim

    loss = 0.0
    d_emb = np.zeros_like(emb)
    for i, j in zip(src, dst):
        d = float(emb[i] @ emb[j])
        loss += _softplus(-d)
        grad = 1.0 / (1.0 + math.exp(-d)) - 1.0  # sigmoid(d) - 1
        d_emb[i] += grad * emb[j]
        d_emb[j] += grad * emb[i]
    for i, k in negatives:
        d = float(emb[i] @ emb[k])
        loss += _softplus(d)
        grad = 1.0 / (1.0 + math.exp(-d))
        d_emb[i] += grad * emb[k]
        d_emb[k] += grad * emb[i]

    # ELU'(x) is 1 for x > 0 and exp(x) otherwise.
    d_acc = d_emb * np.where(acc > 0, 1.0, np.exp(acc))

    d_z = np.zeros_like(z)
    d_weighted = (d_acc[src] * z[dst]).sum(axis=1)
    np.add.at(d_z, dst, weighted[:, None] * d_acc[src])

    d_alpha = factors * d_weighted
    d_e = np.empty_like(d_alpha)
    for start, end in groups:
        a_seg = alpha[start:end]
        g_seg = d_alpha[start:end]
        d_e[start:end] = a_seg * (g_seg - float(a_seg @ g_seg))
    d_u = d_e * np.where(u > 0, 1.0, params.leaky_slope)

    a_src = params.attention[:half]
    a_dst = params.attention[half:]
    d_a = np.concatenate([d_u @ z[src], d_u @ z[dst]])
    np.add.at(d_z, src, d_u[:, None] * a_src)
    np.add.at(d_z, dst, d_u[:, None] * a_dst)

    d_transform = d_z.T @ features
    return loss, d_transform, d_a


def train_attention(
    g: CallGraph, features: np.ndarray, config: TrainingConfig
) -> AttentionParams:
    """Gradient descent from the deterministic defaults.

    Negative pairs are drawn once up front, so the objective is fixed; a
    step that would raise the loss is retried with a halved rate, keeping
    the loss non-increasing. Fully deterministic for a given seed.
    """
    check_call_graph(g)
    features = check_feature_matrix(features, n_rows=g.n)
    if g.n < 2 or g.m < 1:
        raise DomainError("training needs at least 2 nodes and 1 edge")
    params = default_params(features.shape[1])
    if config.epochs == 0:
        return params
    negatives = negative_pairs(g, config)
    src, dst, groups = _edge_arrays(g)
    factor_map = centrality_edge_weights(g, features)
    factors = np.array([factor_map[(e.source, e.target)] for e in g.edges])

    transform = params.transform.copy()
    attention = params.attention.copy()
    rate = config.learning_rate
    current = AttentionParams(transform, attention, params.leaky_slope)
    loss, d_t, d_a = _gradients(g, features, current, factors, negatives, src, dst, groups)
    for _ in range(config.epochs):
        while rate > 1e-12:
            cand = AttentionParams(
                transform - rate * d_t, attention - rate * d_a, params.leaky_slope
            )
            cand_loss, cand_dt, cand_da = _gradients(
                g, features, cand, factors, negatives, src, dst, groups
            )
            if cand_loss <= loss:
                break
            rate *= 0.5
        else:
            break
        transform, attention = cand.transform, cand.attention
        loss, d_t, d_a = cand_loss, cand_dt, cand_da
    return AttentionParams(transform, attention, params.leaky_slope)


class GraphAttentionScorer(BaseEstimator):
    """Estimator wrapper: fit attention parameters, then score any graph.

    With ``epochs=0`` (the default) fitting installs the deterministic
    identity parameters, so scoring is reproducible without training.
    """

    def __init__(
        self,
        metric_weights: Sequence[float] = (1.0, 1.0, 1.0),
        leaky_slope: float = 0.2,
        epochs: int = 0,
        learning_rate: float = 0.05,
        negative_samples: int = 1,
        seed: int = 42,
    ):
        self.metric_weights = metric_weights
        self.leaky_slope = leaky_slope
        self.epochs = epochs
        self.learning_rate = learning_rate
        self.negative_samples = negative_samples
        self.seed = seed

    def fit(self, graph: CallGraph, y=None):
        check_call_graph(graph)
        check_metric_weights(self.metric_weights)
        features = build_features(graph)
        if self.epochs > 0:
            config = TrainingConfig(
                epochs=self.epochs,
                learning_rate=self.learning_rate,
                negative_samples=self.negative_samples,
                seed=self.seed,
            )
            self.params_ = train_attention(graph, features, config)
        else:
            self.params_ = default_params(features.shape[1], leaky_slope=self.leaky_slope)
        self.n_features_ = features.shape[1]
        return self

    def _check_fitted(self):
        if not hasattr(self, "params_"):
            raise NotFittedError("call fit before transform/predict")

    def attention_map(self, graph: CallGraph) -> AttentionMap:
        self._check_fitted()
        features = build_features(graph)
        weights = centrality_edge_weights(graph, features, self.metric_weights)
        return attention_coefficients(graph, features, self.params_, weights)

    def transform(self, graph: CallGraph) -> np.ndarray:
        """Node embeddings for ``graph`` under the fitted parameters."""
        self._check_fitted()
        features = build_features(graph)
        weights = centrality_edge_weights(graph, features, self.metric_weights)
        att = attention_coefficients(graph, features, self.params_, weights)
        return aggregate(graph, features, self.params_, att)

    def predict(self, graph: CallGraph) -> np.ndarray:
        """Importance scores in [0, 1], indexed by node id."""
        report = self.score_report(graph)
        return np.array([report.scores[v] for v in range(graph.n)])

    def score_report(self, graph: CallGraph, critical: Sequence[int] | None = None) -> NodeScores:
        """Scores plus summary; critical ids default to the graph's flags."""
        att = self.attention_map(graph)
        if critical is None:
            critical = [n.id for n in graph.nodes if n.critical]
        return node_scores(graph, att, critical)

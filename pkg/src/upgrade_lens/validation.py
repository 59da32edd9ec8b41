"""Input validation helpers used across the public API."""

from __future__ import annotations

import math
from collections.abc import Iterable, Sequence

import numpy as np

from .errors import DomainError


def check_call_graph(g) -> None:
    from .graph import CallGraph

    if not isinstance(g, CallGraph):
        raise TypeError(f"expected a CallGraph, got {type(g).__name__}")


def check_node_ids(g, ids: Iterable[int], what: str = "node id") -> frozenset[int]:
    """Validate that every id exists in ``g`` and return them as a frozenset."""
    ids = frozenset(ids)
    unknown = sorted(i for i in ids if not (0 <= i < g.n))
    if unknown:
        raise DomainError(f"unknown {what}(s): {unknown}")
    return ids


def check_sample(values: Sequence[float], min_size: int, name: str) -> list[float]:
    out = [float(v) for v in values]
    if len(out) < min_size:
        raise DomainError(f"sample {name!r} needs at least {min_size} values, got {len(out)}")
    for v in out:
        if math.isnan(v) or math.isinf(v):
            raise DomainError(f"sample {name!r} contains a non-finite value")
    return out


def check_metric_weights(weights: Sequence[float]) -> tuple[float, float, float]:
    """Validate the (degree, norm, closeness) weight triple: non-negative, not all zero."""
    w = tuple(float(x) for x in weights)
    if len(w) != 3:
        raise DomainError(f"expected 3 metric weights, got {len(w)}")
    if any(x < 0 for x in w):
        raise DomainError(f"metric weights must be non-negative, got {w}")
    if sum(w) == 0:
        raise DomainError("metric weights must not all be zero")
    return w  # type: ignore[return-value]


def check_feature_matrix(X, n_rows: int | None = None) -> np.ndarray:
    """Coerce to a 2-D float64 array with finite entries."""
    arr = np.asarray(X, dtype=np.float64)
    if arr.ndim != 2:
        raise DomainError(f"expected a 2-D matrix, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise DomainError("matrix contains non-finite entries")
    if n_rows is not None and arr.shape[0] != n_rows:
        raise DomainError(f"expected {n_rows} rows, got {arr.shape[0]}")
    return arr

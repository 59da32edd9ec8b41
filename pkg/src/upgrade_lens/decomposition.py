"""Principal component projection via iterated deflation.

The covariance matrix is eigendecomposed by power iteration: find the
dominant eigenvector, subtract its rank-one contribution, repeat. Each
component's sign is fixed by making its largest-magnitude loading
positive, so projections are reproducible across runs and platforms.
"""

from __future__ import annotations

import warnings

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.exceptions import NotFittedError

from .attention import splitmix64
from .errors import DomainError
from .validation import check_feature_matrix

_START_SEED = 0x5EEDD

# Relative eigenvalue floor below which the spectrum counts as exhausted.
_RANK_EPS = 1e-12


def _start_vector(dim: int) -> np.ndarray:
    stream = splitmix64(_START_SEED)
    v = np.array([next(stream) / float(1 << 64) - 0.5 for _ in range(dim)])
    norm = np.linalg.norm(v)
    return v / norm


def _dominant_eigenpair(
    matrix: np.ndarray, basis: list[np.ndarray], tol: float, max_iter: int
) -> tuple[float, np.ndarray]:
    """Largest remaining eigenpair, kept orthogonal to the found basis."""
    dim = matrix.shape[0]
    v = _start_vector(dim)
    for b in basis:
        v -= (v @ b) * b
    norm = np.linalg.norm(v)
    if norm == 0.0:
        return 0.0, np.zeros(dim)
    v /= norm
    for _ in range(max_iter):
        w = matrix @ v
        for b in basis:
            w -= (w @ b) * b
        norm = np.linalg.norm(w)
        if norm == 0.0:
            return 0.0, np.zeros(dim)
        w /= norm
        if min(np.linalg.norm(w - v), np.linalg.norm(w + v)) < tol:
            v = w
            break
        v = w
    return float(v @ matrix @ v), v


def _fix_sign(v: np.ndarray) -> np.ndarray:
    if v.any() and v[np.argmax(np.abs(v))] < 0:
        return -v
    return v


class PrincipalComponents(BaseEstimator, TransformerMixin):
    """PCA with a from-scratch symmetric eigendecomposition.

    Components beyond the data rank are zero rows (with a rank warning at
    fit time), so their projected coordinates are identically zero.
    """

    def __init__(self, n_components: int = 2, tol: float = 1e-10, max_iter: int = 10000):
        self.n_components = n_components
        self.tol = tol
        self.max_iter = max_iter

    def fit(self, X, y=None):
        X = check_feature_matrix(X)
        n, dim = X.shape
        if n < 2:
            raise DomainError("need at least 2 rows to fit principal components")
        if not 1 <= self.n_components <= dim:
            raise DomainError(
                f"n_components must be in [1, {dim}], got {self.n_components}"
            )
        self.mean_ = X.mean(axis=0)
        centered = X - self.mean_
        cov = centered.T @ centered / (n - 1)
        components = []
        variances = []
        basis: list[np.ndarray] = []
        remaining = cov.copy()
        top = None
        rank_hit = False
        for _ in range(self.n_components):
            lam, v = _dominant_eigenpair(remaining, basis, self.tol, self.max_iter)
            if top is None:
                top = lam
            if lam <= _RANK_EPS * max(top, 1.0):
                rank_hit = True
                components.append(np.zeros(dim))
                variances.append(0.0)
                continue
            basis.append(v)
            components.append(_fix_sign(v))
            variances.append(lam)
            remaining = remaining - lam * np.outer(v, v)
        if rank_hit:
            warnings.warn(
                "requested more components than the data rank; trailing components are zero",
                RuntimeWarning,
                stacklevel=2,
            )
        self.components_ = np.array(components)
        self.explained_variance_ = np.array(variances)
        return self

    def transform(self, X) -> np.ndarray:
        if not hasattr(self, "components_"):
            raise NotFittedError("call fit before transform")
        X = check_feature_matrix(X)
        return (X - self.mean_) @ self.components_.T


def pca_project(embeddings, k: int) -> np.ndarray:
    """Project rows onto the top-k principal components."""
    X = check_feature_matrix(embeddings)
    if X.shape[0] < 2:
        raise DomainError("projection needs at least 2 rows")
    if not 1 <= k <= X.shape[1]:
        raise DomainError(f"k must be in [1, {X.shape[1]}], got {k}")
    return PrincipalComponents(n_components=k).fit(X).transform(X)

"""Embedding stage: PCA folded into a trainable linear projection, plus
k-means++ initialization of the cluster centers.

Everything here is a pure function of its inputs and an explicit seed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import FeatureMatrix, InvariantError, LabelVector, _frozen


@dataclass(frozen=True)
class PcaModel:
    """Top principal components of a feature matrix.

    ``components`` is D x K' with orthonormal columns; ``explained_variance``
    holds the matching eigenvalues in decreasing order.
    """

    mean: np.ndarray
    components: np.ndarray
    explained_variance: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "mean", _frozen(self.mean))
        object.__setattr__(self, "components", _frozen(self.components))
        object.__setattr__(self, "explained_variance", _frozen(self.explained_variance))
        gram = self.components.T @ self.components
        if not np.allclose(gram, np.eye(self.components.shape[1]), atol=1e-8):
            raise InvariantError("PCA components are not orthonormal")
        ev = self.explained_variance
        if np.any(ev < 0) or np.any(np.diff(ev) > 0):
            raise InvariantError("explained_variance must be non-negative and decreasing")


def _as_array(x) -> np.ndarray:
    return x.data if isinstance(x, FeatureMatrix) else np.asarray(x, dtype=np.float64)


def pca_fit(x, target_dim: int) -> PcaModel:
    """Eigendecomposition of the sample covariance, top ``target_dim`` axes.

    Components are sign-canonicalized so each one's largest-magnitude entry
    is positive, making the fit deterministic.
    """
    a = _as_array(x)
    n, d = a.shape
    if not 1 <= target_dim <= min(n - 1, d):
        raise ValueError(f"target_dim {target_dim} must lie in [1, min(N-1={n - 1}, D={d})]")
    mean = a.mean(axis=0)
    centered = a - mean
    cov = centered.T @ centered / (n - 1)
    eigval, eigvec = np.linalg.eigh(cov)
    order = np.argsort(eigval)[::-1][:target_dim]
    comps = eigvec[:, order]
    ev = np.clip(eigval[order], 0.0, None)
    # sign canonicalization: largest-|entry| of each component made positive
    anchor = np.argmax(np.abs(comps), axis=0)
    signs = np.sign(comps[anchor, np.arange(comps.shape[1])])
    signs[signs == 0] = 1.0
    comps = comps * signs
    return PcaModel(mean=mean, components=comps, explained_variance=ev)


def init_projection(p: PcaModel) -> tuple[np.ndarray, np.ndarray]:
    """Fold the PCA into linear-layer parameters (W, b) with embed(x) = x@W - b."""
    w = np.array(p.components)
    b = p.mean @ w
    return w, b


def project(x, w: np.ndarray, b: np.ndarray) -> np.ndarray:
    return _as_array(x) @ w - b


def projection_gradients(x, state, upstream: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Gradients of the loss w.r.t. (W, b) given d(loss)/d(embedded points).

    embed(x) = x@W - b, so dW = x^T @ upstream and db is the negated
    column-sum of upstream.
    """
    a = _as_array(x)
    upstream = np.asarray(upstream, dtype=np.float64)
    w = state.projection_weights
    if upstream.shape != (a.shape[0], w.shape[1]):
        raise ValueError(
            f"upstream shape {upstream.shape} does not match N x K' = {(a.shape[0], w.shape[1])}"
        )
    if a.shape[1] != w.shape[0]:
        raise ValueError(f"feature dim {a.shape[1]} does not match projection rows {w.shape[0]}")
    return a.T @ upstream, -upstream.sum(axis=0)


def _kmeans_pp_centers(z: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = z.shape[0]
    centers = np.empty((k, z.shape[1]))
    centers[0] = z[rng.integers(n)]
    d2 = ((z - centers[0]) ** 2).sum(axis=1)
    for j in range(1, k):
        total = d2.sum()
        if total <= 0:
            centers[j] = z[rng.integers(n)]
        else:
            centers[j] = z[rng.choice(n, p=d2 / total)]
        d2 = np.minimum(d2, ((z - centers[j]) ** 2).sum(axis=1))
    return centers


def kmeans(z, k: int, seed: int, max_iters: int = 100) -> tuple[np.ndarray, LabelVector]:
    """Lloyd iterations from a k-means++ seeding.

    Deterministic given ``seed``; empty clusters are repaired by promoting
    the point currently farthest from its assigned center.
    """
    a = _as_array(z)
    n = a.shape[0]
    if not 1 <= k <= n:
        raise ValueError(f"k={k} must lie in [1, N={n}]")
    rng = np.random.default_rng(seed)
    centers = _kmeans_pp_centers(a, k, rng)
    assign = None
    for _ in range(max_iters):
        d2 = ((a[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
        new_assign = np.argmin(d2, axis=1)
        for j in range(k):  # empty-cluster repair, deterministic
            if not np.any(new_assign == j):
                counts = np.bincount(new_assign, minlength=k)
                own = d2[np.arange(n), new_assign].copy()
                own[counts[new_assign] < 2] = -np.inf  # never empty another cluster
                worst = int(np.argmax(own))
                new_assign[worst] = j
                d2[worst, :] = np.inf
                d2[worst, j] = 0.0
        if assign is not None and np.array_equal(new_assign, assign):
            break
        assign = new_assign
        for j in range(k):
            centers[j] = a[assign == j].mean(axis=0)
    return centers, LabelVector(assign)


def kmeans_objective(z, centers: np.ndarray, assign) -> float:
    """Sum of squared distances of each point to its assigned center."""
    a = _as_array(z)
    lab = assign.labels if isinstance(assign, LabelVector) else np.asarray(assign)
    return float(((a - centers[lab]) ** 2).sum())

"""Full-covariance RGB Gaussian mixtures for foreground/background modeling.

Fitting alternates hard component reassignment with closed-form
mean/covariance updates (no E-step responsibilities), which keeps the
segmentation loop a deterministic coordinate descent.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..embedding import kmeans

COV_REG = 1e-3  # added to covariance diagonals before inversion
_LOG_2PI = np.log(2.0 * np.pi)


class InsufficientSamplesError(ValueError):
    """Fewer pixels than mixture components."""


@dataclass(frozen=True)
class ColorGmm:
    """Components as parallel arrays: weights (C,), means (C,3), covariances (C,3,3).

    Only non-empty components are kept, so weights lie in (0, 1] and sum
    to 1; covariances carry the diagonal regularization already.
    """

    weights: np.ndarray
    means: np.ndarray
    covariances: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=np.float64)
        if w.ndim != 1 or w.size < 1 or np.any(w <= 0) or abs(w.sum() - 1.0) > 1e-9:
            raise ValueError("component weights must be positive and sum to 1")
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "means", np.asarray(self.means, dtype=np.float64))
        object.__setattr__(self, "covariances", np.asarray(self.covariances, dtype=np.float64))
        dets = np.linalg.det(self.covariances)
        if np.any(dets <= 0):
            raise ValueError("covariances must be positive-definite after regularization")
        object.__setattr__(self, "_inverses", np.linalg.inv(self.covariances))
        # log w_k - (1/2) log((2 pi)^3 det)
        object.__setattr__(
            self, "_log_norm", np.log(self.weights) - 0.5 * (3 * _LOG_2PI + np.log(dets))
        )

    @property
    def n_components(self) -> int:
        return self.weights.shape[0]

    def component_log_likelihood(self, pixels: np.ndarray) -> np.ndarray:
        """M x C matrix of log(w_k N(z | mu_k, Sigma_k))."""
        z = np.asarray(pixels, dtype=np.float64).reshape(-1, 3)
        diff = z[:, None, :] - self.means[None, :, :]  # M x C x 3
        maha = np.einsum("mci,cij,mcj->mc", diff, self._inverses, diff)
        return self._log_norm[None, :] - 0.5 * maha

    def assign_components(self, pixels: np.ndarray) -> np.ndarray:
        return np.argmax(self.component_log_likelihood(pixels), axis=1)

    def neg_log_likelihood(self, pixels: np.ndarray) -> np.ndarray:
        """Best-component data term: min_k -log(w_k N(z | theta_k))."""
        return -np.max(self.component_log_likelihood(pixels), axis=1)

    def refit(self, pixels: np.ndarray) -> "ColorGmm":
        """One assign-then-learn sweep on a new pixel set."""
        return _learn(np.asarray(pixels, dtype=np.float64).reshape(-1, 3), self.assign_components(pixels))


def _learn(pixels: np.ndarray, labels: np.ndarray) -> ColorGmm:
    ids = np.unique(labels)
    weights, means, covs = [], [], []
    m = pixels.shape[0]
    for j in ids:
        sel = pixels[labels == j]
        if sel.shape[0] == 0:
            continue
        weights.append(sel.shape[0] / m)
        means.append(sel.mean(axis=0))
        centered = sel - means[-1]
        cov = centered.T @ centered / sel.shape[0]
        covs.append(cov + COV_REG * np.eye(3))
    return ColorGmm(np.array(weights), np.array(means), np.array(covs))


def fit_gmm(pixels, component_count: int, seed: int, sweeps: int = 5) -> ColorGmm:
    """Seeded k-means++ color clustering followed by assign/learn sweeps."""
    z = np.asarray(pixels, dtype=np.float64).reshape(-1, 3)
    if component_count < 1:
        raise ValueError("component_count must be positive")
    if z.shape[0] < component_count:
        raise InsufficientSamplesError(
            f"{z.shape[0]} pixels cannot support {component_count} components"
        )
    _, assign = kmeans(z, component_count, seed=seed, max_iters=10)
    model = _learn(z, assign.labels)
    for _ in range(sweeps):
        labels = model.assign_components(z)
        refreshed = _learn(z, labels)
        if (
            refreshed.n_components == model.n_components
            and np.allclose(refreshed.means, model.means)
            and np.allclose(refreshed.weights, model.weights)
        ):
            model = refreshed
            break
        model = refreshed
    return model

"""Seeded synthetic blob datasets for benchmarks and acceptance checks."""

from __future__ import annotations

import numpy as np

from .core import FeatureMatrix, LabelVector


def make_blobs(
    n: int,
    dim: int = 2,
    k: int = 3,
    separation: float = 10.0,
    sigma: float = 1.0,
    seed: int = 0,
) -> tuple[FeatureMatrix, LabelVector]:
    """k isotropic Gaussian blobs whose nearest centers sit ``separation * sigma`` apart.

    Centers are spread on a circle in the first two dimensions (a line when
    dim == 1); counts are balanced up to remainder, order shuffled, all
    driven by ``seed``.
    """
    if k < 1 or n < k or dim < 1:
        raise ValueError("need n >= k >= 1 and dim >= 1")
    rng = np.random.default_rng(seed)
    centers = np.zeros((k, dim))
    if k > 1:
        if dim == 1:
            centers[:, 0] = np.arange(k) * separation * sigma
        else:
            radius = separation * sigma / (2.0 * np.sin(np.pi / k))
            angles = 2.0 * np.pi * np.arange(k) / k
            centers[:, 0] = radius * np.cos(angles)
            centers[:, 1] = radius * np.sin(angles)
    counts = np.full(k, n // k)
    counts[: n % k] += 1
    labels = np.repeat(np.arange(k), counts)
    points = centers[labels] + rng.normal(0.0, sigma, size=(n, dim))
    order = rng.permutation(n)
    return FeatureMatrix(points[order]), LabelVector(labels[order])

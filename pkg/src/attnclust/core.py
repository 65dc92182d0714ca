"""Shared domain types for the clustering pipeline.

Value objects only: constructors validate, instances are immutable
(backing arrays are read-only), and no algorithm lives here.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


class InvariantError(ValueError):
    """A domain-type invariant was violated."""


PROB_ROW_TOL = 1e-9  # absolute row-sum tolerance, double accumulation over <= 256 terms


def _frozen(a, dtype=np.float64) -> np.ndarray:
    """C-contiguous read-only copy of ``a``."""
    out = np.array(a, dtype=dtype, order="C")
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class FeatureMatrix:
    """N x D matrix of extracted feature vectors, one sample per row."""

    data: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "data", _frozen(self.data))
        if self.data.ndim != 2 or self.data.shape[0] < 1 or self.data.shape[1] < 1:
            raise InvariantError(f"feature matrix must be N>=1 x D>=1, got shape {self.data.shape}")
        if not np.all(np.isfinite(self.data)):
            bad = int(np.argwhere(~np.isfinite(self.data))[0][0])
            raise InvariantError(f"non-finite feature value at row {bad}")

    @property
    def rows(self) -> int:
        return self.data.shape[0]

    @property
    def cols(self) -> int:
        return self.data.shape[1]


@dataclass(frozen=True)
class ProbabilityMatrix:
    """N x K row-stochastic matrix of per-sample cluster probabilities."""

    data: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "data", _frozen(self.data))
        if self.data.ndim != 2 or self.data.shape[0] < 1 or self.data.shape[1] < 1:
            raise InvariantError(f"probability matrix must be 2-d, got shape {self.data.shape}")

    @property
    def rows(self) -> int:
        return self.data.shape[0]

    @property
    def cols(self) -> int:
        return self.data.shape[1]


@dataclass(frozen=True)
class LabelVector:
    """Dense non-negative integer cluster/class ids, one per sample."""

    labels: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.labels)
        if arr.ndim != 1 or arr.shape[0] < 1:
            raise InvariantError(f"label vector must be 1-d and non-empty, got shape {arr.shape}")
        if not np.issubdtype(arr.dtype, np.integer):
            if not np.all(arr == np.floor(arr)):
                raise InvariantError("labels must be integers")
        object.__setattr__(self, "labels", _frozen(arr, dtype=np.int64))
        if np.any(self.labels < 0):
            bad = int(np.argwhere(self.labels < 0)[0][0])
            raise InvariantError(f"negative label id at index {bad}")

    def __len__(self) -> int:
        return self.labels.shape[0]


@dataclass(frozen=True)
class ClusterState:
    """Trainable clustering head: centers, linear projection, kernel dof.

    ``centers`` is K x K' (K clusters in the K'-dim embedded space),
    ``projection_weights`` D x K', ``projection_offset`` a K'-vector so that
    embed(x) = x @ W - b.  ``alpha`` is the Student's-t degrees of freedom.
    """

    centers: np.ndarray
    projection_weights: np.ndarray
    projection_offset: np.ndarray
    alpha: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "centers", _frozen(self.centers))
        object.__setattr__(self, "projection_weights", _frozen(self.projection_weights))
        object.__setattr__(self, "projection_offset", _frozen(self.projection_offset))
        if self.centers.ndim != 2 or self.centers.shape[0] < 2:
            raise InvariantError(f"need K >= 2 cluster centers, got shape {self.centers.shape}")
        k_embed = self.centers.shape[1]
        if self.projection_weights.ndim != 2 or self.projection_weights.shape[1] != k_embed:
            raise InvariantError("projection_weights must be D x K' with K' matching centers")
        if self.projection_offset.shape != (k_embed,):
            raise InvariantError("projection_offset must be a K'-vector")
        for name in ("centers", "projection_weights", "projection_offset"):
            if not np.all(np.isfinite(getattr(self, name))):
                raise InvariantError(f"non-finite values in {name}")
        if not (np.isfinite(self.alpha) and self.alpha > 0):
            raise InvariantError(f"alpha must be a positive finite real, got {self.alpha}")

    @property
    def n_clusters(self) -> int:
        return self.centers.shape[0]

    @property
    def embed_dim(self) -> int:
        return self.centers.shape[1]

    @property
    def feature_dim(self) -> int:
        return self.projection_weights.shape[0]


@dataclass(frozen=True)
class LossBreakdown:
    """Per-epoch loss terms: l1 (KL), l2 (consistency), total = l1 + l2."""

    l1: float
    l2: float
    omega: float
    total: float = field(init=False)

    def __post_init__(self):
        if self.l1 < 0 or self.l2 < 0:
            raise InvariantError("loss terms must be non-negative")
        if not 0.0 <= self.omega <= 1.0:
            raise InvariantError(f"omega must lie in [0, 1], got {self.omega}")
        if self.omega == 0.0 and self.l2 != 0.0:
            raise InvariantError("l2 must be 0 when omega is 0")
        object.__setattr__(self, "total", self.l1 + self.l2)


def validate_probability_matrix(m: ProbabilityMatrix | np.ndarray) -> None:
    """Raise InvariantError unless every row sums to 1 (+-1e-9) with entries >= 0."""
    a = m.data if isinstance(m, ProbabilityMatrix) else np.asarray(m)
    if a.ndim != 2 or a.shape[0] < 1 or a.shape[1] < 1:
        raise InvariantError(f"probability matrix must be 2-d, got shape {a.shape}")
    neg = np.argwhere(a < 0)
    if neg.size:
        i, k = int(neg[0][0]), int(neg[0][1])
        raise InvariantError(f"negative entry {float(a[i, k])!r} at row {i}, column {k}")
    sums = a.sum(axis=1)
    off = np.argwhere(np.abs(sums - 1.0) > PROB_ROW_TOL)
    if off.size:
        i = int(off[0][0])
        raise InvariantError(f"row {i} sums to {float(sums[i])!r}, expected 1 within {PROB_ROW_TOL}")

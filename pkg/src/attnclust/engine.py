"""Self-training cluster optimization.

Implements the Student's-t soft assignment, the squared/size-normalized
target distribution, the KL objective, the consistency constraint with
its Gaussian ramp-up, temporal ensembling with zero-init rescaling, and
plain gradient-descent training loops for the three variants (baseline,
transform consistency, temporal-ensemble consistency).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .core import (
    ClusterState,
    FeatureMatrix,
    InvariantError,
    LabelVector,
    LossBreakdown,
    ProbabilityMatrix,
    _frozen,
)

LOG_FLOOR = 1e-12  # clamp for probabilities inside logarithms


class DivergedError(RuntimeError):
    """Training loss became NaN."""

    def __init__(self, epoch: int):
        super().__init__(f"loss diverged to NaN at epoch {epoch}")
        self.epoch = epoch


class Variant(enum.Enum):
    BASELINE = "baseline"
    PI = "pi"
    TEP = "tep"


@dataclass(frozen=True)
class TrainConfig:
    variant: Variant = Variant.BASELINE
    epochs: int = 50
    ramp_length: int = 10
    learning_rate: float = 0.01
    alpha: float = 1.0
    beta: float = 0.9
    target_update_interval: int = 1
    seed: int = 0
    squared_consistency: bool = True

    def __post_init__(self):
        if self.epochs < 0:
            raise InvariantError("epochs must be >= 0")
        if self.ramp_length < 1:
            raise InvariantError("ramp_length must be >= 1")
        if self.epochs > 0 and self.ramp_length > self.epochs:
            raise InvariantError("ramp_length must not exceed epochs")
        if not 0.0 <= self.beta < 1.0:
            raise InvariantError("beta must lie in [0, 1)")
        if self.learning_rate <= 0 or self.alpha <= 0 or self.target_update_interval < 1:
            raise InvariantError("learning_rate, alpha and target_update_interval must be positive")


@dataclass(frozen=True)
class EnsembleState:
    """Accumulator for the prediction EMA; zero-initialized at step 0."""

    accumulated: np.ndarray
    beta: float
    step: int = 0

    def __post_init__(self):
        object.__setattr__(self, "accumulated", _frozen(self.accumulated))
        if not 0.0 <= self.beta < 1.0:
            raise InvariantError("beta must lie in [0, 1)")
        if self.step == 0 and np.any(self.accumulated != 0.0):
            raise InvariantError("accumulator must be all zeros at step 0")

    @classmethod
    def zeros(cls, n: int, k: int, beta: float) -> "EnsembleState":
        return cls(accumulated=np.zeros((n, k)), beta=beta, step=0)


def _probs(p) -> np.ndarray:
    return p.data if isinstance(p, ProbabilityMatrix) else np.asarray(p, dtype=np.float64)


def _soft_assign_array(z: np.ndarray, centers: np.ndarray, alpha: float) -> np.ndarray:
    d2 = ((z[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
    kernel = (1.0 + d2 / alpha) ** (-(alpha + 1.0) / 2.0)
    return kernel / kernel.sum(axis=1, keepdims=True)


def soft_assign(z, centers: np.ndarray, alpha: float = 1.0) -> ProbabilityMatrix:
    """Student's-t kernel probabilities p(k|i) over squared point-center distances."""
    z = np.asarray(z, dtype=np.float64)
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    return ProbabilityMatrix(_soft_assign_array(z, np.asarray(centers, dtype=np.float64), alpha))


def target_distribution(p) -> ProbabilityMatrix:
    """Sharpened, cluster-size-equalized self-training target.

    q(k|i) is proportional to p(k|i)^2 / sum_i p(k|i), rows re-normalized;
    zero-mass clusters contribute zero columns rather than 0/0.
    """
    a = _probs(p)
    mass = a.sum(axis=0)
    with np.errstate(divide="ignore", invalid="ignore"):
        w = np.where(mass > 0, a**2 / mass, 0.0)
    return ProbabilityMatrix(w / w.sum(axis=1, keepdims=True))


def kl_loss(q, p) -> float:
    """(1/N) sum_i KL(q_i || p_i); q log q counts 0 at q=0, p floored at 1e-12."""
    qa, pa = _probs(q), _probs(p)
    if qa.shape != pa.shape:
        raise ValueError(f"shape mismatch: {qa.shape} vs {pa.shape}")
    logp = np.log(np.maximum(pa, LOG_FLOOR))
    terms = np.where(qa > 0, qa * (np.log(np.maximum(qa, LOG_FLOOR)) - logp), 0.0)
    return max(float(terms.sum()) / qa.shape[0], 0.0)


def consistency_loss(p, p_prime, omega: float, squared: bool = True) -> float:
    """Ramped disagreement penalty between a prediction and its counterpart.

    Default is the mean squared per-element difference; ``squared=False``
    switches to the mean absolute difference.
    """
    pa, pb = _probs(p), _probs(p_prime)
    if pa.shape != pb.shape:
        raise ValueError(f"shape mismatch: {pa.shape} vs {pb.shape}")
    if not 0.0 <= omega <= 1.0:
        raise ValueError("omega must lie in [0, 1]")
    diff = pa - pb
    penalty = (diff**2).mean() if squared else np.abs(diff).mean()
    return float(omega * penalty)


def ramp_up(t: int, ramp_length: int) -> float:
    """Gaussian ramp exp(-5(1 - t/T)^2) on [0, T), clamped to 1 afterwards."""
    if t < 0 or ramp_length < 1:
        raise ValueError("need t >= 0 and ramp_length >= 1")
    if t >= ramp_length:
        return 1.0
    frac = 1.0 - t / ramp_length
    return float(np.exp(-5.0 * frac * frac))


def ema_update(state: EnsembleState, p_t) -> tuple[EnsembleState, ProbabilityMatrix]:
    """Fold the step-t prediction into the EMA and return the rescaled smooth target.

    accumulated_t = beta * accumulated_{t-1} + (1-beta) * p_t, and the smoothed
    distribution divides out the zero-init bias 1 - beta^t.  At t=1 the
    correction cancels exactly, so the raw prediction is returned unchanged;
    later steps re-normalize rows to scrub floating-point drift.
    """
    a = _probs(p_t)
    if state.beta >= 1.0:
        raise ValueError("beta must be < 1 (rescale divides by 1 - beta^t)")
    if a.shape != state.accumulated.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {state.accumulated.shape}")
    t = state.step + 1
    accumulated = state.beta * state.accumulated + (1.0 - state.beta) * a
    if t == 1:
        smoothed = a.copy()
    else:
        smoothed = accumulated / (1.0 - state.beta**t)
        smoothed /= smoothed.sum(axis=1, keepdims=True)
    return EnsembleState(accumulated=accumulated, beta=state.beta, step=t), ProbabilityMatrix(smoothed)


def dec_gradients(z, centers, alpha: float, q) -> tuple[np.ndarray, np.ndarray]:
    """Exact gradients of the KL objective w.r.t. embedded points and centers.

    With t_ik = 1 + ||z_i - mu_k||^2 / alpha and q held fixed:
        dL/dz_i  =  (alpha+1)/(N*alpha) * sum_k (q_ik - p_ik) (z_i - mu_k) / t_ik
        dL/dmu_k = -(alpha+1)/(N*alpha) * sum_i (q_ik - p_ik) (z_i - mu_k) / t_ik
    """
    z = np.asarray(z, dtype=np.float64)
    centers = np.asarray(centers, dtype=np.float64)
    qa = _probs(q)
    n = z.shape[0]
    diff = z[:, None, :] - centers[None, :, :]  # N x K x K'
    t = 1.0 + (diff**2).sum(axis=2) / alpha
    p = t ** (-(alpha + 1.0) / 2.0)
    p = p / p.sum(axis=1, keepdims=True)
    coef = (alpha + 1.0) / (n * alpha) * (qa - p) / t  # N x K
    grad_z = (coef[:, :, None] * diff).sum(axis=1)
    grad_centers = -(coef[:, :, None] * diff).sum(axis=0)
    return grad_z, grad_centers


def _soft_assign_vjp(
    z: np.ndarray, centers: np.ndarray, alpha: float, p: np.ndarray, grad_p: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Backprop an upstream dL/dp through soft_assign to (z, centers)."""
    diff = z[:, None, :] - centers[None, :, :]
    t = 1.0 + (diff**2).sum(axis=2) / alpha
    # normalization backward: dL/d(log kernel) = p * (g - sum_k g_k p_k)
    glog = p * (grad_p - (grad_p * p).sum(axis=1, keepdims=True))
    coef = glog * (alpha + 1.0) / alpha / t
    grad_z = -(coef[:, :, None] * diff).sum(axis=1)
    grad_centers = (coef[:, :, None] * diff).sum(axis=0)
    return grad_z, grad_centers


def predict(features, state: ClusterState) -> tuple[LabelVector, ProbabilityMatrix]:
    """Argmax-probability assignment; ties resolve to the lowest cluster id."""
    x = features.data if isinstance(features, FeatureMatrix) else np.asarray(features, dtype=np.float64)
    z = x @ state.projection_weights - state.projection_offset
    p = _soft_assign_array(z, state.centers, state.alpha)
    return LabelVector(np.argmax(p, axis=1)), ProbabilityMatrix(p)


def jitter_features(features, sigma: float, seed: int) -> FeatureMatrix:
    """Seeded Gaussian feature jitter, the desk-scale surrogate for an image transform."""
    x = features.data if isinstance(features, FeatureMatrix) else np.asarray(features, dtype=np.float64)
    rng = np.random.default_rng(seed)
    return FeatureMatrix(x + rng.normal(0.0, sigma, size=x.shape))


def train(
    features,
    initial: ClusterState,
    cfg: TrainConfig,
    transform_features=None,
) -> tuple[ClusterState, LabelVector, list[LossBreakdown]]:
    """Gradient-descent training of centers and projection for the chosen variant.

    The KL term always applies; the PI variant adds the consistency penalty
    against predictions on ``transform_features`` (required, same shape), the
    TEP variant against the rescaled EMA of its own past predictions.  The
    target q is recomputed every ``target_update_interval`` epochs.
    """
    x = features.data if isinstance(features, FeatureMatrix) else np.asarray(features, dtype=np.float64)
    if cfg.variant is Variant.PI:
        if transform_features is None:
            raise ValueError("PI variant requires transform_features")
        x2 = (
            transform_features.data
            if isinstance(transform_features, FeatureMatrix)
            else np.asarray(transform_features, dtype=np.float64)
        )
        if x2.shape != x.shape:
            raise ValueError(f"transform_features shape {x2.shape} != features shape {x.shape}")
    else:
        x2 = None

    w = np.array(initial.projection_weights)
    b = np.array(initial.projection_offset)
    centers = np.array(initial.centers)
    alpha, lr = cfg.alpha, cfg.learning_rate
    n, k = x.shape[0], centers.shape[0]

    ensemble = EnsembleState.zeros(n, k, cfg.beta) if cfg.variant is Variant.TEP else None
    q = None
    history: list[LossBreakdown] = []

    for epoch in range(cfg.epochs):
        z = x @ w - b
        p = _soft_assign_array(z, centers, alpha)
        if not np.all(np.isfinite(p)):
            raise DivergedError(epoch)
        if q is None or epoch % cfg.target_update_interval == 0:
            q = target_distribution(p).data

        l1 = kl_loss(q, p)
        grad_z, grad_centers = dec_gradients(z, centers, alpha, q)
        grad_w, grad_b = x.T @ grad_z, -grad_z.sum(axis=0)

        if cfg.variant is Variant.BASELINE:
            omega, l2 = 0.0, 0.0
        else:
            omega = ramp_up(epoch, cfg.ramp_length)
            if cfg.variant is Variant.PI:
                z2 = x2 @ w - b
                p2 = _soft_assign_array(z2, centers, alpha)
            else:  # TEP: EMA target, held constant for the gradient
                ensemble, smoothed = ema_update(ensemble, p)
                p2 = smoothed.data
            l2 = consistency_loss(p, p2, omega, squared=cfg.squared_consistency)
            diff = p - p2
            scale = omega / (n * k)
            gp = scale * (2.0 * diff if cfg.squared_consistency else np.sign(diff))
            gz_c, gc_c = _soft_assign_vjp(z, centers, alpha, p, gp)
            grad_z = grad_z + gz_c
            grad_w = grad_w + x.T @ gz_c
            grad_b = grad_b - gz_c.sum(axis=0)
            grad_centers = grad_centers + gc_c
            if cfg.variant is Variant.PI:
                gz2, gc2 = _soft_assign_vjp(z2, centers, alpha, p2, -gp)
                grad_w = grad_w + x2.T @ gz2
                grad_b = grad_b - gz2.sum(axis=0)
                grad_centers = grad_centers + gc2

        total = l1 + l2
        if not np.isfinite(total):
            raise DivergedError(epoch)
        history.append(LossBreakdown(l1=l1, l2=l2, omega=omega))

        w -= lr * grad_w
        b -= lr * grad_b
        centers -= lr * grad_centers

    final = ClusterState(
        centers=centers, projection_weights=w, projection_offset=b, alpha=alpha
    )
    assignment, _ = predict(x, final)
    return final, assignment, history

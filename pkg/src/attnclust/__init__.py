"""Attention-preprocessed transfer clustering toolkit.

GrabCut-based ROI preprocessing, PCA/k-means-initialized cluster heads,
KL self-training with consistency and temporal-ensembling variants, and
Hungarian-matched clustering metrics.
"""

from .core import (
    ClusterState,
    FeatureMatrix,
    InvariantError,
    LabelVector,
    LossBreakdown,
    ProbabilityMatrix,
    validate_probability_matrix,
)
from .embedding import PcaModel, init_projection, kmeans, pca_fit, project, projection_gradients
from .engine import (
    DivergedError,
    EnsembleState,
    TrainConfig,
    Variant,
    consistency_loss,
    dec_gradients,
    ema_update,
    jitter_features,
    kl_loss,
    predict,
    ramp_up,
    soft_assign,
    target_distribution,
    train,
)
from .metrics import ari, clustering_accuracy, contingency_table, nmi
from .synth import make_blobs

__version__ = "0.1.0"

"""End-to-end experiment driver: ingest, initialize, train, evaluate, report."""

from __future__ import annotations

import dataclasses
import json
import time
from dataclasses import dataclass
from pathlib import Path

from . import dataio
from .config import ConfigError, ExperimentConfig
from .core import ClusterState
from .embedding import init_projection, kmeans, pca_fit, project
from .engine import DivergedError, Variant, jitter_features, train
from .metrics import ari, clustering_accuracy, nmi


class StageError(RuntimeError):
    """Module failure wrapped with the pipeline stage it occurred in."""

    def __init__(self, stage: str, cause: Exception):
        super().__init__(f"[{stage}] {cause}")
        self.stage = stage
        self.cause = cause


@dataclass
class ExperimentReport:
    config: dict
    n_samples: int
    n_features: int
    embed_dim: int
    metrics: dict | None
    loss_history: list
    timing: dict | None = None

    def to_json(self) -> str:
        payload = dataclasses.asdict(self)
        return json.dumps(payload, indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "ExperimentReport":
        return cls(**json.loads(text))

    def to_text(self) -> str:
        lines = [
            f"variant {self.config['variant']}",
            f"samples {self.n_samples}  features {self.n_features}  embed_dim {self.embed_dim}",
        ]
        if self.metrics is not None:
            lines += [
                f"Accuracy {self.metrics['acc']:.4f}",
                f"NMI {self.metrics['nmi']:.4f}",
                f"ARI {self.metrics['ari']:.4f}",
            ]
        else:
            lines.append("no ground-truth labels; metrics unavailable")
        return "\n".join(lines) + "\n"


def emit_report(report: ExperimentReport, fmt: str, out_dir) -> Path:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    if fmt == "json":
        path = out_dir / "report.json"
        path.write_text(report.to_json())
    elif fmt == "text":
        path = out_dir / "report.txt"
        path.write_text(report.to_text())
    else:
        raise ConfigError(f"report format must be text|json, got {fmt!r}")
    return path


def _default_embed_dim(clusters: int, n: int, d: int) -> int:
    return max(1, min(clusters, n - 1, d))


def run_experiment(cfg: ExperimentConfig) -> ExperimentReport:
    """Load -> PCA -> k-means -> train(variant) -> predict -> metrics -> report.

    Fail-fast: every referenced file is loaded and validated before any
    output is written, so a bad config leaves no partial artifacts.
    """
    cfg.validate()
    t0 = time.perf_counter()

    try:
        features = dataio.load_features(cfg.features)
        truth = dataio.load_labels(cfg.labels) if cfg.labels else None
        transform = (
            dataio.load_features(cfg.transform_features) if cfg.transform_features else None
        )
    except (dataio.DataFormatError, OSError) as exc:
        raise StageError("ingest", exc) from exc
    if truth is not None and len(truth) != features.rows:
        raise StageError(
            "ingest", ValueError(f"{len(truth)} labels for {features.rows} feature rows")
        )
    if transform is not None and transform.data.shape != features.data.shape:
        raise StageError(
            "ingest",
            ValueError(
                f"transform features shape {transform.data.shape} != {features.data.shape}"
            ),
        )

    variant = Variant(cfg.variant)
    if variant is Variant.PI and transform is None:
        transform = jitter_features(features, cfg.jitter_sigma, cfg.seed)

    try:
        embed_dim = cfg.embed_dim or _default_embed_dim(cfg.clusters, features.rows, features.cols)
        pca = pca_fit(features, embed_dim)
        w, b = init_projection(pca)
        z = project(features, w, b)
        centers, _ = kmeans(z, cfg.clusters, seed=cfg.seed)
        state = ClusterState(
            centers=centers, projection_weights=w, projection_offset=b, alpha=cfg.alpha
        )
    except ValueError as exc:
        raise StageError("init", exc) from exc

    try:
        final_state, assignment, history = train(
            features, state, cfg.train_config(), transform_features=transform
        )
    except DivergedError:
        raise
    except ValueError as exc:
        raise StageError("train", exc) from exc

    try:
        scores = None
        if truth is not None:
            scores = {
                "acc": clustering_accuracy(assignment, truth),
                "nmi": nmi(assignment, truth),
                "ari": ari(assignment, truth),
            }
    except ValueError as exc:
        raise StageError("eval", exc) from exc

    elapsed = time.perf_counter() - t0
    report = ExperimentReport(
        config=dataclasses.asdict(cfg),
        n_samples=features.rows,
        n_features=features.cols,
        embed_dim=embed_dim,
        metrics=scores,
        loss_history=[
            {"l1": h.l1, "l2": h.l2, "total": h.total, "omega": h.omega} for h in history
        ],
        timing={"seconds": elapsed} if cfg.include_timings else None,
    )

    out_dir = Path(cfg.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    dataio.save_labels(out_dir / "assignments.txt", assignment)
    emit_report(report, cfg.report_format, out_dir)
    return report

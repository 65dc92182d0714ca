#!/usr/bin/env python3
"""Train all three variants on one dataset and print their metric tables."""

import argparse

import numpy as np

from attnclust.core import ClusterState
from attnclust.dataio import load_features, load_labels
from attnclust.embedding import init_projection, kmeans, pca_fit, project
from attnclust.engine import TrainConfig, Variant, jitter_features, train
from attnclust.metrics import ari, clustering_accuracy, nmi


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--features", required=True)
    parser.add_argument("--labels", required=True)
    parser.add_argument("--clusters", type=int, required=True)
    parser.add_argument("--embed-dim", type=int, default=0)
    parser.add_argument("--epochs", type=int, default=50)
    parser.add_argument("--ramp-length", type=int, default=10)
    parser.add_argument("--learning-rate", type=float, default=0.01)
    parser.add_argument("--beta", type=float, default=0.9)
    parser.add_argument("--jitter-sigma", type=float, default=0.1)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    features = load_features(args.features)
    truth = load_labels(args.labels)
    embed_dim = args.embed_dim or max(1, min(args.clusters, features.rows - 1, features.cols))

    pca = pca_fit(features, embed_dim)
    w, b = init_projection(pca)
    centers, _ = kmeans(project(features, w, b), args.clusters, seed=args.seed)
    state = ClusterState(centers=centers, projection_weights=w, projection_offset=b)

    for variant in (Variant.BASELINE, Variant.PI, Variant.TEP):
        cfg = TrainConfig(
            variant=variant,
            epochs=args.epochs,
            ramp_length=args.ramp_length,
            learning_rate=args.learning_rate,
            beta=args.beta,
            seed=args.seed,
        )
        transform = (
            jitter_features(features, args.jitter_sigma, args.seed)
            if variant is Variant.PI
            else None
        )
        _, assign, history = train(features, state, cfg, transform_features=transform)
        print(f"--- {variant.value}")
        print(f"Accuracy {clustering_accuracy(assign, truth):.4f}")
        print(f"NMI {nmi(assign, truth):.4f}")
        print(f"ARI {ari(assign, truth):.4f}")
        if history:
            print(f"(final l1 {history[-1].l1:.5f}, l2 {history[-1].l2:.6f})")


if __name__ == "__main__":
    main()

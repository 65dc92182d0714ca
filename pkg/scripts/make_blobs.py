#!/usr/bin/env python3
"""Generate a seeded synthetic blob dataset as feature + label files."""

import argparse
from pathlib import Path

from attnclust.dataio import save_features, save_labels
from attnclust.synth import make_blobs


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--n", type=int, default=200)
    parser.add_argument("--dim", type=int, default=2)
    parser.add_argument("--k", type=int, default=3)
    parser.add_argument("--separation", type=float, default=10.0, help="center gap in sigmas")
    parser.add_argument("--sigma", type=float, default=1.0)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--out-dir", type=Path, default=Path("data"))
    args = parser.parse_args()

    features, labels = make_blobs(
        args.n, dim=args.dim, k=args.k, separation=args.separation, sigma=args.sigma, seed=args.seed
    )
    args.out_dir.mkdir(parents=True, exist_ok=True)
    fpath = args.out_dir / "features.dtcf"
    lpath = args.out_dir / "labels.txt"
    save_features(fpath, features)
    save_labels(lpath, labels)
    print(f"wrote {fpath} ({features.rows}x{features.cols}) and {lpath}")


if __name__ == "__main__":
    main()

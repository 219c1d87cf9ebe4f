#!/usr/bin/env python3
"""Capacity bounds over a (u, lambda) grid, one CSV per sigma_min scale.

Example:
    python scripts/bounds_sweep.py --out results/bounds --scales 0.1 1 10
"""

import argparse
from pathlib import Path

import numpy as np

from vdfap import capacity as cap


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", type=Path, default=Path("results/bounds"))
    ap.add_argument("--scales", type=float, nargs="+", default=[0.1, 1.0, 10.0],
                    help="Sigma = scale * I for each value")
    ap.add_argument("--points", type=int, default=50)
    ap.add_argument("--units", choices=("nats", "bits"), default="nats")
    args = ap.parse_args()

    args.out.mkdir(parents=True, exist_ok=True)
    u_grid = -np.geomspace(0.1, 10, args.points)
    lam_grid = np.geomspace(0.1, 10, args.points)
    for scale in args.scales:
        c = cap.CovarianceConstraint(scale * np.eye(2))
        rows = cap.bounds_sweep(u_grid, lam_grid, c)
        path = args.out / f"bounds_sigma{scale:g}.csv"
        path.write_text(cap.format_bounds_csv(rows, args.units))
        gaps = np.array([r.upper - r.lower for r in rows])
        print(f"sigma={scale:g}: {len(rows)} points, gap median {np.median(gaps):.4f}, max {gaps.max():.4f} -> {path}")


if __name__ == "__main__":
    main()

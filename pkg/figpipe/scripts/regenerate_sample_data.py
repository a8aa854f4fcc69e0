#!/usr/bin/env python3
"""Regenerate the sample CSVs shipped with figpipe.

Requires the fogfl simulator (the pipeline itself does not); run from the
figpipe directory.  The configurations are deliberately small so the shipped
files stay tiny while keeping each figure's qualitative shape.
"""
import pathlib
import sys

from fogfl.config import RunConfig
from fogfl.runner import run, write_csv

OUT = pathlib.Path(__file__).resolve().parent.parent / "data"

SMALL = dict(J=10, I=2, q=16, num_classes=4, n_samples=1000, G=40, G_bar=40,
             e_max=0.1, J_min=4, subset_size=3, eta0=0.02, lr_decay=1.01)

# straggler-heavy variant for the schedule comparison
TAIL = dict(J=20, I=2, q=16, num_classes=4, n_samples=1200, G=40, G_bar=40,
            e_max=0.1, J_min=6, delta_T=0.015, delta_G=6, subset_size=3,
            partition_mode="one-class", f_max_range=(2e7, 4e8),
            eta0=0.02, lr_decay=1.01)

SEEDS = (0, 1, 2)


def emit(label: str, cfg: RunConfig) -> None:
    for seed in SEEDS:
        path = OUT / f"{label}_seed{seed}.csv"
        write_csv(path, run(cfg, seed=seed).rows)
        print(path)


def main() -> int:
    OUT.mkdir(parents=True, exist_ok=True)
    for b in (5, 10, 20):
        emit(f"fig5_B{b}", RunConfig(scheme="full", B=b, L=10, **SMALL))
    for scheme in ("full", "fra", "eb"):
        emit(f"fig8_{scheme}", RunConfig(scheme=scheme, **SMALL))
    for scheme in ("full", "flexible", "sampling"):
        emit(f"fig12_{scheme}", RunConfig(scheme=scheme, **TAIL))
    return 0


if __name__ == "__main__":
    sys.exit(main())

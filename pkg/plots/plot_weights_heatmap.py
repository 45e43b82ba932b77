#!/usr/bin/env python3
"""Coupling-matrix heatmaps before and after learning.

Reads weights_initial.csv and weights_learned.csv (square, headerless).
"""

import csv
import sys
from pathlib import Path

import matplotlib.pyplot as plt

sys.path.insert(0, str(Path(__file__).parent))
from common import FigureSpec, SchemaError, run_script, save_figure


def load_matrix(path: Path):
    if not path.exists():
        raise SchemaError(f"missing input file {path}")
    with open(path, encoding="utf-8") as f:
        rows = [[float(x) for x in row] for row in csv.reader(f) if row]
    if not rows or any(len(r) != len(rows) for r in rows):
        raise SchemaError(f"{path}: expected a square numeric matrix")
    return rows


def render(spec: FigureSpec) -> None:
    before = load_matrix(spec.in_dir / "weights_initial.csv")
    after = load_matrix(spec.in_dir / "weights_learned.csv")

    fig, axes = plt.subplots(1, 2, figsize=(9.6, 4.4))
    for ax, matrix, title in ((axes[0], before, "initial"), (axes[1], after, "learned")):
        im = ax.imshow(matrix, cmap="RdBu_r", interpolation="nearest")
        ax.set_title(f"{title} couplings")
        ax.set_xlabel("node")
        ax.set_ylabel("node")
        fig.colorbar(im, ax=ax, fraction=0.046)
    fig.tight_layout()
    save_figure(fig, spec.out_path)
    plt.close(fig)


def main(argv=None) -> int:
    return run_script("weights_heatmap", render, argv)


if __name__ == "__main__":
    sys.exit(main())

#!/usr/bin/env python3
"""Novelty, value, convergence and appropriateness against the learning rate.

Reads scores.csv.  Dashed vertical lines mark the regime-label changes
along the learning-rate axis.
"""

import sys
from pathlib import Path

import matplotlib.pyplot as plt

sys.path.insert(0, str(Path(__file__).parent))
from common import FigureSpec, read_csv_columns, run_script, save_figure

SCORES_COLUMNS = (
    "alpha", "novelty", "value", "convergence", "appropriateness",
    "p_1sigma", "p_2sigma", "p_3sigma", "regime",
)


def render(spec: FigureSpec) -> None:
    cols = read_csv_columns(spec.in_dir / "scores.csv", SCORES_COLUMNS)
    alphas = [float(x) for x in cols["alpha"]]

    fig, ax = plt.subplots(figsize=(8.0, 4.5))
    series = {
        "novelty": "#386cb0",
        "value": "#ff7f00",
        "convergence": "#33a02c",
        "appropriateness": "#6a3d9a",
    }
    for name, color in series.items():
        ax.plot(alphas, [float(x) for x in cols[name]], color=color, marker="o",
                ms=3.5, lw=1.5, label=name)
    regimes = cols["regime"]
    for i in range(1, len(alphas)):
        if regimes[i] != regimes[i - 1]:
            edge = (alphas[i] * alphas[i - 1]) ** 0.5
            ax.axvline(edge, color="0.55", ls="--", lw=1)
    ax.set_xscale("log")
    ax.set_xlabel("learning rate")
    ax.set_ylabel("score")
    ax.set_ylim(-0.05, 1.05)
    ax.legend(loc="center left", fontsize=8)
    fig.tight_layout()
    save_figure(fig, spec.out_path)
    plt.close(fig)


def main(argv=None) -> int:
    return run_script("scores_curve", render, argv)


if __name__ == "__main__":
    sys.exit(main())

#!/usr/bin/env python3
"""Parametric novelty-value curves: baseline traced over energy, learned
outcomes traced over the learning rate.

Reads pareto_bl.csv and pareto_al.csv (written by the export command).
"""

import sys
from pathlib import Path

import matplotlib.pyplot as plt

sys.path.insert(0, str(Path(__file__).parent))
from common import FigureSpec, read_csv_columns, run_script, save_figure


def render(spec: FigureSpec) -> None:
    bl = read_csv_columns(spec.in_dir / "pareto_bl.csv", ("energy", "novelty", "value"))
    al = read_csv_columns(spec.in_dir / "pareto_al.csv", ("alpha", "novelty", "value"))

    fig, ax = plt.subplots(figsize=(5.2, 5.0))
    ax.plot(
        [float(x) for x in bl["novelty"]], [float(x) for x in bl["value"]],
        color="#386cb0", lw=2, label="before learning (over energy)",
    )
    ax.plot(
        [float(x) for x in al["novelty"]], [float(x) for x in al["value"]],
        color="#ff7f00", lw=1.5, marker="o", ms=4,
        label="after learning (over learning rate)",
    )
    ax.set_xlim(-0.05, 1.05)
    ax.set_ylim(-0.05, 1.05)
    ax.set_xlabel("novelty")
    ax.set_ylabel("value")
    ax.legend(loc="lower center", fontsize=8)
    fig.tight_layout()
    save_figure(fig, spec.out_path)
    plt.close(fig)


def main(argv=None) -> int:
    return run_script("pareto", render, argv)


if __name__ == "__main__":
    sys.exit(main())

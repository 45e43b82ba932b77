#!/usr/bin/env python3
"""Final energy per reset, colored by stage (before/during/after learning).

Reads runs.csv from the dataset directory.
"""

import sys
from pathlib import Path

import matplotlib.pyplot as plt

sys.path.insert(0, str(Path(__file__).parent))
from common import STAGE_COLORS, FigureSpec, read_csv_columns, run_script, save_figure


def render(spec: FigureSpec) -> None:
    cols = read_csv_columns(
        spec.in_dir / "runs.csv",
        ("stage", "alpha", "seed", "reset", "final_energy", "fixed_point"),
    )
    resets = [int(x) for x in cols["reset"]]
    energies = [float(x) for x in cols["final_energy"]]
    stages = cols["stage"]

    fig, ax = plt.subplots(figsize=(8.0, 4.5))
    for stage, color in STAGE_COLORS.items():
        xs = [r for r, s in zip(resets, stages) if s == stage]
        ys = [e for e, s in zip(energies, stages) if s == stage]
        if xs:
            ax.scatter(xs, ys, s=4, color=color, label=stage, linewidths=0)
    ax.set_xlabel("reset")
    ax.set_ylabel("final energy (initial weights)")
    ax.legend(loc="upper right", title="stage")
    fig.tight_layout()
    save_figure(fig, spec.out_path)
    plt.close(fig)


def main(argv=None) -> int:
    return run_script("energy_scatter", render, argv)


if __name__ == "__main__":
    sys.exit(main())

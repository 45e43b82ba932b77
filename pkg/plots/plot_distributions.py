#!/usr/bin/env python3
"""Before/after-learning energy distributions with the Poisson baseline fit.

Reads runs.csv and baseline.json.  The left panel shows the BL histogram,
the shifted-Poisson fit, and dashed lines one/two/three baseline standard
deviations below and above the mean; the right panel shows the AL
histogram (all learning rates pooled), optionally with a logarithmic count
axis (--log).
"""

import math
import sys
from pathlib import Path

import matplotlib.pyplot as plt

sys.path.insert(0, str(Path(__file__).parent))
from common import (
    SIGMA_COLORS,
    FigureSpec,
    read_baseline,
    read_csv_columns,
    run_script,
    save_figure,
)


def shifted_poisson_curve(mu, lam, grid):
    # density of E = mu + (X - lambda), X ~ Poisson(lambda), at real E
    out = []
    for e in grid:
        k = e - mu + lam
        if k <= -1.0:
            out.append(0.0)
        else:
            out.append(math.exp(k * math.log(lam) - lam - math.lgamma(k + 1.0)))
    return out


def render(spec: FigureSpec) -> None:
    cols = read_csv_columns(
        spec.in_dir / "runs.csv",
        ("stage", "alpha", "seed", "reset", "final_energy", "fixed_point"),
    )
    base = read_baseline(spec.in_dir / "baseline.json")
    energies = [float(x) for x in cols["final_energy"]]
    bl = [e for e, s in zip(energies, cols["stage"]) if s == "BL"]
    al = [e for e, s in zip(energies, cols["stage"]) if s == "AL"]

    fig, axes = plt.subplots(1, 2, figsize=(10.0, 4.2), sharex=True)
    mu, sigma, lam = base["mu_BL"], base["sigma_BL"], base["lambda"]

    axes[0].hist(bl, bins=40, density=True, color="#1f3b73", alpha=0.75)
    lo = min(bl) - 2 * sigma
    hi = max(bl) + 2 * sigma
    grid = [lo + (hi - lo) * i / 400 for i in range(401)]
    axes[0].plot(grid, shifted_poisson_curve(mu, lam, grid), color="#386cb0", lw=2)
    for k, color in zip((1, 2, 3), SIGMA_COLORS):
        for side in (-1, 1):
            axes[0].axvline(mu + side * k * sigma, color=color, ls="--", lw=1)
    axes[0].set_title("before learning")
    axes[0].set_xlabel("final energy")
    axes[0].set_ylabel("probability density")

    if al:
        axes[1].hist(al, bins=40, color="#6baed6", alpha=0.85)
        if spec.log_scale:
            axes[1].set_yscale("log")
    for k, color in zip((1, 2, 3), SIGMA_COLORS):
        axes[1].axvline(mu - k * sigma, color=color, ls="--", lw=1)
    axes[1].set_title("after learning (all rates)")
    axes[1].set_xlabel("final energy")
    axes[1].set_ylabel("resets")
    fig.tight_layout()
    save_figure(fig, spec.out_path)
    plt.close(fig)


def main(argv=None) -> int:
    return run_script("distributions", render, argv, log_option=True)


if __name__ == "__main__":
    sys.exit(main())

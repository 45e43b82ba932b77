"""Sweep orchestration, deterministic seeding, persistence, exports.

A sweep runs the reset protocol over a learning-rate grid x seed grid on
one shared problem matrix.  Before-learning outcomes do not depend on the
learning rate (learning is off), so the BL stage executes once per seed and
is shared across the whole grid; a toy-plan test asserts the pooled
statistics are identical either way.

Everything is a pure function of (plan, master seed): cells are computed
independently, persisted atomically as they finish, and merged in key
order, so parallelism width and interruptions never change the output
bytes.  Output files (UTF-8, '.' decimal):

    runs.csv          stage,alpha,seed,reset,final_energy,fixed_point
    fingerprints.csv  stage,alpha,seed,reset,fingerprint,w0_fixed
                      (hex fingerprints plus problem-dynamics stability;
                      auxiliary, lets scores be recomputed from disk)
    scores.csv        alpha,novelty,value,convergence,appropriateness,
                      p_1sigma,p_2sigma,p_3sigma,regime
    baseline.json     mu_BL, sigma_BL, lambda, sample_count, min, max
    weights_initial.csv   N x N reals (the shared problem matrix)
    manifest.json     plan echo, master seed, code version, completion map

BL rows carry alpha = 0.0 (they are learning-rate independent).
"""

from __future__ import annotations

import json
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, asdict
from pathlib import Path

import numpy as np

from . import __version__ as _VERSION
from .errors import ConfigurationError
from .metrics import (
    BaselineFit,
    CreativityScores,
    EnergySample,
    fit_baseline,
    score_alpha,
)
from .rng import RngStream, spawn
from .selfopt import (
    SoConfig,
    SoResult,
    Stage,
    attractor_set,
    run_so,
)
from .weights import ModularSpec, modular_weights

__all__ = [
    "SweepPlan",
    "SweepDataset",
    "derive_seed",
    "default_alpha_grid",
    "run_sweep",
    "effort_tradeoff",
    "export",
    "EffortReport",
]

# Reserved alpha index for the learning-free BL stage in seed derivation.
BL_ALPHA_KEY = 0xFFFFFFFF

_STAGE_KEY = {Stage.BEFORE_LEARNING: 0, Stage.LEARNING: 1, Stage.AFTER_LEARNING: 2}


def derive_seed(
    master: int, alpha_index: int, seed_index: int, stage: Stage, reset: int = 0
) -> RngStream:
    """Independent stream for one (alpha, seed, stage, reset) cell.

    Injective over the index tuple and stable across releases: the tuple is
    the SeedSequence spawn key, nothing else enters.
    """
    return spawn(master, alpha_index, seed_index, _STAGE_KEY[stage], reset)


def default_alpha_grid(points: int = 72, lo: float = 1e-9, hi: float = 1e-4) -> tuple[float, ...]:
    """Log-spaced learning-rate grid; 72 points spans the reference axis,
    the 12-point desk preset covers the same range."""
    if points < 1:
        raise ConfigurationError("grid needs at least one point")
    return tuple(float(a) for a in np.logspace(np.log10(lo), np.log10(hi), points))


@dataclass(frozen=True)
class SweepPlan:
    alphas: tuple[float, ...]
    seeds: int
    resets_per_stage: int
    network: ModularSpec
    steps_per_reset: int
    out_dir: str | None = None
    jobs: int = 1
    master_seed: int = 0

    def __post_init__(self):
        if not self.alphas:
            raise ConfigurationError("alpha grid must be non-empty")
        if self.seeds < 1 or self.resets_per_stage < 1:
            raise ConfigurationError("seed count and resets per stage must be >= 1")
        if self.steps_per_reset < 1:
            raise ConfigurationError("steps_per_reset must be >= 1")
        if self.jobs < 1:
            raise ConfigurationError("jobs must be >= 1")
        object.__setattr__(self, "alphas", tuple(float(a) for a in self.alphas))

    def echo(self) -> dict:
        d = asdict(self)
        d["network"] = asdict(self.network)
        return d


@dataclass
class SweepDataset:
    plan: SweepPlan
    samples: list[EnergySample]
    fingerprints: dict
    fit: BaselineFit
    scores: list[CreativityScores]
    provenance: dict

    def bl_energies(self) -> np.ndarray:
        return np.array([s.energy for s in self.samples if s.stage == "BL"])

    def al_energies(self, alpha: float) -> np.ndarray:
        return np.array(
            [s.energy for s in self.samples if s.stage == "AL" and s.alpha == alpha]
        )


# --------------------------------------------------------------------------
# cell execution
# --------------------------------------------------------------------------


def _bl_cell(spec: ModularSpec, master: int, seed_idx: int, resets: int, steps: int):
    w0 = modular_weights(spec)
    config = SoConfig(
        alpha=0.0,
        steps_per_reset=steps,
        resets_per_stage=resets,
        stages=(Stage.BEFORE_LEARNING,),
    )

    def factory(stage, r):
        return derive_seed(master, BL_ALPHA_KEY, seed_idx, stage, r)

    return run_so(w0, config, rng_factory=factory)


def _lal_cell(
    spec: ModularSpec,
    master: int,
    alpha: float,
    alpha_idx: int,
    seed_idx: int,
    resets: int,
    steps: int,
):
    w0 = modular_weights(spec)
    config = SoConfig(
        alpha=alpha,
        steps_per_reset=steps,
        resets_per_stage=resets,
        stages=(Stage.LEARNING, Stage.AFTER_LEARNING),
    )

    def factory(stage, r):
        return derive_seed(master, alpha_idx, seed_idx, stage, r)

    return run_so(w0, config, rng_factory=factory)


def _cell_rows(result: SoResult, alpha: float, seed_idx: int):
    rows = []
    for rec in result.records:
        rows.append(
            (
                rec.stage,
                float(alpha),
                seed_idx,
                rec.reset,
                rec.final_energy,
                rec.fixed_point,
                rec.fingerprint,
                rec.w0_fixed_point,
            )
        )
    return rows


def _run_cell(args):
    kind = args[0]
    if kind == "bl":
        _, spec, master, seed_idx, resets, steps = args
        result = _bl_cell(spec, master, seed_idx, resets, steps)
        return ("bl", seed_idx), _cell_rows(result, 0.0, seed_idx)
    _, spec, master, alpha, alpha_idx, seed_idx, resets, steps = args
    result = _lal_cell(spec, master, alpha, alpha_idx, seed_idx, resets, steps)
    return ("lal", alpha_idx, seed_idx), _cell_rows(result, alpha, seed_idx)


# --------------------------------------------------------------------------
# persistence
# --------------------------------------------------------------------------

_RUNS_HEADER = "stage,alpha,seed,reset,final_energy,fixed_point\n"
_FP_HEADER = "stage,alpha,seed,reset,fingerprint,w0_fixed\n"
_SCORES_HEADER = (
    "alpha,novelty,value,convergence,appropriateness,p_1sigma,p_2sigma,p_3sigma,regime\n"
)


def _cell_path(cells_dir: Path, key) -> Path:
    if key[0] == "bl":
        return cells_dir / f"bl-s{key[1]:05d}.csv"
    return cells_dir / f"lal-a{key[1]:03d}-s{key[2]:05d}.csv"


def _write_cell(path: Path, rows) -> None:
    tmp = path.with_suffix(".tmp")
    with open(tmp, "w", encoding="utf-8") as f:
        f.write("stage,alpha,seed,reset,final_energy,fixed_point,fingerprint,w0_fixed\n")
        for stage, alpha, seed_idx, reset, energy, fixed, fp, w0f in rows:
            f.write(
                f"{stage},{alpha!r},{seed_idx},{reset},{energy!r},{int(fixed)},{fp.hex()},{int(w0f)}\n"
            )
    os.replace(tmp, path)


def _read_cell(path: Path):
    rows = []
    with open(path, encoding="utf-8") as f:
        next(f)
        for line in f:
            stage, alpha, seed_idx, reset, energy, fixed, fp, w0f = line.rstrip("\n").split(",")
            rows.append(
                (
                    stage,
                    float(alpha),
                    int(seed_idx),
                    int(reset),
                    float(energy),
                    bool(int(fixed)),
                    bytes.fromhex(fp),
                    bool(int(w0f)),
                )
            )
    return rows


def save_weights_csv(path, weights) -> None:
    np.savetxt(path, np.asarray(weights, dtype=np.float64), delimiter=",", fmt="%.17g")


def load_weights_csv(path) -> np.ndarray:
    w = np.loadtxt(path, delimiter=",", dtype=np.float64)
    if w.ndim == 1:  # 1x1 corner case
        w = w.reshape(1, 1)
    return w


def write_runs_csv(path, rows) -> None:
    with open(path, "w", encoding="utf-8") as f:
        f.write(_RUNS_HEADER)
        for stage, alpha, seed_idx, reset, energy, fixed, _fp, _w0f in rows:
            f.write(f"{stage},{alpha!r},{seed_idx},{reset},{energy!r},{int(fixed)}\n")


def read_runs_csv(path):
    """Rows from a runs.csv (fingerprint field absent -> None)."""
    rows = []
    with open(path, encoding="utf-8") as f:
        header = next(f).rstrip("\n")
        if header != _RUNS_HEADER.rstrip("\n"):
            raise ConfigurationError(
                f"unexpected runs.csv header {header!r}; expected {_RUNS_HEADER.strip()!r}"
            )
        for line in f:
            stage, alpha, seed_idx, reset, energy, fixed = line.rstrip("\n").split(",")
            rows.append(
                (stage, float(alpha), int(seed_idx), int(reset), float(energy),
                 bool(int(fixed)), None, None)
            )
    return rows


def read_fingerprints_csv(path):
    out = {}
    with open(path, encoding="utf-8") as f:
        next(f)
        for line in f:
            stage, alpha, seed_idx, reset, fp, w0f = line.rstrip("\n").split(",")
            out[(stage, float(alpha), int(seed_idx), int(reset))] = (
                bytes.fromhex(fp),
                bool(int(w0f)),
            )
    return out


def _write_fingerprints_csv(path, rows) -> None:
    with open(path, "w", encoding="utf-8") as f:
        f.write(_FP_HEADER)
        for stage, alpha, seed_idx, reset, _energy, _fixed, fp, w0f in rows:
            f.write(f"{stage},{alpha!r},{seed_idx},{reset},{fp.hex()},{int(w0f)}\n")


def write_scores_csv(path, scores) -> None:
    with open(path, "w", encoding="utf-8") as f:
        f.write(_SCORES_HEADER)
        for sc in scores:
            f.write(
                f"{sc.alpha!r},{sc.novelty!r},{sc.value!r},{sc.convergence!r},"
                f"{sc.appropriateness!r},{sc.p_1sigma!r},{sc.p_2sigma!r},{sc.p_3sigma!r},"
                f"{sc.regime.value}\n"
            )


def write_baseline_json(path, fit: BaselineFit) -> None:
    payload = {
        "mu_BL": fit.mu,
        "sigma_BL": fit.sigma,
        "lambda": fit.lam,
        "sample_count": fit.count,
        "min": fit.e_min,
        "max": fit.e_max,
    }
    with open(path, "w", encoding="utf-8") as f:
        json.dump(payload, f, indent=2, sort_keys=True)
        f.write("\n")


def read_baseline_json(path) -> BaselineFit:
    with open(path, encoding="utf-8") as f:
        d = json.load(f)
    return BaselineFit(
        mu=d["mu_BL"],
        sigma=d["sigma_BL"],
        lam=d["lambda"],
        count=d["sample_count"],
        e_min=d["min"],
        e_max=d["max"],
    )


# --------------------------------------------------------------------------
# the sweep
# --------------------------------------------------------------------------


def _compute_scores(rows):
    """Baseline fit plus per-alpha scores from flat sample rows.

    The learning-rate grid and seed set are read off the rows, so the same
    code scores an in-memory sweep and a runs.csv reloaded from disk.
    """
    bl_energies = [r[4] for r in rows if r[0] == "BL"]
    bl_fps = {r[6] for r in rows if r[0] == "BL" and r[6] is not None and r[5]}
    fit = fit_baseline(np.array(bl_energies), fingerprints=bl_fps or None)
    al_rows = [r for r in rows if r[0] == "AL"]
    alphas = sorted({r[1] for r in al_rows})
    scores = []
    for alpha in alphas:
        mine = [r for r in al_rows if r[1] == alpha]
        by_seed = []
        fps = []
        for seed_idx in sorted({r[2] for r in mine}):
            cell = [r for r in mine if r[2] == seed_idx]
            by_seed.append(np.array([r[4] for r in cell]))
            fps.extend(r[6] if r[5] else None for r in cell)
        scores.append(score_alpha(alpha, by_seed, fit, fps))
    return fit, scores


def run_sweep(plan: SweepPlan, *, progress=None, _max_cells: int | None = None) -> SweepDataset:
    """Execute (or resume) the full sweep described by ``plan``.

    Completed cells found in the output directory are trusted and skipped;
    the merged outputs are byte-identical whether or not the sweep was
    interrupted, and for any parallelism width.
    """
    t_start = time.time()
    out_dir = Path(plan.out_dir) if plan.out_dir else None
    cells_dir = None
    if out_dir is not None:
        cells_dir = out_dir / "cells"
        cells_dir.mkdir(parents=True, exist_ok=True)

    jobs: list[tuple] = []
    for seed_idx in range(plan.seeds):
        jobs.append(("bl", plan.network, plan.master_seed, seed_idx,
                     plan.resets_per_stage, plan.steps_per_reset))
    for alpha_idx, alpha in enumerate(plan.alphas):
        for seed_idx in range(plan.seeds):
            jobs.append(("lal", plan.network, plan.master_seed, alpha, alpha_idx,
                         seed_idx, plan.resets_per_stage, plan.steps_per_reset))

    def job_key(args):
        if args[0] == "bl":
            return ("bl", args[3])
        return ("lal", args[4], args[5])

    results: dict[tuple, list] = {}
    pending = []
    for args in jobs:
        key = job_key(args)
        if cells_dir is not None:
            path = _cell_path(cells_dir, key)
            if path.exists():
                results[key] = _read_cell(path)
                continue
        pending.append(args)

    if _max_cells is not None:
        pending = pending[: max(0, _max_cells - len(results))]

    done_count = len(results)

    def consume(key, rows):
        nonlocal done_count
        if cells_dir is not None:  # persist first, then count as complete
            _write_cell(_cell_path(cells_dir, key), rows)
        results[key] = rows
        done_count += 1
        if progress is not None:
            progress(done_count, len(jobs))

    def write_manifest(extra):
        if out_dir is None:
            return
        manifest = {
            "plan": plan.echo(),
            "master_seed": plan.master_seed,
            "code_version": _VERSION,
            "completion": {
                "bl": sorted(k[1] for k in results if k[0] == "bl"),
                "cells": sorted([k[1], k[2]] for k in results if k[0] == "lal"),
            },
        }
        manifest.update(extra)
        with open(out_dir / "manifest.json", "w", encoding="utf-8") as f:
            json.dump(manifest, f, indent=2, sort_keys=True)
            f.write("\n")

    try:
        if plan.jobs > 1 and len(pending) > 1:
            with ProcessPoolExecutor(max_workers=plan.jobs) as pool:
                for key, rows in pool.map(_run_cell, pending):
                    consume(key, rows)
        else:
            for args in pending:
                key, rows = _run_cell(args)
                consume(key, rows)
    except OSError:
        # surface the failure but leave a partial-result manifest behind so
        # the completed cells are discoverable and the sweep can resume
        write_manifest({"partial": True})
        raise

    if _max_cells is not None and len(results) < len(jobs):
        raise InterruptedError(
            f"sweep stopped early after {len(results)} of {len(jobs)} cells"
        )

    # deterministic merge order: BL by seed, then grid cells by (alpha, seed)
    ordered_rows: list = []
    for seed_idx in range(plan.seeds):
        ordered_rows.extend(results[("bl", seed_idx)])
    for alpha_idx in range(len(plan.alphas)):
        for seed_idx in range(plan.seeds):
            ordered_rows.extend(results[("lal", alpha_idx, seed_idx)])

    fit, scores = _compute_scores(ordered_rows)
    provenance = {
        "plan": plan.echo(),
        "master_seed": plan.master_seed,
        "code_version": _VERSION,
        "wall_time_s": round(time.time() - t_start, 3),
    }

    samples = [
        EnergySample(stage=r[0], alpha=r[1], seed=r[2], reset=r[3], energy=r[4])
        for r in ordered_rows
    ]
    fingerprints = {(r[0], r[1], r[2], r[3]): (r[6], r[7]) for r in ordered_rows}
    dataset = SweepDataset(
        plan=plan,
        samples=samples,
        fingerprints=fingerprints,
        fit=fit,
        scores=scores,
        provenance=provenance,
    )

    if out_dir is not None:
        write_runs_csv(out_dir / "runs.csv", ordered_rows)
        _write_fingerprints_csv(out_dir / "fingerprints.csv", ordered_rows)
        write_scores_csv(out_dir / "scores.csv", scores)
        write_baseline_json(out_dir / "baseline.json", fit)
        save_weights_csv(out_dir / "weights_initial.csv", modular_weights(plan.network))
        write_manifest({"wall_time_s": provenance["wall_time_s"]})
    return dataset


# --------------------------------------------------------------------------
# long-horizon effort run
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class EffortReport:
    alpha: float
    resets_per_stage: int
    mu_bl: float
    sigma_bl: float
    mean_al: float
    convergence: float
    converged_below_baseline: bool


def effort_tradeoff(
    w0: np.ndarray,
    alpha: float,
    resets_per_stage: int,
    steps_per_reset: int,
    seed: int = 0,
    *,
    engine: str = "auto",
) -> tuple[SoResult, EffortReport]:
    """Single long-horizon run reporting whether AL converged below the
    baseline mean (small learning rates need large reset budgets)."""
    if alpha <= 0.0:
        raise ConfigurationError("effort run needs alpha > 0")
    config = SoConfig(
        alpha=alpha, steps_per_reset=steps_per_reset, resets_per_stage=resets_per_stage
    )
    result = run_so(w0, config, seed, engine=engine)
    bl = result.stage_energies(Stage.BEFORE_LEARNING)
    al = result.stage_energies(Stage.AFTER_LEARNING)
    fit = fit_baseline(bl)
    sigma_al = float(np.std(al))
    conv = float(np.clip(1.0 - sigma_al / fit.sigma, 0.0, 1.0))
    mean_al = float(np.mean(al))
    report = EffortReport(
        alpha=alpha,
        resets_per_stage=resets_per_stage,
        mu_bl=fit.mu,
        sigma_bl=fit.sigma,
        mean_al=mean_al,
        convergence=conv,
        converged_below_baseline=bool(conv >= 0.9 and mean_al < fit.mu),
    )
    return result, report


# --------------------------------------------------------------------------
# figure-family exports
# --------------------------------------------------------------------------

ARTIFACTS = ("energy_scatter", "distributions", "scores_curve", "pareto", "weights_heatmap")


def export(data_dir, artifact: str, dest_dir) -> list:
    """Write the CSV/JSON files backing one figure family.

    Consumes a dataset directory produced by the sweep or a single run;
    missing inputs are named explicitly.
    """
    from .metrics import novelty_of_energy, value_of_energy  # local: optional deps stay thin

    data_dir = Path(data_dir)
    dest_dir = Path(dest_dir)
    dest_dir.mkdir(parents=True, exist_ok=True)
    if artifact not in ARTIFACTS:
        raise ConfigurationError(f"unknown artifact {artifact!r}; expected one of {ARTIFACTS}")

    def need(name: str) -> Path:
        p = data_dir / name
        if not p.exists():
            raise ConfigurationError(f"{artifact} export needs {name} in {data_dir}")
        return p

    written: list[Path] = []

    def out(name: str) -> Path:
        p = dest_dir / name
        written.append(p)
        return p

    if artifact == "energy_scatter":
        rows = read_runs_csv(need("runs.csv"))
        with open(out("energy_scatter.csv"), "w", encoding="utf-8") as f:
            f.write("stage,reset,energy\n")
            for stage, _alpha, _seed, reset, energy, *_rest in rows:
                f.write(f"{stage},{reset},{energy!r}\n")
    elif artifact == "distributions":
        rows = read_runs_csv(need("runs.csv"))
        fit = read_baseline_json(need("baseline.json"))
        with open(out("bl_energies.csv"), "w", encoding="utf-8") as f:
            f.write("energy\n")
            for r in rows:
                if r[0] == "BL":
                    f.write(f"{r[4]!r}\n")
        with open(out("al_energies.csv"), "w", encoding="utf-8") as f:
            f.write("alpha,seed,reset,energy\n")
            for r in rows:
                if r[0] == "AL":
                    f.write(f"{r[1]!r},{r[2]},{r[3]},{r[4]!r}\n")
        write_baseline_json(out("baseline.json"), fit)
    elif artifact == "scores_curve":
        src = need("scores.csv")
        out_path = out("scores.csv")
        out_path.write_bytes(src.read_bytes())
    elif artifact == "pareto":
        fit = read_baseline_json(need("baseline.json"))
        grid = np.linspace(fit.e_min - 2.0 * fit.sigma, fit.e_max + 2.0 * fit.sigma, 512)
        with open(out("pareto_bl.csv"), "w", encoding="utf-8") as f:
            f.write("energy,novelty,value\n")
            for e in grid:
                f.write(
                    f"{float(e)!r},{novelty_of_energy(e, fit)!r},{value_of_energy(e, fit)!r}\n"
                )
        scores_path = need("scores.csv")
        with open(scores_path, encoding="utf-8") as f, open(
            out("pareto_al.csv"), "w", encoding="utf-8"
        ) as g:
            next(f)
            g.write("alpha,novelty,value\n")
            for line in f:
                parts = line.rstrip("\n").split(",")
                g.write(f"{parts[0]},{parts[1]},{parts[2]}\n")
    elif artifact == "weights_heatmap":
        for name in ("weights_initial.csv", "weights_learned.csv"):
            src = data_dir / name
            if not src.exists():
                raise ConfigurationError(f"weights_heatmap export needs {name} in {data_dir}")
            out(name).write_bytes(src.read_bytes())
    return written

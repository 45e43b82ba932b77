"""Command-line front door.

One subcommand per workflow: weight generation, single runs, sweeps, the
long-horizon effort run, metric recomputation, the associative-memory and
traveling-salesman demos, and figure-data export.  Flags mirror the model
symbols (--alpha, --steps = T, --resets = R, --n, --k, --p) so runs can be
read against the derivation they implement.

Exit codes: 0 success, 1 configuration/usage error, 2 runtime failure.
Progress goes to stderr; stdout stays machine-readable.  The environment
variable SO_LAB_MASTER_SEED overrides the default master seed when a
command's --seed flag is not given.
"""

from __future__ import annotations

import argparse
import functools
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .dynamics import relax
from .errors import ConfigurationError, SolabError
from .experiment import (
    EffortReport,
    SweepPlan,
    default_alpha_grid,
    effort_tradeoff,
    export,
    load_weights_csv,
    read_fingerprints_csv,
    read_runs_csv,
    run_sweep,
    save_weights_csv,
    write_baseline_json,
    write_runs_csv,
    write_scores_csv,
)
from .experiment import _compute_scores, _write_fingerprints_csv  # shared pipeline
from .rng import make_rng
from .selfopt import DEFAULT_STAGES, SoConfig, Stage, run_so, stage_from_label
from .tsp import (
    DecodeFailure,
    TspInstance,
    brute_force_tour,
    decode_tour,
    encode_tour,
    random_tsp_instance,
    tour_length,
    tsp_weights,
)
from .weights import ModularSpec, hebbian_store, modular_weights, random_patterns

_WIDTH_FORMATTER = functools.partial(argparse.HelpFormatter, width=96)


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # bad flags -> usage text, exit 1
        raise _UsageError(f"{self.prog}: {message}\n{self.format_usage()}")


def _default_seed() -> int:
    env = os.environ.get("SO_LAB_MASTER_SEED")
    return int(env) if env else 0


def _progress(prefix: str):
    def cb(done, total):
        print(f"{prefix}: {done}/{total}", file=sys.stderr, flush=True)

    return cb


def build_parser() -> _Parser:
    parser = _Parser(
        prog="solab",
        description="Self-optimizing Hopfield network laboratory.",
        formatter_class=_WIDTH_FORMATTER,
    )
    parser.add_argument("--version", action="version", version=f"solab {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")

    def add(name: str, help_text: str) -> argparse.ArgumentParser:
        p = sub.add_parser(name, help=help_text, formatter_class=_WIDTH_FORMATTER)
        p.add_argument("--config", default=None, metavar="FILE",
                       help="JSON settings file; its values override the flags")
        p.add_argument("--dump-config", default=None, metavar="FILE",
                       help="write the effective settings as JSON and continue")
        return p

    p = add("gen-weights", "generate a problem matrix and write it as CSV")
    p.add_argument("--kind", choices=("modular", "hebbian", "tsp"), default="modular",
                   help="matrix family (default: modular)")
    p.add_argument("--n", type=int, default=100, help="network size (default: 100)")
    p.add_argument("--k", type=int, default=5, help="module size for modular (default: 5)")
    p.add_argument("--p", type=float, default=0.1,
                   help="inter-module magnitude for modular (default: 0.1)")
    p.add_argument("--patterns", type=int, default=5,
                   help="stored pattern count for hebbian (default: 5)")
    p.add_argument("--cities", type=int, default=5, help="city count for tsp (default: 5)")
    p.add_argument("--seed", type=int, default=None, help="generator seed (default: 0 or env)")
    p.add_argument("--out", required=True, help="output weights CSV path")
    p.add_argument("--out-bias", default=None, help="output bias CSV path (tsp only)")

    p = add("run-so", "run the reset protocol on one modular instance")
    p.add_argument("--n", type=int, default=100, help="network size (default: 100)")
    p.add_argument("--k", type=int, default=5, help="module size (default: 5)")
    p.add_argument("--p", type=float, default=0.1, help="inter-module magnitude (default: 0.1)")
    p.add_argument("--w0", default=None, help="load the problem matrix from CSV instead")
    p.add_argument("--alpha", type=float, default=5e-7, help="learning rate (default: 5e-7)")
    p.add_argument("--steps", type=int, default=None,
                   help="asynchronous updates per reset T (default: 10*n)")
    p.add_argument("--resets", type=int, default=1000, help="resets per stage R (default: 1000)")
    p.add_argument("--stages", default="BL,L,AL",
                   help="comma-separated stage order (default: BL,L,AL)")
    p.add_argument("--seed", type=int, default=None, help="run seed (default: 0 or env)")
    p.add_argument("--engine", choices=("auto", "fast", "naive", "big"), default="auto",
                   help="reset engine (default: auto)")
    p.add_argument("--out", required=True, help="output runs CSV path")
    p.add_argument("--dump-fingerprints", default=None, help="also write a fingerprints CSV")
    p.add_argument("--dump-weights", default=None,
                   help="directory for weights_initial.csv / weights_learned.csv")

    p = add("sweep", "learning-rate x seed sweep with scores and persistence")
    p.add_argument("--out", required=True, help="output dataset directory")
    p.add_argument("--preset", choices=("desk", "paper"), default="desk",
                   help="desk: 12 rates x 25 seeds x 500 resets; paper: 72 x 2000 x 1000")
    p.add_argument("--alphas", type=int, default=None, help="learning-rate grid size")
    p.add_argument("--alpha-min", type=float, default=1e-9, help="grid lower end (default: 1e-9)")
    p.add_argument("--alpha-max", type=float, default=1e-4, help="grid upper end (default: 1e-4)")
    p.add_argument("--seeds", type=int, default=None, help="seed count")
    p.add_argument("--resets", type=int, default=None, help="resets per stage")
    p.add_argument("--steps", type=int, default=None, help="updates per reset (default: 10*n)")
    p.add_argument("--n", type=int, default=100, help="network size (default: 100)")
    p.add_argument("--k", type=int, default=5, help="module size (default: 5)")
    p.add_argument("--p", type=float, default=0.1, help="inter-module magnitude (default: 0.1)")
    p.add_argument("--seed", type=int, default=None, help="master seed (default: 0 or env)")
    p.add_argument("--jobs", type=int, default=1, help="worker processes (default: 1)")

    p = add("effort", "long-horizon run showing that extra resets pay off")
    p.add_argument("--n", type=int, default=100, help="network size (default: 100)")
    p.add_argument("--k", type=int, default=5, help="module size (default: 5)")
    p.add_argument("--p", type=float, default=0.1, help="inter-module magnitude (default: 0.1)")
    p.add_argument("--alpha", type=float, default=3e-8, help="learning rate (default: 3e-8)")
    p.add_argument("--resets", type=int, default=17000, help="resets per stage (default: 17000)")
    p.add_argument("--steps", type=int, default=None, help="updates per reset (default: 10*n)")
    p.add_argument("--seed", type=int, default=None, help="run seed (default: 0 or env)")
    p.add_argument("--out", default=None, help="optional runs CSV path")

    p = add("metrics", "recompute baseline and scores from a runs CSV")
    p.add_argument("--runs", required=True, help="runs.csv produced by run-so or sweep")
    p.add_argument("--fingerprints", default=None,
                   help="matching fingerprints.csv (optional, sharpens novelty)")
    p.add_argument("--out", required=True, help="output directory for scores.csv/baseline.json")

    p = add("recall-demo", "associative-memory recall rate under corruption")
    p.add_argument("--n", type=int, default=100, help="network size (default: 100)")
    p.add_argument("--patterns", type=int, default=5, help="stored patterns (default: 5)")
    p.add_argument("--corrupt", type=float, default=0.1,
                   help="corrupted bit fraction per probe (default: 0.1)")
    p.add_argument("--trials", type=int, default=200, help="probe count (default: 200)")
    p.add_argument("--steps", type=int, default=None, help="updates per probe (default: 20*n)")
    p.add_argument("--seed", type=int, default=None, help="demo seed (default: 0 or env)")

    p = add("tsp-demo", "tour encoding demo: reference decode or a full solve")
    p.add_argument("--cities", type=int, default=4, help="city count (default: 4)")
    p.add_argument("--preset", choices=("eq4", "random"), default="random",
                   help="eq4: decode the annotated four-city reference state")
    p.add_argument("--distances", default=None, metavar="CSV",
                   help="square distance matrix CSV instead of a random instance")
    p.add_argument("--restarts", type=int, default=100, help="relaxation restarts (default: 100)")
    p.add_argument("--steps", type=int, default=None,
                   help="updates per restart (default: 40*n^2)")
    p.add_argument("--seed", type=int, default=None, help="demo seed (default: 0 or env)")

    p = add("export", "write the CSV/JSON files backing one figure family")
    p.add_argument("--data", required=True, help="dataset directory (sweep or run-so output)")
    p.add_argument(
        "--artifact", required=True,
        choices=("energy_scatter", "distributions", "scores_curve", "pareto", "weights_heatmap"),
        help="figure family to export",
    )
    p.add_argument("--out", required=True, help="destination directory")
    return parser


# --------------------------------------------------------------------------
# subcommand bodies
# --------------------------------------------------------------------------


def _seed_of(args) -> int:
    return args.seed if args.seed is not None else _default_seed()


def _cmd_gen_weights(args) -> int:
    seed = _seed_of(args)
    if args.kind == "modular":
        w = modular_weights(ModularSpec(n=args.n, k=args.k, p=args.p, seed=seed))
        save_weights_csv(args.out, w)
        print(f"modular weights n={args.n} k={args.k} p={args.p} seed={seed} -> {args.out}")
    elif args.kind == "hebbian":
        z = random_patterns(args.patterns, args.n, make_rng(seed))
        w = hebbian_store(z)
        save_weights_csv(args.out, w)
        print(f"hebbian weights n={args.n} patterns={args.patterns} seed={seed} -> {args.out}")
    else:
        inst = random_tsp_instance(args.cities, make_rng(seed))
        w, bias = tsp_weights(inst)
        save_weights_csv(args.out, w)
        bias_path = args.out_bias or str(Path(args.out).with_name("bias.csv"))
        np.savetxt(bias_path, bias, delimiter=",", fmt="%.17g")
        print(
            f"tsp weights cities={args.cities} n={args.cities ** 2} seed={seed} "
            f"-> {args.out}, {bias_path}"
        )
    return 0


def _stage_tuple(spec: str) -> tuple[Stage, ...]:
    return tuple(stage_from_label(tok.strip()) for tok in spec.split(",") if tok.strip())


def _cmd_run_so(args) -> int:
    seed = _seed_of(args)
    if args.w0:
        w0 = load_weights_csv(args.w0)
        n = w0.shape[0]
    else:
        n = args.n
        w0 = modular_weights(ModularSpec(n=n, k=args.k, p=args.p, seed=seed))
    steps = args.steps if args.steps is not None else 10 * n
    config = SoConfig(
        alpha=args.alpha,
        steps_per_reset=steps,
        resets_per_stage=args.resets,
        stages=_stage_tuple(args.stages) or DEFAULT_STAGES,
    )
    result = run_so(w0, config, seed, engine=args.engine)
    rows = [
        (r.stage, args.alpha, 0, r.reset, r.final_energy, r.fixed_point, r.fingerprint,
         r.w0_fixed_point)
        for r in result.records
    ]
    write_runs_csv(args.out, rows)
    if args.dump_fingerprints:
        _write_fingerprints_csv(args.dump_fingerprints, rows)
    if args.dump_weights:
        out = Path(args.dump_weights)
        out.mkdir(parents=True, exist_ok=True)
        save_weights_csv(out / "weights_initial.csv", w0)
        save_weights_csv(out / "weights_learned.csv", result.weights_learned)
    for stage in config.stages:
        es = result.stage_energies(stage)
        fixed = np.mean([r.fixed_point for r in result.stage_records(stage)])
        print(
            f"{stage.label}: resets={len(es)} mean_energy={es.mean():.3f} "
            f"sd={es.std():.3f} fixed_point_rate={fixed:.3f}"
        )
    print(f"records -> {args.out}")
    return 0


def _cmd_sweep(args) -> int:
    seed = _seed_of(args)
    presets = {"desk": (12, 25, 500), "paper": (72, 2000, 1000)}
    grid_points, seeds, resets = presets[args.preset]
    grid_points = args.alphas if args.alphas is not None else grid_points
    seeds = args.seeds if args.seeds is not None else seeds
    resets = args.resets if args.resets is not None else resets
    steps = args.steps if args.steps is not None else 10 * args.n
    plan = SweepPlan(
        alphas=default_alpha_grid(grid_points, args.alpha_min, args.alpha_max),
        seeds=seeds,
        resets_per_stage=resets,
        network=ModularSpec(n=args.n, k=args.k, p=args.p, seed=seed),
        steps_per_reset=steps,
        out_dir=args.out,
        jobs=args.jobs,
        master_seed=seed,
    )
    dataset = run_sweep(plan, progress=_progress("sweep"))
    best = max(dataset.scores, key=lambda s: (s.p_3sigma, s.p_1sigma))
    print(
        f"baseline: mu={dataset.fit.mu:.3f} sigma={dataset.fit.sigma:.3f} "
        f"samples={dataset.fit.count}"
    )
    print(
        f"best alpha={best.alpha:.3e}: p_1sigma={best.p_1sigma:.3f} "
        f"p_2sigma={best.p_2sigma:.3f} p_3sigma={best.p_3sigma:.3f} regime={best.regime.value}"
    )
    print(f"dataset -> {args.out}")
    return 0


def _cmd_effort(args) -> int:
    seed = _seed_of(args)
    steps = args.steps if args.steps is not None else 10 * args.n
    w0 = modular_weights(ModularSpec(n=args.n, k=args.k, p=args.p, seed=seed))
    result, report = effort_tradeoff(
        w0, alpha=args.alpha, resets_per_stage=args.resets, steps_per_reset=steps, seed=seed
    )
    if args.out:
        rows = [
            (r.stage, args.alpha, 0, r.reset, r.final_energy, r.fixed_point, r.fingerprint,
             r.w0_fixed_point)
            for r in result.records
        ]
        write_runs_csv(args.out, rows)
        print(f"records -> {args.out}")
    print(
        f"alpha={report.alpha:.3e} resets={report.resets_per_stage}: "
        f"convergence={report.convergence:.3f} mean_AL={report.mean_al:.3f} "
        f"mu_BL={report.mu_bl:.3f} converged_below_baseline={report.converged_below_baseline}"
    )
    return 0


def _cmd_metrics(args) -> int:
    rows = read_runs_csv(args.runs)
    if args.fingerprints:
        fp = read_fingerprints_csv(args.fingerprints)
        rows = [
            r[:6] + fp.get((r[0], r[1], r[2], r[3]), (None, None))
            for r in rows
        ]
    fit, scores = _compute_scores(rows)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_baseline_json(out / "baseline.json", fit)
    write_scores_csv(out / "scores.csv", scores)
    print(f"baseline: mu={fit.mu:.3f} sigma={fit.sigma:.3f} samples={fit.count}")
    print(f"scores for {len(scores)} learning rates -> {out}")
    return 0


def _cmd_recall_demo(args) -> int:
    seed = _seed_of(args)
    rng = make_rng(seed)
    n = args.n
    steps = args.steps if args.steps is not None else 20 * n
    patterns = random_patterns(args.patterns, n, rng)
    w = hebbian_store(patterns)
    flip_count = max(1, round(args.corrupt * n))
    hits = 0
    for t in range(args.trials):
        target = patterns[t % args.patterns]
        probe = target.copy()
        bad = rng.choice(n, size=flip_count, replace=False)
        probe[bad] = -probe[bad]
        out = relax(probe, w, None, steps=steps, rng=rng)
        hits += bool(np.array_equal(out.state, target))
    rate = hits / args.trials
    capacity = 0.14 * n
    print(
        f"recall: n={n} patterns={args.patterns} (capacity ~{capacity:.0f}) "
        f"corrupt={args.corrupt:.2f} trials={args.trials} exact_recall_rate={rate:.3f}"
    )
    return 0


_EQ4_STATE = np.array(
    [0, 0, 1, 0, 1, 0, 0, 0, 0, 0, 0, 1, 0, 1, 0, 0], dtype=np.float64
) * 2.0 - 1.0
_EQ4_CITIES = "ABCD"


def _cmd_tsp_demo(args) -> int:
    seed = _seed_of(args)
    if args.preset == "eq4":
        tour = decode_tour(_EQ4_STATE, 4)
        if isinstance(tour, DecodeFailure):
            raise SolabError(f"reference state failed to decode: {tour}")
        names = " -> ".join(_EQ4_CITIES[x] for x in tour)
        print(f"reference four-city state decodes to tour {names}")
        assert names == "B -> D -> A -> C"
        return 0
    rng = make_rng(seed)
    if args.distances:
        inst = TspInstance(distances=np.loadtxt(args.distances, delimiter=","))
        n = inst.n
    else:
        n = args.cities
        inst = random_tsp_instance(n, rng)
    w, bias = tsp_weights(inst)
    steps = args.steps if args.steps is not None else 40 * n * n
    best_tour, best_len = None, np.inf
    valid = 0
    for _ in range(args.restarts):
        s0 = rng.integers(0, 2, size=n * n) * 2.0 - 1.0
        res = relax(s0, w, bias, steps=steps, rng=rng)
        tour = decode_tour(res.state, n)
        if isinstance(tour, DecodeFailure):
            continue
        valid += 1
        length = tour_length(tour, inst.distances)
        if length < best_len:
            best_tour, best_len = tour, length
    opt_tour, opt_len = brute_force_tour(inst.distances)
    print(
        f"tsp: cities={n} restarts={args.restarts} valid_decodes={valid} "
        f"best_length={best_len if best_tour else float('nan'):.4f} optimum={opt_len:.4f}"
    )
    if best_tour is not None:
        print(
            f"best tour {best_tour} "
            f"({'optimal' if abs(best_len - opt_len) < 1e-9 else 'suboptimal'})"
        )
    return 0


def _cmd_export(args) -> int:
    written = export(args.data, args.artifact, args.out)
    for path in written:
        print(f"wrote {path}")
    return 0


_COMMANDS = {
    "gen-weights": _cmd_gen_weights,
    "run-so": _cmd_run_so,
    "sweep": _cmd_sweep,
    "effort": _cmd_effort,
    "metrics": _cmd_metrics,
    "recall-demo": _cmd_recall_demo,
    "tsp-demo": _cmd_tsp_demo,
    "export": _cmd_export,
}


_CONTROL_KEYS = ("command", "config", "dump_config")


def _apply_config(args) -> None:
    """Merge a JSON settings file over the parsed flags.

    File keys use the flag destination names; unknown keys are rejected.
    ``--dump-config`` writes the effective settings, and feeding that file
    back through ``--config`` reproduces them exactly.
    """
    if getattr(args, "config", None):
        with open(args.config, encoding="utf-8") as f:
            overrides = json.load(f)
        for key, value in overrides.items():
            if key in _CONTROL_KEYS or not hasattr(args, key):
                raise ConfigurationError(f"unknown setting {key!r} in {args.config}")
            setattr(args, key, value)
    if getattr(args, "dump_config", None):
        effective = {k: v for k, v in vars(args).items() if k not in _CONTROL_KEYS}
        with open(args.dump_config, "w", encoding="utf-8") as f:
            json.dump(effective, f, indent=2, sort_keys=True)
            f.write("\n")


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as err:
        print(err, file=sys.stderr)
        return 1
    except SystemExit as err:  # --help / --version
        return int(err.code or 0)
    if not args.command:
        parser.print_help()
        return 1
    try:
        _apply_config(args)
        return _COMMANDS[args.command](args)
    except ConfigurationError as err:
        print(f"configuration error: {err}", file=sys.stderr)
        return 1
    except SolabError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    except OSError as err:
        print(f"i/o error: {err}", file=sys.stderr)
        return 2


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()

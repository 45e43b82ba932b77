import contextlib
import io
import os
from pathlib import Path

import numpy as np
import pytest

from solab.cli import build_parser, main
from solab.experiment import load_weights_csv, read_runs_csv

DATA = Path(__file__).parent / "data"


def run_cli(argv, env=None):
    saved = {}
    if env:
        for k, v in env.items():
            saved[k] = os.environ.get(k)
            os.environ[k] = v
    out, err = io.StringIO(), io.StringIO()
    try:
        with contextlib.redirect_stdout(out), contextlib.redirect_stderr(err):
            code = main(argv)
    finally:
        for k, v in saved.items():
            if v is None:
                os.environ.pop(k, None)
            else:
                os.environ[k] = v
    return code, out.getvalue(), err.getvalue()


def test_help_output_is_the_contract():
    # the snapshot is the documented flag surface; update it deliberately
    chunks = [build_parser().format_help()]
    for name in (
        "gen-weights", "run-so", "sweep", "effort",
        "metrics", "recall-demo", "tsp-demo", "export",
    ):
        code, out, _ = run_cli([name, "--help"])
        assert code == 0
        chunks.append(out)
    snapshot = (DATA / "cli_help.txt").read_text()
    assert ("\n" + "=" * 72 + "\n").join(chunks) == snapshot


def test_bad_flags_exit_one():
    code, _, err = run_cli(["run-so", "--bogus-flag"])
    assert code == 1
    assert "usage" in err
    code, _, _ = run_cli(["not-a-command"])
    assert code == 1
    code, _, _ = run_cli([])
    assert code == 1


def test_configuration_error_exits_one(tmp_path):
    # k does not divide n
    code, _, err = run_cli(
        ["gen-weights", "--n", "10", "--k", "3", "--out", str(tmp_path / "w.csv")]
    )
    assert code == 1
    assert "configuration error" in err


def test_missing_input_file_exits_two(tmp_path):
    code, _, err = run_cli(
        ["metrics", "--runs", str(tmp_path / "nope.csv"), "--out", str(tmp_path)]
    )
    assert code == 2


def test_gen_weights_modular(tmp_path):
    out = tmp_path / "w.csv"
    code, stdout, _ = run_cli(
        ["gen-weights", "--n", "20", "--k", "5", "--p", "0.2", "--seed", "7",
         "--out", str(out)]
    )
    assert code == 0 and str(out) in stdout
    w = load_weights_csv(out)
    assert w.shape == (20, 20)
    assert np.array_equal(w, w.T)


def test_run_so_writes_records_and_is_deterministic(tmp_path):
    argv = [
        "run-so", "--n", "20", "--k", "4", "--p", "0.2", "--alpha", "1e-4",
        "--steps", "100", "--resets", "5", "--seed", "3",
        "--out", str(tmp_path / "runs.csv"),
        "--dump-weights", str(tmp_path / "wts"),
        "--dump-fingerprints", str(tmp_path / "fp.csv"),
    ]
    code, stdout, _ = run_cli(argv)
    assert code == 0
    assert "BL:" in stdout and "AL:" in stdout
    rows = read_runs_csv(tmp_path / "runs.csv")
    assert len(rows) == 15
    assert (tmp_path / "wts" / "weights_initial.csv").exists()
    assert (tmp_path / "wts" / "weights_learned.csv").exists()
    first = (tmp_path / "runs.csv").read_bytes()
    run_cli(argv)
    assert (tmp_path / "runs.csv").read_bytes() == first


def test_metrics_from_runs(tmp_path):
    run_cli(
        ["run-so", "--n", "20", "--k", "4", "--alpha", "1e-4", "--steps", "100",
         "--resets", "6", "--seed", "1", "--out", str(tmp_path / "runs.csv"),
         "--dump-fingerprints", str(tmp_path / "fp.csv")]
    )
    code, stdout, _ = run_cli(
        ["metrics", "--runs", str(tmp_path / "runs.csv"),
         "--fingerprints", str(tmp_path / "fp.csv"), "--out", str(tmp_path / "m")]
    )
    assert code == 0
    assert (tmp_path / "m" / "scores.csv").exists()
    assert (tmp_path / "m" / "baseline.json").exists()
    header = (tmp_path / "m" / "scores.csv").read_text().splitlines()[0]
    assert header == (
        "alpha,novelty,value,convergence,appropriateness,"
        "p_1sigma,p_2sigma,p_3sigma,regime"
    )


def test_tsp_demo_reference_decode():
    code, stdout, _ = run_cli(["tsp-demo", "--preset", "eq4"])
    assert code == 0
    assert "B -> D -> A -> C" in stdout


def test_recall_demo_reports_rate():
    code, stdout, _ = run_cli(
        ["recall-demo", "--n", "50", "--patterns", "2", "--trials", "10", "--seed", "2"]
    )
    assert code == 0
    assert "exact_recall_rate=1.000" in stdout


def test_sweep_and_export_cli(tmp_path):
    out = tmp_path / "ds"
    code, stdout, _ = run_cli(
        ["sweep", "--out", str(out), "--alphas", "2", "--seeds", "2", "--resets", "4",
         "--steps", "80", "--n", "16", "--k", "4", "--p", "0.2", "--seed", "5"]
    )
    assert code == 0
    assert "best alpha" in stdout
    for name in ("runs.csv", "scores.csv", "baseline.json", "manifest.json"):
        assert (out / name).exists()
    code, stdout, _ = run_cli(
        ["export", "--data", str(out), "--artifact", "distributions",
         "--out", str(tmp_path / "figs")]
    )
    assert code == 0
    assert (tmp_path / "figs" / "bl_energies.csv").exists()


def test_env_master_seed_override(tmp_path):
    a, b, c = (tmp_path / x for x in ("a.csv", "b.csv", "c.csv"))
    run_cli(["gen-weights", "--n", "12", "--k", "3", "--out", str(a)],
            env={"SO_LAB_MASTER_SEED": "123"})
    run_cli(["gen-weights", "--n", "12", "--k", "3", "--out", str(b)],
            env={"SO_LAB_MASTER_SEED": "124"})
    run_cli(["gen-weights", "--n", "12", "--k", "3", "--seed", "123", "--out", str(c)])
    assert a.read_bytes() != b.read_bytes()
    assert a.read_bytes() == c.read_bytes()


def test_effort_cli_smoke(tmp_path):
    code, stdout, _ = run_cli(
        ["effort", "--n", "16", "--k", "4", "--alpha", "1e-3", "--resets", "20",
         "--steps", "80", "--seed", "4"]
    )
    assert code == 0
    assert "converged_below_baseline=" in stdout


def test_config_file_round_trip(tmp_path):
    # dump the effective settings, feed them back, get identical outputs
    out_a = tmp_path / "a.csv"
    out_b = tmp_path / "b.csv"
    dump = tmp_path / "settings.json"
    code, _, _ = run_cli(
        ["run-so", "--n", "16", "--k", "4", "--alpha", "2e-4", "--steps", "80",
         "--resets", "4", "--seed", "6", "--out", str(out_a),
         "--dump-config", str(dump)]
    )
    assert code == 0 and dump.exists()
    code, _, _ = run_cli(["run-so", "--config", str(dump), "--out", str(out_b)])
    assert code == 0
    # --config overrides the flag (including --out), so b.csv was not used
    assert not out_b.exists()
    second = out_a.read_bytes()
    run_cli(["run-so", "--config", str(dump)])
    assert out_a.read_bytes() == second


def test_config_file_rejects_unknown_keys(tmp_path):
    cfg = tmp_path / "bad.json"
    cfg.write_text('{"bogus_setting": 1}\n')
    code, _, err = run_cli(
        ["recall-demo", "--n", "20", "--patterns", "1", "--trials", "2",
         "--config", str(cfg)]
    )
    assert code == 1
    assert "bogus_setting" in err


def test_tsp_demo_distance_csv(tmp_path):
    d = tmp_path / "d.csv"
    d.write_text("0,1,2\n1,0,1\n2,1,0\n")
    code, stdout, _ = run_cli(
        ["tsp-demo", "--distances", str(d), "--restarts", "20", "--seed", "1"]
    )
    assert code == 0
    assert "cities=3" in stdout

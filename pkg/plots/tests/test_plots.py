"""The figure scripts consume only the simulation package's file formats,
so the fixtures below produce a real dataset through the command-line
interface and then drive every script against it."""

import subprocess
import sys
from pathlib import Path

import pytest

PLOTS = Path(__file__).resolve().parents[1]
SCRIPTS = {
    "energy_scatter": PLOTS / "plot_energy_scatter.py",
    "distributions": PLOTS / "plot_distributions.py",
    "scores_curve": PLOTS / "plot_scores_curve.py",
    "pareto": PLOTS / "plot_pareto.py",
    "weights_heatmap": PLOTS / "plot_weights_heatmap.py",
}


def cli(*argv):
    proc = subprocess.run(
        [sys.executable, "-m", "solab.cli", *argv], capture_output=True, text=True
    )
    assert proc.returncode == 0, proc.stderr
    return proc


def run_plot(name, in_dir, out_path, *extra):
    return subprocess.run(
        [sys.executable, str(SCRIPTS[name]), "--in", str(in_dir), "--out", str(out_path),
         *extra],
        capture_output=True,
        text=True,
    )


@pytest.fixture(scope="module")
def dataset(tmp_path_factory):
    """A small but complete dataset directory built via the CLI."""
    root = tmp_path_factory.mktemp("dataset")
    cli(
        "sweep", "--out", str(root), "--alphas", "3", "--seeds", "2", "--resets", "6",
        "--steps", "120", "--n", "20", "--k", "4", "--p", "0.2", "--seed", "9",
    )
    # pareto CSVs and the learned-weights dump come from export/run-so
    cli("export", "--data", str(root), "--artifact", "pareto", "--out", str(root))
    cli(
        "run-so", "--n", "20", "--k", "4", "--p", "0.2", "--alpha", "1e-4",
        "--steps", "120", "--resets", "6", "--seed", "9",
        "--out", str(root / "single_runs.csv"), "--dump-weights", str(root),
    )
    return root


@pytest.mark.parametrize("name", sorted(SCRIPTS))
def test_script_renders_and_is_deterministic(dataset, tmp_path, name):
    first = tmp_path / f"{name}_a.png"
    second = tmp_path / f"{name}_b.png"
    extra = ("--log",) if name == "distributions" else ()
    res = run_plot(name, dataset, first, *extra)
    assert res.returncode == 0, res.stderr
    assert first.exists() and first.stat().st_size > 1000
    res2 = run_plot(name, dataset, second, *extra)
    assert res2.returncode == 0, res2.stderr
    assert first.read_bytes() == second.read_bytes()


def test_malformed_input_names_columns(tmp_path):
    bad = tmp_path / "bad"
    bad.mkdir()
    (bad / "runs.csv").write_text("wrong,header\n1,2\n")
    res = run_plot("energy_scatter", bad, tmp_path / "x.png")
    assert res.returncode != 0
    assert "expected columns" in res.stderr
    assert "final_energy" in res.stderr


def test_missing_input_fails_with_name(tmp_path):
    empty = tmp_path / "empty"
    empty.mkdir()
    res = run_plot("pareto", empty, tmp_path / "x.png")
    assert res.returncode != 0
    assert "pareto_bl.csv" in res.stderr

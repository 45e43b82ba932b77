"""Shared plumbing for the figure scripts.

Every script reads files from a dataset directory produced by the
simulation package (``--in``), writes exactly one image (``--out``), and
never mutates its inputs.  Rendering is deterministic: fixed figure sizes,
the Agg backend, and pinned PNG metadata so re-rendering the same inputs
reproduces the same bytes.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from dataclasses import dataclass
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

STAGE_COLORS = {"BL": "#1f3b73", "L": "#d62728", "AL": "#6baed6"}
SIGMA_COLORS = ["#ffd92f", "#fc8d62", "#e31a1c"]  # 1, 2, 3 sigma lines


class SchemaError(Exception):
    """Input file does not match the documented column layout."""


@dataclass(frozen=True)
class FigureSpec:
    family: str
    in_dir: Path
    out_path: Path
    log_scale: bool = False


def make_parser(family: str, description: str, *, log_option: bool = False):
    parser = argparse.ArgumentParser(prog=f"plot_{family}", description=description)
    parser.add_argument("--in", dest="in_dir", required=True,
                        help="dataset directory with the input CSV/JSON files")
    parser.add_argument("--out", dest="out_path", required=True,
                        help="output image path (.png)")
    if log_option:
        parser.add_argument("--log", action="store_true",
                            help="logarithmic count axis for the distributions")
    return parser


def spec_from_args(family: str, args) -> FigureSpec:
    return FigureSpec(
        family=family,
        in_dir=Path(args.in_dir),
        out_path=Path(args.out_path),
        log_scale=getattr(args, "log", False),
    )


def read_csv_columns(path: Path, expected: tuple[str, ...]) -> dict[str, list[str]]:
    """Load a CSV whose header must equal ``expected`` (named-column check)."""
    if not path.exists():
        raise SchemaError(f"missing input file {path}")
    with open(path, encoding="utf-8") as f:
        reader = csv.reader(f)
        header = next(reader, None)
        if header != list(expected):
            raise SchemaError(
                f"{path}: expected columns {','.join(expected)}, found "
                f"{','.join(header) if header else 'an empty file'}"
            )
        columns: dict[str, list[str]] = {name: [] for name in expected}
        for row in reader:
            if len(row) != len(expected):
                raise SchemaError(f"{path}: row with {len(row)} fields, expected {len(expected)}")
            for name, value in zip(expected, row):
                columns[name].append(value)
    return columns


def read_baseline(path: Path) -> dict:
    if not path.exists():
        raise SchemaError(f"missing input file {path}")
    with open(path, encoding="utf-8") as f:
        data = json.load(f)
    for key in ("mu_BL", "sigma_BL", "lambda", "sample_count", "min", "max"):
        if key not in data:
            raise SchemaError(f"{path}: missing key {key!r}")
    return data


def save_figure(fig, out_path: Path) -> None:
    out_path = Path(out_path)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(out_path, metadata={"Software": "solab-plots"})


def run_script(family: str, render, argv=None, **parser_kwargs) -> int:
    parser = make_parser(family, render.__doc__ or family, **parser_kwargs)
    args = parser.parse_args(argv)
    spec = spec_from_args(family, args)
    try:
        render(spec)
    except SchemaError as err:
        print(f"input error: {err}", file=sys.stderr)
        return 1
    print(f"wrote {spec.out_path}")
    return 0

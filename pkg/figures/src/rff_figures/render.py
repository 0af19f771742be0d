"""Render the five standard figures from rff-lab CSV outputs.

Reads only the documented CSV schemas and never re-derives statistics; the
only transforms applied are axis scales.  ``render_figures <out-dir>``
discovers the CSVs by name in that directory and writes ``fig1.png`` through
``fig5.png`` next to them.
"""

from __future__ import annotations

import argparse
import csv
import sys
from dataclasses import dataclass, field
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

REQUIRED_COLUMNS = {
    "variance_profile.csv": (
        "delta_norm", "var_tilde_times_D", "var_breve_times_D", "kernel_value",
    ),
    "beta_coefficients.csv": ("variant", "d", "beta"),
    "mean_max_error.csv": ("variant", "D", "mean_max_abs_error"),
    "expected_max.csv": ("variant", "D", "expected_max_bound", "integrated_bound"),
    "survival.csv": ("variant", "D", "epsilon", "survival"),
    "uniform_bounds.csv": ("variant", "form", "epsilon", "bound_value"),
    "mmd_error_mean.csv": ("variant", "D", "mean_abs_error"),
}

FIGURE_INPUTS = {
    1: ("variance_profile.csv",),
    2: ("beta_coefficients.csv",),
    3: ("mean_max_error.csv", "expected_max.csv"),
    4: ("survival.csv", "uniform_bounds.csv"),
    5: ("mmd_error_mean.csv",),
}

LOG_LOG_FIGURES = (3, 4, 5)


class RenderError(RuntimeError):
    pass


@dataclass(frozen=True)
class FigureSpec:
    figure_id: int
    inputs: dict[str, Path] = field(default_factory=dict)
    output: Path = Path("figure.png")

    @property
    def log_axes(self) -> bool:
        return self.figure_id in LOG_LOG_FIGURES


def _load(path: Path) -> dict[str, list[str]]:
    if not path.exists():
        raise RenderError(f"missing input file: {path}")
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        rows = list(reader)
        header = reader.fieldnames or []
    for col in REQUIRED_COLUMNS.get(path.name, ()):
        if col not in header:
            raise RenderError(f"{path}: missing required column '{col}'")
    if not rows:
        raise RenderError(f"{path}: no data rows")
    return {h: [r[h] for r in rows] for h in header}


def _series(cols: dict[str, list[str]], keys: tuple[str, ...], x: str, y: str):
    """Split rows into line series keyed by the given columns, in file order."""
    groups: dict[tuple, tuple[list, list]] = {}
    for i in range(len(cols[x])):
        key = tuple(cols[k][i] for k in keys)
        xs, ys = groups.setdefault(key, ([], []))
        xs.append(float(cols[x][i]))
        ys.append(float(cols[y][i]))
    return groups


def build_figure(spec: FigureSpec):
    """Assemble the matplotlib figure for ``spec`` without writing it."""
    fig, ax = plt.subplots(figsize=(6.0, 4.2))
    fid = spec.figure_id
    if fid == 1:
        cols = _load(spec.inputs["variance_profile.csv"])
        x = [float(v) for v in cols["delta_norm"]]
        for col, label in (
            ("var_tilde_times_D", "paired sin/cos variance x D"),
            ("var_breve_times_D", "random-phase variance x D"),
            ("kernel_value", "kernel value"),
        ):
            ax.plot(x, [float(v) for v in cols[col]], label=label)
        ax.set_xlabel("||delta||")
        ax.set_ylabel("variance per dimension")
    elif fid == 2:
        cols = _load(spec.inputs["beta_coefficients.csv"])
        for key, (xs, ys) in _series(cols, ("variant",), "d", "beta").items():
            ax.plot(xs, ys, label=f"{key[0]} coefficient")
        ax.set_xlabel("d")
        ax.set_ylabel("coefficient")
    elif fid == 3:
        cols = _load(spec.inputs["mean_max_error.csv"])
        for key, (xs, ys) in _series(
            cols, ("variant",), "D", "mean_max_abs_error"
        ).items():
            ax.plot(xs, ys, marker="o", label=f"{key[0]} empirical mean")
        bcols = _load(spec.inputs["expected_max.csv"])
        for key, (xs, ys) in _series(
            bcols, ("variant",), "D", "integrated_bound"
        ).items():
            ax.plot(xs, ys, linestyle="--", label=f"{key[0]} integrated bound")
        ax.set_xlabel("D")
        ax.set_ylabel("max error")
    elif fid == 4:
        cols = _load(spec.inputs["survival.csv"])
        for key, (xs, ys) in _series(
            cols, ("variant", "D"), "epsilon", "survival"
        ).items():
            ax.plot(xs, ys, label=f"{key[0]} empirical (D={key[1]})")
        bcols = _load(spec.inputs["uniform_bounds.csv"])
        for key, (xs, ys) in _series(
            bcols, ("variant", "form"), "epsilon", "bound_value"
        ).items():
            ax.plot(xs, ys, linestyle="--", label=f"{key[0]} {key[1]} bound")
        ax.set_xlabel("epsilon")
        ax.set_ylabel("survival probability")
    elif fid == 5:
        cols = _load(spec.inputs["mmd_error_mean.csv"])
        for key, (xs, ys) in _series(
            cols, ("variant",), "D", "mean_abs_error"
        ).items():
            ax.plot(xs, ys, marker="o", label=key[0])
        ax.set_xlabel("D")
        ax.set_ylabel("mean absolute error")
    else:
        raise RenderError(f"unknown figure id {fid}")
    if spec.log_axes:
        ax.set_xscale("log")
        ax.set_yscale("log")
    ax.legend(fontsize=8)
    fig.tight_layout()
    return fig


def render(spec: FigureSpec) -> Path:
    fig = build_figure(spec)
    try:
        fig.savefig(spec.output, dpi=110)
    finally:
        plt.close(fig)
    return spec.output


def discover_specs(out_dir: Path, figure_ids=None) -> list[FigureSpec]:
    ids = sorted(figure_ids or FIGURE_INPUTS)
    specs = []
    for fid in ids:
        inputs = {name: out_dir / name for name in FIGURE_INPUTS[fid]}
        specs.append(
            FigureSpec(figure_id=fid, inputs=inputs, output=out_dir / f"fig{fid}.png")
        )
    return specs


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="render_figures",
        description="Render fig1.png..fig5.png from rff-lab CSVs",
    )
    parser.add_argument("out_dir", type=Path,
                        help="directory holding the CSV outputs")
    parser.add_argument("--figures", type=str, default=None,
                        help="comma-separated figure ids (default: all)")
    args = parser.parse_args(argv)
    ids = [int(t) for t in args.figures.split(",")] if args.figures else None
    try:
        for spec in discover_specs(args.out_dir, ids):
            print(render(spec))
    except RenderError as exc:
        print(f"render_figures: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    raise SystemExit(main())

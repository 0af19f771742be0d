"""End-to-end pipeline: desk-scale CLI runs feeding the figure renderer."""

import subprocess
import sys

import pytest


def _run(args):
    proc = subprocess.run(args, capture_output=True, text=True)
    assert proc.returncode == 0, f"{args}: {proc.stderr}"
    return proc


@pytest.fixture(scope="module")
def csv_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("pipeline")
    base = [sys.executable, "-m", "rff_lab.cli"]
    _run(base + ["variance", "--sigma", "1", "--out-dir", str(out)])
    _run(base + ["bounds", "--out-dir", str(out), "--D", "200",
                 "--d-grid", "50,100,200", "--eps-points", "41"])
    _run(base + ["max-error", "--out-dir", str(out), "--trials", "5",
                 "--d-grid", "50,100,200", "--grid-points", "200",
                 "--eps-points", "41"])
    _run(base + ["l2-error", "--out-dir", str(out), "--trials", "10",
                 "--d-grid", "50", "--grid-points", "100"])
    _run(base + ["mmd", "--out-dir", str(out), "--n", "80", "--m", "80",
                 "--redraws", "4", "--d-grid", "50,100,500"])
    return out


def test_acceptance_11_figure_pipeline(csv_dir):
    proc = subprocess.run(["render_figures", str(csv_dir)],
                          capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    for fid in range(1, 6):
        path = csv_dir / f"fig{fid}.png"
        assert path.exists() and path.stat().st_size > 0, path

    from rff_figures.render import build_figure, discover_specs

    specs = {s.figure_id: s for s in discover_specs(csv_dir)}
    fig1 = build_figure(specs[1])
    assert len(fig1.axes[0].lines) == 3
    for fid in (3, 4, 5):
        fig = build_figure(specs[fid])
        ax = fig.axes[0]
        assert ax.get_xscale() == "log" and ax.get_yscale() == "log", fid

    print("ACCEPTANCE 11 PASS  five CLI runs -> render_figures -> fig1..fig5")

import json

import numpy as np
import pytest

from rff_lab.cli import main
from rff_lab.io import read_csv_columns


def _run(argv):
    return main(argv)


class TestVariance:
    def test_default_profile(self, tmp_path):
        out = tmp_path / "o"
        assert _run(["variance", "--sigma", "1.0", "--out-dir", str(out)]) == 0
        cols = read_csv_columns(out / "variance_profile.csv")
        assert len(cols["delta_norm"]) == 1001
        vt = np.array(cols["var_tilde_times_D"], dtype=float)
        vb = np.array(cols["var_breve_times_D"], dtype=float)
        assert np.all(vt <= vb + 1e-15)

    def test_missing_sigma_is_usage_error(self, tmp_path):
        with pytest.raises(SystemExit) as exc:
            _run(["variance", "--out-dir", str(tmp_path)])
        assert exc.value.code != 0

    def test_bandwidth_rescales_radius_axis(self, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        assert _run(["variance", "--sigma", "1", "--out-dir", str(a)]) == 0
        assert _run(["variance", "--sigma", "2", "--out-dir", str(b)]) == 0
        ca = read_csv_columns(a / "variance_profile.csv")
        cb = read_csv_columns(b / "variance_profile.csv")
        # row i sits at radius i/100 * sigma in both files, so the D-scaled
        # variance columns agree row by row
        assert ca["var_tilde_times_D"] == cb["var_tilde_times_D"]
        assert float(cb["delta_norm"][-1]) == pytest.approx(20.0)

    def test_rerun_is_byte_identical(self, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        _run(["variance", "--sigma", "1.5", "--out-dir", str(a)])
        _run(["variance", "--sigma", "1.5", "--out-dir", str(b)])
        assert (a / "variance_profile.csv").read_bytes() == (
            b / "variance_profile.csv"
        ).read_bytes()

    def test_manifest_written_and_replayable(self, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        _run(["variance", "--sigma", "1.25", "--out-dir", str(a)])
        manifest = a / "variance_manifest.json"
        data = json.loads(manifest.read_text())
        assert data["subcommand"] == "variance"
        assert data["outputs"] == ["variance_profile.csv"]
        assert _run(["variance", "--config", str(manifest),
                     "--out-dir", str(b)]) == 0
        assert (a / "variance_profile.csv").read_bytes() == (
            b / "variance_profile.csv"
        ).read_bytes()


class TestBounds:
    def test_outputs_and_peaks(self, tmp_path):
        out = tmp_path / "o"
        assert _run([
            "bounds", "--out-dir", str(out), "--d-grid", "50,100",
            "--eps-points", "21",
        ]) == 0
        beta = read_csv_columns(out / "beta_coefficients.csv")
        tilde_vals = [float(v) for v, var in zip(beta["beta"], beta["variant"])
                      if var == "tilde"]
        breve_vals = [float(v) for v, var in zip(beta["beta"], beta["variant"])
                      if var == "breve"]
        assert round(max(tilde_vals)) == 66
        assert round(max(breve_vals)) == 98
        assert int(beta["d"][np.argmax(tilde_vals)]) == 64
        ub = read_csv_columns(out / "uniform_bounds.csv")
        assert set(ub.keys()) == {"variant", "form", "epsilon", "bound_value"}
        em = read_csv_columns(out / "expected_max.csv")
        assert len(em["D"]) == 4  # two variants x two D values


class TestMaxError:
    ARGS = ["max-error", "--trials", "4", "--d-grid", "50,100,200",
            "--grid-points", "80", "--eps-points", "31", "--seed", "11"]

    def test_small_run(self, tmp_path):
        out = tmp_path / "o"
        assert _run(self.ARGS + ["--out-dir", str(out)]) == 0
        me = read_csv_columns(out / "max_error.csv")
        assert len(me["trial"]) == 2 * 3 * 4
        surv = read_csv_columns(out / "survival.csv")
        s = np.array(surv["survival"], dtype=float)
        for start in range(0, len(s), 31):
            assert np.all(np.diff(s[start:start + 31]) <= 0)
        slopes = read_csv_columns(out / "slopes.csv")
        assert slopes["variant"] == ["tilde", "breve"]

    def test_determinism_across_runs(self, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        _run(self.ARGS + ["--out-dir", str(a)])
        _run(self.ARGS + ["--out-dir", str(b)])
        for name in ("max_error.csv", "survival.csv", "slopes.csv"):
            assert (a / name).read_bytes() == (b / name).read_bytes()

    def test_config_file_with_flag_override(self, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({
            "trials": 2, "d_grid": [50, 100], "grid_points": 50,
            "variant": "tilde",
        }))
        out = tmp_path / "o"
        assert _run(["max-error", "--config", str(cfg), "--trials", "3",
                     "--out-dir", str(out), "--eps-points", "11"]) == 0
        me = read_csv_columns(out / "max_error.csv")
        assert len(me["trial"]) == 1 * 2 * 3  # flag trials=3 wins over file's 2
        assert set(me["variant"]) == {"tilde"}


class TestL2:
    def test_small_run(self, tmp_path):
        out = tmp_path / "o"
        assert _run(["l2-error", "--trials", "30", "--d-grid", "50",
                     "--grid-points", "120", "--out-dir", str(out)]) == 0
        exp = read_csv_columns(out / "l2_expected.csv")
        tm = np.array(exp["trial_mean"], dtype=float)
        cf = np.array(exp["closed_form"], dtype=float)
        assert np.all(np.abs(tm - cf) / cf < 0.5)


class TestMmd:
    def test_small_run(self, tmp_path):
        out = tmp_path / "o"
        assert _run(["mmd", "--n", "60", "--m", "60", "--redraws", "3",
                     "--d-grid", "50,100", "--out-dir", str(out)]) == 0
        rows = read_csv_columns(out / "mmd_error.csv")
        assert len(rows["redraw"]) == 2 * 2 * 3
        assert all(float(v) >= 0 for v in rows["abs_error"])


class TestKrr:
    def test_small_run(self, tmp_path):
        out = tmp_path / "o"
        assert _run(["krr", "--D", "400", "--n-train", "50", "--n-test", "10",
                     "--dim", "2", "--out-dir", str(out)]) == 0
        rows = read_csv_columns(out / "krr_drift.csv")
        assert len(rows["test_index"]) == 2 * 10
        drift = np.array(rows["drift"], dtype=float)
        bound = np.array(rows["bound"], dtype=float)
        assert np.all(drift <= bound)


class TestFailureHandling:
    def test_invalid_config_cleans_up(self, tmp_path):
        out = tmp_path / "o"
        # tilde requires even D: validation fails after out-dir creation
        code = _run(["max-error", "--d-grid", "51", "--trials", "1",
                     "--grid-points", "10", "--out-dir", str(out)])
        assert code != 0
        assert not list(out.glob("*.csv"))

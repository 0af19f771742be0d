"""Command-line front end: wires configs to experiments and emits the CSV
artifacts behind the five standard figures.

Subcommands: ``variance``, ``bounds``, ``max-error``, ``l2-error``, ``mmd``,
``krr``.  Every run writes a JSON manifest next to its CSVs; re-running with
``--config <manifest>`` reproduces the outputs byte for byte (flags override
config-file values).  Outputs are validated (row counts, monotonicity) before
the process exits 0; partial outputs are removed on failure.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import variance_profile
from .bounds import (
    BoundForm,
    beta_coefficient,
    expected_max_bound,
    gaussian_bound_input,
    integrate_survival_bound,
    survival_bound_curve,
)
from .downstream import krr_drift_experiment, mixture_samples, mmd_feature_errors
from .empirical import (
    ExperimentConfig,
    loglog_slope,
    run_max_error_trials,
    survival_curve,
)
from .features import Variant
from .io import load_config_file, write_csv, write_manifest
from .kernels import gaussian_kernel


class ValidationError(RuntimeError):
    pass


def _variants(name: str) -> list[Variant]:
    if name == "both":
        return [Variant.TILDE, Variant.BREVE]
    return [Variant(name)]


def _int_list(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(tok) for tok in text.split(",") if tok)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad integer list {text!r}") from exc


def _float_list(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(tok) for tok in text.split(",") if tok)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad float list {text!r}") from exc


def _resolved_config(args: argparse.Namespace) -> dict:
    skip = {"func", "config"}
    out = {}
    for key, val in sorted(vars(args).items()):
        if key in skip:
            continue
        out[key] = list(val) if isinstance(val, tuple) else val
    return out


# ---------------------------------------------------------------------------
# Subcommand bodies: each returns the list of files written.
# ---------------------------------------------------------------------------


def cmd_variance(args) -> list[Path]:
    kernel = gaussian_kernel(args.sigma, args.dim)
    radii = np.linspace(0.0, args.radius_mult * args.sigma, args.points)
    table = variance_profile(kernel, radii)
    if not np.all(table[:, 1] <= table[:, 2] + 1e-15):
        raise ValidationError("variance profile violates tilde <= breve ordering")
    path = write_csv(
        Path(args.out_dir) / "variance_profile.csv",
        ["delta_norm", "var_tilde_times_D", "var_breve_times_D", "kernel_value"],
        table,
    )
    return [path]


def cmd_bounds(args) -> list[Path]:
    kernel = gaussian_kernel(args.sigma, args.dim)
    out_dir = Path(args.out_dir)
    files = []

    beta_rows = []
    for variant in (Variant.TILDE, Variant.BREVE):
        for d in range(1, args.d_max + 1):
            beta_rows.append((variant.value, d, beta_coefficient(variant, d)))
    files.append(write_csv(out_dir / "beta_coefficients.csv",
                           ["variant", "d", "beta"], beta_rows))
    peak = {v: max(r[2] for r in beta_rows if r[0] == v) for v in ("tilde", "breve")}
    if args.d_max >= 100 and (round(peak["tilde"]) != 66 or round(peak["breve"]) != 98):
        raise ValidationError(f"beta curve peaks off: {peak}")

    ell = 2.0 * args.domain
    eps_grid = np.linspace(0.0, args.eps_max, args.eps_points)
    bound_rows = []
    for variant in _variants(args.variant):
        inp = gaussian_bound_input(kernel, ell, args.D, epsilon=1.0, delta=0.05)
        for form in (BoundForm.TIGHT, BoundForm.LOOSE):
            curve = survival_bound_curve(variant, inp, form, eps_grid)
            if np.any(np.diff(curve) > 1e-12):
                raise ValidationError("bound curve is not nonincreasing")
            bound_rows += [
                (variant.value, form.value, e, b) for e, b in zip(eps_grid, curve)
            ]
    files.append(write_csv(out_dir / "uniform_bounds.csv",
                           ["variant", "form", "epsilon", "bound_value"], bound_rows))

    em_rows = []
    for variant in _variants(args.variant):
        for D in args.d_grid:
            inp = gaussian_bound_input(kernel, ell, D, epsilon=1.0, delta=0.05)
            em_rows.append(
                (
                    variant.value,
                    D,
                    expected_max_bound(variant, inp),
                    integrate_survival_bound(variant, inp, BoundForm.TIGHT,
                                             args.integration_eps_max),
                )
            )
    files.append(write_csv(out_dir / "expected_max.csv",
                           ["variant", "D", "expected_max_bound", "integrated_bound"],
                           em_rows))
    return files


def cmd_max_error(args) -> list[Path]:
    kernel = gaussian_kernel(args.sigma, args.dim)
    config = ExperimentConfig(
        kernel=kernel,
        variants=tuple(_variants(args.variant)),
        d_grid=args.d_grid,
        half_width=args.domain,
        grid_points=args.grid_points,
        trials=args.trials,
        base_seed=args.seed,
    )
    all_stats = run_max_error_trials(config)
    out_dir = Path(args.out_dir)

    trial_rows = []
    for st in all_stats:
        for t in range(st.trials):
            trial_rows.append(
                (st.variant.value, st.D, t, st.max_abs_error[t], st.mean_sq_error[t])
            )
    files = [
        write_csv(out_dir / "max_error.csv",
                  ["variant", "D", "trial", "max_abs_error", "mean_sq_error"],
                  trial_rows)
    ]

    eps_grid = np.linspace(0.0, args.eps_max, args.eps_points)
    surv_rows = []
    for st in all_stats:
        curve = survival_curve(st, eps_grid)
        if np.any(np.diff(curve[:, 1]) > 0):
            raise ValidationError("survival curve is not nonincreasing")
        surv_rows += [
            (st.variant.value, st.D, e, s) for e, s in curve
        ]
    files.append(write_csv(out_dir / "survival.csv",
                           ["variant", "D", "epsilon", "survival"], surv_rows))

    mean_rows = [
        (st.variant.value, st.D, st.max_abs_error.mean(), st.trials)
        for st in all_stats
    ]
    files.append(write_csv(out_dir / "mean_max_error.csv",
                           ["variant", "D", "mean_max_abs_error", "trials"],
                           mean_rows))

    slope_rows = []
    for variant in config.variants:
        per_d = [(st.D, st.max_abs_error.mean())
                 for st in all_stats if st.variant is variant]
        means = [m for _, m in per_d]
        if len(per_d) >= 3:
            if any(b >= a for a, b in zip(means, means[1:])):
                raise ValidationError(
                    f"mean max error is not decreasing in D for {variant.value}"
                )
            fit = loglog_slope([d for d, _ in per_d], means)
            slope_rows.append((variant.value, fit.slope, fit.ci_low, fit.ci_high))
    if slope_rows:
        files.append(write_csv(out_dir / "slopes.csv",
                               ["variant", "slope", "ci_lo", "ci_hi"], slope_rows))
    return files


def cmd_l2_error(args) -> list[Path]:
    from .bounds import BoxUniform, l2_expected_error

    kernel = gaussian_kernel(args.sigma, args.dim)
    config = ExperimentConfig(
        kernel=kernel,
        variants=tuple(_variants(args.variant)),
        d_grid=args.d_grid,
        half_width=args.domain,
        grid_points=args.grid_points,
        trials=args.trials,
        base_seed=args.seed,
    )
    all_stats = run_max_error_trials(config)
    out_dir = Path(args.out_dir)
    trial_rows = []
    for st in all_stats:
        for t in range(st.trials):
            trial_rows.append((st.variant.value, st.D, t, st.mean_sq_error[t]))
    files = [
        write_csv(out_dir / "l2_error.csv",
                  ["variant", "D", "trial", "mean_sq_error"], trial_rows)
    ]
    box = BoxUniform(
        lows=(-args.domain,) * args.dim, highs=(args.domain,) * args.dim
    )
    exp_rows = [
        (st.variant.value, st.D, st.mean_sq_error.mean(),
         l2_expected_error(st.variant, kernel, box, st.D))
        for st in all_stats
    ]
    files.append(write_csv(out_dir / "l2_expected.csv",
                           ["variant", "D", "trial_mean", "closed_form"], exp_rows))
    return files


def cmd_mmd(args) -> list[Path]:
    kernel = gaussian_kernel(args.sigma, 2)
    X, Y = mixture_samples(args.n, args.m, args.seed)
    rows = []
    for variant in _variants(args.variant):
        for D, r, err in mmd_feature_errors(
            kernel, X, Y, variant, args.d_grid, args.redraws, args.seed
        ):
            rows.append((variant.value, D, r, err))
    expected = len(_variants(args.variant)) * len(args.d_grid) * args.redraws
    if len(rows) != expected:
        raise ValidationError(f"mmd rows {len(rows)} != expected {expected}")
    files = [write_csv(Path(args.out_dir) / "mmd_error.csv",
                       ["variant", "D", "redraw", "abs_error"], rows)]
    mean_rows = []
    for variant in _variants(args.variant):
        for D in args.d_grid:
            errs = [r[3] for r in rows if r[0] == variant.value and r[1] == D]
            mean_rows.append((variant.value, D, float(np.mean(errs)), args.redraws))
    files.append(write_csv(Path(args.out_dir) / "mmd_error_mean.csv",
                           ["variant", "D", "mean_abs_error", "redraws"], mean_rows))
    return files


def cmd_krr(args) -> list[Path]:
    kernel = gaussian_kernel(args.sigma, args.dim)
    rows = []
    for variant in _variants(args.variant):
        for idx, drift, bound in krr_drift_experiment(
            kernel, variant, args.D, args.lam0, args.seed,
            n_train=args.n_train, n_test=args.n_test,
        ):
            if drift > bound:
                raise ValidationError(
                    f"drift {drift} exceeds bound {bound} ({variant.value})"
                )
            rows.append((variant.value, args.D, idx, drift, bound))
    path = write_csv(Path(args.out_dir) / "krr_drift.csv",
                     ["variant", "D", "test_index", "drift", "bound"], rows)
    return [path]


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rff-lab",
        description="Random Fourier feature error analysis and experiments",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def common(p, sigma_required=False):
        p.add_argument("--config", type=str, default=None,
                       help="JSON config file or a previous run manifest; "
                            "flags override file values")
        p.add_argument("--out-dir", type=str, default="rff_out")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--sigma", type=float, required=sigma_required,
                       default=None if sigma_required else 1.0,
                       help="kernel bandwidth")
        p.add_argument("--dim", type=int, default=1, help="input dimension d")
        p.add_argument("--variant", choices=["tilde", "breve", "both"],
                       default="both")

    p = sub.add_parser("variance", help="D-scaled variance profile (figure 1 data)")
    common(p, sigma_required=True)
    p.add_argument("--points", type=int, default=1001)
    p.add_argument("--radius-mult", type=float, default=10.0,
                   help="profile extends to radius_mult * sigma")
    p.set_defaults(func=cmd_variance)

    p = sub.add_parser("bounds", help="coefficients, tail-bound curves, "
                                      "expected-max and integrated bounds")
    common(p)
    p.add_argument("--d-max", type=int, default=100,
                   help="dimension sweep upper end for the coefficient curve")
    p.add_argument("--domain", type=float, default=3.0,
                   help="half-width b of the box [-b, b]^d")
    p.add_argument("--D", type=int, default=500)
    p.add_argument("--d-grid", type=_int_list, default=(50, 100, 200, 500, 1000, 2000))
    p.add_argument("--eps-max", type=float, default=1.0)
    p.add_argument("--eps-points", type=int, default=101)
    p.add_argument("--integration-eps-max", type=float, default=8.0)
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("max-error", help="grid max-error trials, survival "
                                         "curves, and slope fits")
    common(p)
    p.add_argument("--domain", type=float, default=5.0)
    p.add_argument("--grid-points", type=int, default=1000)
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--d-grid", type=_int_list,
                   default=(50, 100, 200, 500, 1000, 2000, 5000, 10000))
    p.add_argument("--eps-max", type=float, default=1.0)
    p.add_argument("--eps-points", type=int, default=101)
    p.set_defaults(func=cmd_max_error)

    p = sub.add_parser("l2-error", help="grid L2-error trials vs the closed form")
    common(p)
    p.add_argument("--domain", type=float, default=3.0)
    p.add_argument("--grid-points", type=int, default=1000)
    p.add_argument("--trials", type=int, default=200)
    p.add_argument("--d-grid", type=_int_list, default=(100,))
    p.set_defaults(func=cmd_l2_error)

    p = sub.add_parser("mmd", help="squared-MMD feature-estimate error study")
    common(p)
    p.add_argument("--n", type=int, default=1000)
    p.add_argument("--m", type=int, default=1000)
    p.add_argument("--redraws", type=int, default=50)
    p.add_argument("--d-grid", type=_int_list, default=(50, 100, 500, 1000, 5000))
    p.set_defaults(func=cmd_mmd)

    p = sub.add_parser("krr", help="ridge-regression drift vs certified bound")
    common(p)
    p.add_argument("--D", type=int, default=2000)
    p.add_argument("--lam0", type=float, default=1.0)
    p.add_argument("--n-train", type=int, default=200)
    p.add_argument("--n-test", type=int, default=50)
    p.set_defaults(func=cmd_krr)

    return parser


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()

    # First pass finds --config so file values become subparser defaults;
    # explicit flags then override them on the real parse.
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config", type=str, default=None)
    pre_args, _ = pre.parse_known_args(argv)
    if pre_args.config:
        overrides = load_config_file(pre_args.config)
        for action in parser._subparsers._group_actions:
            for sp in action.choices.values():
                known = {a.dest for a in sp._actions}
                sp.set_defaults(**{k: _coerce(sp, k, v)
                                   for k, v in overrides.items() if k in known})
                for a in sp._actions:
                    if a.dest in overrides and a.required:
                        a.required = False

    args = parser.parse_args(argv)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []
    try:
        written = args.func(args)
        manifest = write_manifest(
            out_dir, args.subcommand, _resolved_config(args), written
        )
        written.append(manifest)
    except (ValidationError, ValueError) as exc:
        for path in written:
            path.unlink(missing_ok=True)
        print(f"rff-lab {args.subcommand}: {exc}", file=sys.stderr)
        return 1
    for path in written:
        print(path)
    return 0


def _coerce(subparser, dest, value):
    for action in subparser._actions:
        if action.dest == dest and value is not None:
            if action.type is _int_list or action.type is _float_list:
                return tuple(value) if isinstance(value, (list, tuple)) \
                    else action.type(str(value))
            if action.type and not isinstance(value, (list, tuple)):
                return action.type(value)
    return value


if __name__ == "__main__":
    raise SystemExit(main())

"""Monte-Carlo harness: grid max-error trials, L2 trials, survival curves,
and log-log slope regression.

Each trial draws fresh frequencies with seed ``base_seed + trial_index``,
embeds every grid point, and measures the reconstruction error against the
exact kernel over all point pairs.  Trials are independent, so subsets of
the trial range reproduce exactly, and the harness output is identical
regardless of worker count (results are keyed by trial index).  Worker count
is capped by the ``RFF_LAB_THREADS`` environment variable (default 1).
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from itertools import product

import numpy as np
from scipy import stats as sps

from .features import FeatureConfig, Variant, embed, exact_gram, spectral_draw
from .kernels import ShiftInvariantKernel

_BLOCK_BYTES = 64 * 2**20  # cap per error-matrix block


class ConfigError(ValueError):
    """Invalid or infeasible experiment configuration."""


@dataclass(frozen=True)
class ExperimentConfig:
    """Settings for a grid error study on the box [-half_width, half_width]^d.

    ``grid_points`` counts points per axis; the grid has grid_points**d
    points in total.  Max-error estimation over all pairs is only supported
    for d in {1, 2} (the pair grid grows too fast beyond that).
    """

    kernel: ShiftInvariantKernel
    variants: tuple[Variant, ...]
    d_grid: tuple[int, ...]
    half_width: float
    grid_points: int
    trials: int
    base_seed: int
    memory_budget: float = 8e9

    def __post_init__(self) -> None:
        if self.kernel.dim not in (1, 2):
            raise ConfigError(
                f"max-error experiments support d in {{1, 2}}, got {self.kernel.dim}"
            )
        if self.trials < 1:
            raise ConfigError(f"trials must be >= 1, got {self.trials}")
        if self.grid_points < 2:
            raise ConfigError(f"grid_points must be >= 2, got {self.grid_points}")
        if not self.half_width > 0:
            raise ConfigError(f"half_width must be positive, got {self.half_width}")
        if not self.variants or not self.d_grid:
            raise ConfigError("variants and d_grid must be nonempty")
        for variant in self.variants:
            for D in self.d_grid:
                FeatureConfig(variant, D, self.kernel, 0)  # validates D per variant
        n = self.point_count
        est = 8.0 * (max(self.d_grid) * n + 2.0 * n * n + min(_BLOCK_BYTES / 8, n * n))
        if est > self.memory_budget:
            raise ConfigError(
                f"estimated working set {est:.2e} B exceeds budget "
                f"{self.memory_budget:.2e} B"
            )

    @property
    def point_count(self) -> int:
        return self.grid_points**self.kernel.dim


@dataclass(frozen=True)
class TrialStats:
    """Per-trial error summaries for one (variant, D) cell."""

    variant: Variant
    D: int
    max_abs_error: np.ndarray
    mean_sq_error: np.ndarray

    def __post_init__(self) -> None:
        self.max_abs_error.setflags(write=False)
        self.mean_sq_error.setflags(write=False)

    @property
    def trials(self) -> int:
        return len(self.max_abs_error)


def grid_points(config: ExperimentConfig) -> np.ndarray:
    """The evenly spaced evaluation grid, one point per row."""
    axis = np.linspace(-config.half_width, config.half_width, config.grid_points)
    if config.kernel.dim == 1:
        return axis[:, None]
    cols = list(product(axis, repeat=config.kernel.dim))
    return np.asarray(cols, dtype=float)


def _worker_count() -> int:
    try:
        return max(1, int(os.environ.get("RFF_LAB_THREADS", "1")))
    except ValueError:
        return 1


def _error_stats(Z: np.ndarray, K: np.ndarray) -> tuple[float, float]:
    # Blocked |Z^T Z - K| reduction: max abs entry and mean square over all
    # pairs, without materializing more than _BLOCK_BYTES at a time.
    n = Z.shape[1]
    rows = max(1, int(_BLOCK_BYTES / 8 / n))
    worst = 0.0
    sq_sum = 0.0
    for i0 in range(0, n, rows):
        i1 = min(n, i0 + rows)
        f = Z[:, i0:i1].T @ Z - K[i0:i1]
        worst = max(worst, float(np.max(np.abs(f))))
        sq_sum += float(np.sum(f * f))
    return worst, sq_sum / (n * n)


def run_trials(config: ExperimentConfig) -> list[TrialStats]:
    """Run all (variant, D) cells of the experiment; deterministic in config."""
    X = grid_points(config)
    K = exact_gram(config.kernel, X, X)
    out: list[TrialStats] = []
    workers = _worker_count()
    for variant in config.variants:
        for D in config.d_grid:

            def one(trial: int) -> tuple[float, float]:
                fc = FeatureConfig(variant, D, config.kernel, config.base_seed + trial)
                Z = embed(fc, spectral_draw(fc), X).Z
                return _error_stats(Z, K)

            if workers > 1:
                with ThreadPoolExecutor(max_workers=workers) as pool:
                    results = list(pool.map(one, range(config.trials)))
            else:
                results = [one(t) for t in range(config.trials)]
            maxes = np.array([r[0] for r in results])
            means = np.array([r[1] for r in results])
            out.append(TrialStats(variant, D, maxes, means))
    return out


def run_max_error_trials(config: ExperimentConfig) -> list[TrialStats]:
    """Grid max-error study: one TrialStats per (variant, D)."""
    return run_trials(config)


def run_l2_error_trials(config: ExperimentConfig) -> list[TrialStats]:
    """Grid L2 study; the mean_sq_error fields estimate ||f||_mu^2 under the
    uniform distribution on the pair grid."""
    return run_trials(config)


def survival_curve(stats: TrialStats, eps_grid) -> np.ndarray:
    """Empirical survival function of the per-trial max error.

    Returns a (len, 2) array of (epsilon, fraction of trials exceeding it);
    nonincreasing in epsilon.
    """
    if stats.trials == 0:
        raise ValueError("stats is empty")
    eps = np.asarray(eps_grid, dtype=float)
    frac = np.array([np.mean(stats.max_abs_error > e) for e in eps])
    return np.column_stack([eps, frac])


@dataclass(frozen=True)
class SlopeFit:
    """OLS fit of log(mean) on log(D) with a t-based confidence interval."""

    slope: float
    ci_low: float
    ci_high: float
    intercept: float
    stderr: float
    n_points: int
    confidence: float


def loglog_slope(d_values, means, confidence: float = 0.95) -> SlopeFit:
    """Least-squares slope of log(means) against log(D values).

    The confidence interval is the standard t interval on the regression
    slope.  Requires at least three distinct D values and positive means.
    """
    D = np.asarray(d_values, dtype=float)
    m = np.asarray(means, dtype=float)
    if len(D) != len(m) or len(np.unique(D)) < 3:
        raise ValueError("need >= 3 distinct D values with matching means")
    if np.any(m <= 0) or np.any(D <= 0):
        raise ValueError("means and D values must be positive")
    x = np.log(D)
    y = np.log(m)
    xbar = x.mean()
    sxx = float(np.sum((x - xbar) ** 2))
    slope = float(np.sum((x - xbar) * (y - y.mean())) / sxx)
    intercept = float(y.mean() - slope * xbar)
    resid = y - (intercept + slope * x)
    dof = len(x) - 2
    se = math.sqrt(float(np.sum(resid**2)) / dof / sxx) if dof > 0 else 0.0
    tq = float(sps.t.ppf(0.5 + confidence / 2.0, dof)) if dof > 0 else 0.0
    return SlopeFit(
        slope=slope,
        ci_low=slope - tq * se,
        ci_high=slope + tq * se,
        intercept=intercept,
        stderr=se,
        n_points=len(x),
        confidence=confidence,
    )

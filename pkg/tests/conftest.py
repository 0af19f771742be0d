"""Shared fixtures.

The two session-scoped Monte-Carlo runs are the expensive part of the suite;
they feed both the acceptance criteria and the empirical-module invariants,
so they run once.
"""

import numpy as np
import pytest

from rff_lab import ExperimentConfig, Variant, gaussian_kernel, run_max_error_trials


@pytest.fixture(scope="session")
def gauss1():
    return gaussian_kernel(1.0, 1)


@pytest.fixture(scope="session")
def gauss2():
    return gaussian_kernel(1.0, 2)


@pytest.fixture(scope="session")
def interval_study():
    """100 trials per D on 1000 grid points over [-5, 5], both variants."""
    config = ExperimentConfig(
        kernel=gaussian_kernel(1.0, 1),
        variants=(Variant.TILDE, Variant.BREVE),
        d_grid=(50, 100, 200, 500, 1000, 2000),
        half_width=5.0,
        grid_points=1000,
        trials=100,
        base_seed=20_260_811,
    )
    return config, run_max_error_trials(config)


@pytest.fixture(scope="session")
def survival_study():
    """200 trials at D = 500 on 1000 grid points over [-3, 3], both variants."""
    config = ExperimentConfig(
        kernel=gaussian_kernel(1.0, 1),
        variants=(Variant.TILDE, Variant.BREVE),
        d_grid=(500,),
        half_width=3.0,
        grid_points=1000,
        trials=200,
        base_seed=4_750_911,
    )
    return config, run_max_error_trials(config)


def sample_reconstructions(variant, kernel, pairs, D, draws, seed):
    """Direct trigonometric sampling of s(x, y), one array per pair.

    Oracle path: samples frequencies itself and applies the cosine sums,
    independently of both the embedding code and the closed forms.  All
    pairs share each draw (frequencies and phases), matching how one
    embedding serves many evaluation points.
    """
    rng = np.random.default_rng(seed)
    d = kernel.dim
    m = D // 2 if variant is Variant.TILDE else D
    omegas = rng.normal(0.0, 1.0 / kernel.bandwidth, size=(draws, m, d))
    phases = rng.uniform(0.0, 2.0 * np.pi, size=(draws, m))
    out = []
    for x, y in pairs:
        proj_diff = omegas @ (np.asarray(x) - np.asarray(y))
        if variant is Variant.TILDE:
            out.append(np.cos(proj_diff).mean(axis=1))
        else:
            proj_sum = omegas @ (np.asarray(x) + np.asarray(y))
            out.append(
                (np.cos(proj_diff) + np.cos(proj_sum + 2.0 * phases)).mean(axis=1)
            )
    return out


def sample_variance_se(samples: np.ndarray) -> float:
    """Asymptotic standard error of the sample variance of ``samples``."""
    v = samples.var(ddof=1)
    centered = samples - samples.mean()
    m4 = np.mean(centered**4)
    return float(np.sqrt(max(m4 - v * v, 0.0) / len(samples)))


def sample_covariance_se(u: np.ndarray, v: np.ndarray) -> float:
    """Asymptotic standard error of the sample covariance of (u, v)."""
    uc = u - u.mean()
    vc = v - v.mean()
    c = np.mean(uc * vc)
    m22 = np.mean(uc**2 * vc**2)
    return float(np.sqrt(max(m22 - c * c, 0.0) / len(u)))

"""Downstream effects of kernel approximation: ridge regression drift,
SVM decision drift, and mean-map-kernel / MMD estimation.

Kernel ridge regression is solved in the dual on the (reconstructed or
exact) Gram matrix so the perturbation analysis applies verbatim; a primal
solver is out of scope.  Labels are centered at fit time and the offset is
restored at prediction.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from .analysis import covariance_matrix
from .features import EmbeddedSet, Variant
from .kernels import ShiftInvariantKernel

logger = logging.getLogger(__name__)

_PSD_TOL = 1e-8
_PAIR_LIMIT = 10_000


# ---------------------------------------------------------------------------
# Kernel ridge regression
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class KrrModel:
    """Fitted dual ridge model: weights, label offset, and scale info."""

    alpha: np.ndarray
    offset: float
    lam0: float
    n: int
    sigma_y: float

    def __post_init__(self) -> None:
        self.alpha.setflags(write=False)


def krr_fit(gram: np.ndarray, y: np.ndarray, lam0: float) -> KrrModel:
    """Solve (K + n*lam0*I) alpha = y_centered.

    ``gram`` must be symmetric PSD to tolerance 1e-8 and ``lam0`` positive.
    If the positive-definite factorization fails numerically, a jitter of
    1e-10 * n is added once (with a logged warning) before giving up.
    """
    K = np.asarray(gram, dtype=float)
    y = np.asarray(y, dtype=float)
    n = K.shape[0]
    if K.ndim != 2 or K.shape[1] != n or y.shape != (n,):
        raise ValueError(f"shape mismatch: gram {K.shape}, y {y.shape}")
    if not lam0 > 0:
        raise ValueError(f"lam0 must be positive, got {lam0}")
    scale = max(1.0, float(np.max(np.abs(K))))
    if np.max(np.abs(K - K.T)) > _PSD_TOL * scale:
        raise ValueError("gram matrix is not symmetric")
    if float(np.linalg.eigvalsh(K)[0]) < -_PSD_TOL * scale:
        raise ValueError("gram matrix is not PSD within tolerance")
    offset = float(y.mean())
    yc = y - offset
    lam = n * lam0
    A = K + lam * np.eye(n)
    try:
        factor = cho_factor(A)
    except np.linalg.LinAlgError:
        logger.warning("PD factorization failed; retrying with jitter %g", 1e-10 * n)
        factor = cho_factor(A + 1e-10 * n * np.eye(n))
    alpha = cho_solve(factor, yc)
    return KrrModel(
        alpha=alpha,
        offset=offset,
        lam0=float(lam0),
        n=n,
        sigma_y=float(np.sqrt(np.mean(yc**2))),
    )


def krr_predict(model: KrrModel, kx: np.ndarray):
    """Prediction alpha . k_x + offset; ``kx`` is (n,) or (n, m) for a batch."""
    kx = np.asarray(kx, dtype=float)
    if kx.shape[0] != model.n:
        raise ValueError(f"k_x has leading dimension {kx.shape[0]}, expected {model.n}")
    out = model.alpha @ kx + model.offset
    return float(out) if kx.ndim == 1 else out


def krr_drift_bound(
    sigma_y: float, lam0: float, eps_uniform: float, with_bias: bool = False
) -> float:
    """Prediction drift bound under a uniform kernel error of eps.

    (lam0 + 1)/lam0^2 * sigma_y * eps; the constant-feature (bias) variant
    replaces lam0 + 1 by lam0 + 2.
    """
    if lam0 <= 0 or sigma_y < 0 or eps_uniform < 0:
        raise ValueError("lam0 must be positive; sigma_y, eps nonnegative")
    shift = 2.0 if with_bias else 1.0
    return (lam0 + shift) / lam0**2 * sigma_y * eps_uniform


def krr_general_drift_bound(
    sigma_y: float,
    n: int,
    lam0: float,
    kappa: float,
    k_vec_err: float,
    gram_err_2norm: float,
) -> float:
    """Drift bound from explicit perturbation norms.

    sigma_y/(sqrt(n)*lam0) * ||k_hat_x - k_x||
    + kappa*sigma_y/(n*lam0^2) * ||K_hat - K||_2.
    """
    if n < 1 or lam0 <= 0 or kappa <= 0:
        raise ValueError("need n >= 1, lam0 > 0, kappa > 0")
    return sigma_y / (math.sqrt(n) * lam0) * k_vec_err + kappa * sigma_y / (
        n * lam0**2
    ) * gram_err_2norm


# ---------------------------------------------------------------------------
# SVM decision-drift formulas (bound evaluators only; no SVM is trained)
# ---------------------------------------------------------------------------


def svm_drift_bound(
    C0: float, kappa: float, gram_err_2norm: float, k_vec_err: float, f_x: float
) -> float:
    """Decision-function drift bound for a no-offset SVM.

    With S the total perturbation ||K_hat - K||_2 + ||k_hat_x - k_x|| + |f_x|:
    sqrt(2) * kappa^(3/4) * C0 * S^(1/4) + sqrt(kappa) * C0 * S^(1/2).
    """
    if C0 <= 0 or kappa <= 0:
        raise ValueError("C0 and kappa must be positive")
    S = gram_err_2norm + k_vec_err + abs(f_x)
    if S < 0:
        raise ValueError("perturbation norms must be nonnegative")
    return math.sqrt(2.0) * kappa**0.75 * C0 * S**0.25 + math.sqrt(kappa) * C0 * math.sqrt(S)


def svm_epsilon_threshold(C0: float, u: float, n: int, variant: Variant) -> float:
    """Uniform kernel-error level below which SVM decision drift stays < u.

    (2*C0^2 + 4*C0*u + u^2 - 2*(C0+u)*sqrt(C0*(C0+2u)))
    / (C0^2 * (n + sqrt(n) + g)) with g = 0 for TILDE and 1 for BREVE
    (the random-phase variant can also perturb k(x, x)).
    """
    if C0 <= 0 or u < 0 or n < 1:
        raise ValueError("need C0 > 0, u >= 0, n >= 1")
    g = 0.0 if variant is Variant.TILDE else 1.0
    num = 2 * C0**2 + 4 * C0 * u + u**2 - 2 * (C0 + u) * math.sqrt(C0 * (C0 + 2 * u))
    return num / (C0**2 * (n + math.sqrt(n) + g))


# ---------------------------------------------------------------------------
# Mean map kernel and maximum mean discrepancy
# ---------------------------------------------------------------------------


class EstimatorKind(Enum):
    BIASED_MMK = "biased_mmk"
    UNBIASED_MMK = "unbiased_mmk"
    BIASED_MMD2 = "biased_mmd2"
    FEATURE_MMD2 = "feature_mmd2"


class EstimateMode(Enum):
    PAIRWISE = "pairwise"  # explicit double sum over reconstructed values
    FEATURE = "feature"  # inner product of mean embeddings


class Bias(Enum):
    BIASED = "biased"
    UNBIASED = "unbiased"


@dataclass(frozen=True)
class MmdEstimate:
    value: float
    estimator: EstimatorKind
    n: int
    m: int


def _check_unbiased_self(zx: EmbeddedSet, zy: EmbeddedSet) -> None:
    if zx is not zy and not (zx.config == zy.config and np.array_equal(zx.Z, zy.Z)):
        raise ValueError("the unbiased estimator is defined only for MMK(X, X)")
    if zx.n < 2:
        raise ValueError("the unbiased estimator needs at least two points")


def mmk(
    zx: EmbeddedSet,
    zy: EmbeddedSet,
    mode: EstimateMode = EstimateMode.FEATURE,
    bias: Bias = Bias.BIASED,
) -> MmdEstimate:
    """Mean map kernel estimate from feature embeddings.

    PAIRWISE computes the (1/nm) double sum of reconstructed values; FEATURE
    computes the same number as an inner product of mean embeddings.  The
    unbiased mode removes the diagonal terms and is only valid for
    MMK(X, X).
    """
    if zx.config != zy.config:
        raise ValueError("embedded sets come from different configurations")
    n, m = zx.n, zy.n
    if bias is Bias.UNBIASED:
        _check_unbiased_self(zx, zy)
        if mode is EstimateMode.FEATURE:
            zbar = zx.Z.mean(axis=1)
            self_norms = np.sum(zx.Z * zx.Z, axis=0)
            val = n**2 / (n**2 - n) * (zbar @ zbar - self_norms.sum() / n**2)
        else:
            S = zx.Z.T @ zx.Z
            val = (S.sum() - np.trace(S)) / (n**2 - n)
        return MmdEstimate(float(val), EstimatorKind.UNBIASED_MMK, n, m)
    if mode is EstimateMode.FEATURE:
        val = zx.Z.mean(axis=1) @ zy.Z.mean(axis=1)
    else:
        val = (zx.Z.T @ zy.Z).mean()
    return MmdEstimate(float(val), EstimatorKind.BIASED_MMK, n, m)


def mmk_exact(
    kernel: ShiftInvariantKernel,
    X: np.ndarray,
    Y: np.ndarray,
    bias: Bias = Bias.BIASED,
) -> MmdEstimate:
    """Mean map kernel from exact kernel evaluations (pairwise double sum)."""
    from .features import exact_gram

    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float)
    K = exact_gram(kernel, X, Y)
    n, m = K.shape
    if bias is Bias.UNBIASED:
        if X.shape != Y.shape or not np.array_equal(X, Y):
            raise ValueError("the unbiased estimator is defined only for MMK(X, X)")
        if n < 2:
            raise ValueError("the unbiased estimator needs at least two points")
        val = (K.sum() - np.trace(K)) / (n**2 - n)
        return MmdEstimate(float(val), EstimatorKind.UNBIASED_MMK, n, m)
    return MmdEstimate(float(K.mean()), EstimatorKind.BIASED_MMK, n, m)


def mmd2(
    zx: EmbeddedSet,
    zy: EmbeddedSet,
    mode: EstimateMode = EstimateMode.FEATURE,
    bias: Bias = Bias.BIASED,
) -> MmdEstimate:
    """Squared MMD estimate MMK(X,X) + MMK(Y,Y) - 2*MMK(X,Y) from features.

    In FEATURE mode the biased value equals ||zbar(X) - zbar(Y)||^2 and is
    therefore nonnegative.
    """
    kxx = mmk(zx, zx, mode, bias).value
    kyy = mmk(zy, zy, mode, bias).value
    kxy = mmk(zx, zy, mode, Bias.BIASED).value
    kind = (
        EstimatorKind.FEATURE_MMD2
        if mode is EstimateMode.FEATURE
        else EstimatorKind.BIASED_MMD2
    )
    return MmdEstimate(float(kxx + kyy - 2.0 * kxy), kind, zx.n, zy.n)


def mmd2_exact(
    kernel: ShiftInvariantKernel,
    X: np.ndarray,
    Y: np.ndarray,
    bias: Bias = Bias.BIASED,
) -> MmdEstimate:
    """Squared MMD from exact kernel evaluations."""
    kxx = mmk_exact(kernel, X, X, bias).value
    kyy = mmk_exact(kernel, Y, Y, bias).value
    kxy = mmk_exact(kernel, X, Y, Bias.BIASED).value
    return MmdEstimate(
        float(kxx + kyy - 2.0 * kxy), EstimatorKind.BIASED_MMD2, len(X), len(Y)
    )


def mmk_mcdiarmid_bound(target: str, D: int, epsilon: float) -> float:
    """McDiarmid tail bound for the feature estimate at fixed sample sets.

    target "mmk": 2*exp(-D*eps^2/8); target "mmd": 2*exp(-D*eps^2/128)
    (the squared-MMD statistic moves at most 16/D per frequency swap).
    """
    if D < 1:
        raise ValueError(f"D must be >= 1, got {D}")
    if epsilon < 0:
        raise ValueError(f"epsilon must be nonnegative, got {epsilon}")
    rate = {"mmk": 8.0, "mmd": 128.0}.get(target)
    if rate is None:
        raise ValueError(f"target must be 'mmk' or 'mmd', got {target!r}")
    return 2.0 * math.exp(-D * epsilon**2 / rate)


def mmk_expected_abs_error(target: str, D: int) -> float:
    """Bound on the expected absolute estimation error at fixed sample sets.

    2*sqrt(2*pi/D) for "mmk" and 8*sqrt(2*pi/D) for "mmd" (integrated tails
    of the McDiarmid bounds).
    """
    if D < 1:
        raise ValueError(f"D must be >= 1, got {D}")
    coeff = {"mmk": 2.0, "mmd": 8.0}.get(target)
    if coeff is None:
        raise ValueError(f"target must be 'mmk' or 'mmd', got {target!r}")
    return coeff * math.sqrt(2.0 * math.pi / D)


def mmk_variance(
    kernel: ShiftInvariantKernel,
    X: np.ndarray,
    Y: np.ndarray,
    variant: Variant,
    D: int,
) -> float:
    """Exact variance of the feature MMK estimate at fixed sample sets.

    (1/(n*m)^2) * sum over pairs of pairs of Cov(s(X_i, Y_j), s(X_i', Y_j')),
    via the closed-form covariance; exactly proportional to 1/D.  The
    quadruple sum runs over the flattened pair list, so n*m is capped at
    10^4 and the covariance matrix is accumulated in row blocks.
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    Y = np.atleast_2d(np.asarray(Y, dtype=float))
    n, m = X.shape[0], Y.shape[0]
    p = n * m
    if p > _PAIR_LIMIT:
        raise ValueError(f"n*m = {p} exceeds the quadruple-sum guard {_PAIR_LIMIT}")
    d = X.shape[1]
    px = np.broadcast_to(X[:, None, :], (n, m, d)).reshape(p, d)
    py = np.broadcast_to(Y[None, :, :], (n, m, d)).reshape(p, d)
    total = 0.0
    rows = max(1, min(p, 2_000_000 // max(p, 1)))
    for i0 in range(0, p, rows):
        i1 = min(p, i0 + rows)
        block = covariance_matrix(
            variant, kernel, (px[i0:i1], py[i0:i1]), (px, py), D
        )
        total += float(block.sum())
    return total / p**2


# ---------------------------------------------------------------------------
# Experiment drivers
# ---------------------------------------------------------------------------


def mixture_samples(n: int, m: int, seed: int) -> tuple[np.ndarray, np.ndarray]:
    """Fixed sample sets for the two-sample study.

    X has n points from N(0, I_2); Y has m points from the mixture
    0.95 * N(0, I_2) + 0.05 * N(0, I_2 / 4).
    """
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((n, 2))
    comp = rng.random(m) < 0.05
    Y = rng.standard_normal((m, 2))
    Y[comp] *= 0.5
    return X, Y


def mmd_feature_errors(
    kernel: ShiftInvariantKernel,
    X: np.ndarray,
    Y: np.ndarray,
    variant: Variant,
    d_grid,
    redraws: int,
    base_seed: int,
) -> list[tuple[int, int, float]]:
    """Absolute error of the biased squared-MMD feature estimate per redraw.

    X and Y stay fixed; only the feature draw varies.  The exact reference
    is computed once by the pairwise double sum.  Returns (D, redraw,
    abs_error) rows, deterministic in base_seed.
    """
    from .features import FeatureConfig, embed, spectral_draw

    exact = mmd2_exact(kernel, X, Y).value
    rows: list[tuple[int, int, float]] = []
    for D in d_grid:
        for r in range(redraws):
            fc = FeatureConfig(variant, int(D), kernel, base_seed + r)
            draw = spectral_draw(fc)
            zx = embed(fc, draw, X)
            zy = embed(fc, draw, Y)
            est = mmd2(zx, zy, EstimateMode.FEATURE, Bias.BIASED).value
            rows.append((int(D), r, abs(est - exact)))
    return rows


def krr_synthetic_data(
    seed: int, n_train: int = 200, n_test: int = 50, dim: int = 2
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Smooth synthetic regression set: X_train, y_train, X_test.

    Inputs are uniform on [-2, 2]^dim; targets are a fixed smooth function
    plus 0.1-scale Gaussian noise.
    """
    rng = np.random.default_rng(seed)
    Xtr = rng.uniform(-2.0, 2.0, size=(n_train, dim))
    Xte = rng.uniform(-2.0, 2.0, size=(n_test, dim))
    def f(Z):
        return np.sin(2.0 * Z[:, 0]) + 0.5 * np.cos(3.0 * Z[:, -1]) + 0.25 * Z.prod(axis=1)
    ytr = f(Xtr) + 0.1 * rng.standard_normal(n_train)
    return Xtr, ytr, Xte


def krr_drift_experiment(
    kernel: ShiftInvariantKernel,
    variant: Variant,
    D: int,
    lam0: float,
    seed: int,
    n_train: int = 200,
    n_test: int = 50,
) -> list[tuple[int, float, float]]:
    """Exact-vs-feature ridge drift per test point, with its certified bound.

    Fits one model on the exact Gram matrix and one on the reconstructed
    Gram matrix (same data, same centering), then returns
    (test_index, |h_feature - h_exact|, drift bound) rows where the bound is
    (lam0+1)/lam0^2 * sigma_y * eps_obs and eps_obs is the largest observed
    kernel error over all train-train and train-test pairs.
    """
    from .features import FeatureConfig, embed, exact_gram, spectral_draw

    Xtr, ytr, Xte = krr_synthetic_data(seed, n_train, n_test, kernel.dim)
    K = exact_gram(kernel, Xtr, Xtr)
    k_test = exact_gram(kernel, Xtr, Xte)

    fc = FeatureConfig(variant, D, kernel, seed)
    draw = spectral_draw(fc)
    ztr = embed(fc, draw, Xtr)
    zte = embed(fc, draw, Xte)
    K_hat = ztr.Z.T @ ztr.Z
    k_test_hat = ztr.Z.T @ zte.Z

    eps_obs = max(
        float(np.max(np.abs(K_hat - K))), float(np.max(np.abs(k_test_hat - k_test)))
    )
    exact_model = krr_fit(K, ytr, lam0)
    feat_model = krr_fit(K_hat, ytr, lam0)
    bound = krr_drift_bound(exact_model.sigma_y, lam0, eps_obs)
    h_exact = krr_predict(exact_model, k_test)
    h_feat = krr_predict(feat_model, k_test_hat)
    drift = np.abs(h_feat - h_exact)
    return [(i, float(drift[i]), bound) for i in range(len(Xte))]

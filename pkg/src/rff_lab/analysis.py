"""Closed-form variance and covariance of the feature reconstructions.

With k the kernel, delta = x - y, and t = x + y, the reconstruction
s(x, y) = z(x).z(y) satisfies, over the randomness of the draw:

* TILDE:  Var s = (1/D) * [1 + k(2*delta) - 2*k(delta)^2]
* BREVE:  Var s = (1/D) * [1 + k(2*delta)/2 - k(delta)^2]

and the covariances between two point pairs

* TILDE:  (2/D) * [k(d - d')/2 + k(d + d')/2 - k(d)*k(d')]
* BREVE:  (1/D) * [same bracket + k(t - t')/2]

These are exact, serve as oracles for the Monte-Carlo harness, and feed the
mean-map-kernel variance formula.
"""

from __future__ import annotations

import numpy as np

from .features import Variant
from .kernels import ShiftInvariantKernel, kernel_eval, radial_eval


def variance(
    variant: Variant,
    kernel: ShiftInvariantKernel,
    x: np.ndarray,
    y: np.ndarray,
    D: int,
) -> float:
    """Exact variance of the reconstruction s(x, y) at embedding dimension D."""
    delta = np.asarray(x, dtype=float) - np.asarray(y, dtype=float)
    kd = kernel_eval(kernel, delta)
    k2 = kernel_eval(kernel, 2.0 * delta)
    if variant is Variant.TILDE:
        return (1.0 + k2 - 2.0 * kd * kd) / D
    return (1.0 + 0.5 * k2 - kd * kd) / D


def covariance(
    variant: Variant,
    kernel: ShiftInvariantKernel,
    pair1: tuple[np.ndarray, np.ndarray],
    pair2: tuple[np.ndarray, np.ndarray],
    D: int,
) -> float:
    """Exact covariance of s at two point pairs sharing one spectral draw."""
    x1, y1 = (np.asarray(a, dtype=float) for a in pair1)
    x2, y2 = (np.asarray(a, dtype=float) for a in pair2)
    d1, d2 = x1 - y1, x2 - y2
    bracket = (
        0.5 * kernel_eval(kernel, d1 - d2)
        + 0.5 * kernel_eval(kernel, d1 + d2)
        - kernel_eval(kernel, d1) * kernel_eval(kernel, d2)
    )
    if variant is Variant.TILDE:
        return 2.0 * bracket / D
    t1, t2 = x1 + y1, x2 + y2
    return (bracket + 0.5 * kernel_eval(kernel, t1 - t2)) / D


def covariance_matrix(
    variant: Variant,
    kernel: ShiftInvariantKernel,
    pairs_a: tuple[np.ndarray, np.ndarray],
    pairs_b: tuple[np.ndarray, np.ndarray],
    D: int,
) -> np.ndarray:
    """Vectorized :func:`covariance` over two stacks of point pairs.

    ``pairs_a`` and ``pairs_b`` are (x, y) tuples of (p, d) arrays; entry
    (i, j) of the result is the covariance of s at pair i of the first stack
    and pair j of the second.  Used by the mean-map-kernel variance, which
    sums this matrix over all pairs of sample pairs.
    """
    xa, ya = (np.atleast_2d(np.asarray(a, dtype=float)) for a in pairs_a)
    xb, yb = (np.atleast_2d(np.asarray(a, dtype=float)) for a in pairs_b)
    da, db = xa - ya, xb - yb

    def cross_k(A, B):
        sq = (
            np.sum(A * A, axis=1)[:, None]
            + np.sum(B * B, axis=1)[None, :]
            - 2.0 * (A @ B.T)
        )
        np.clip(sq, 0.0, None, out=sq)
        return np.exp(-sq / (2.0 * kernel.bandwidth**2))

    kernel_eval(kernel, da[0])  # family / dimension check
    bracket = (
        0.5 * cross_k(da, db)
        + 0.5 * cross_k(da, -db)
        - np.outer(radial_eval(kernel, np.linalg.norm(da, axis=1)),
                   radial_eval(kernel, np.linalg.norm(db, axis=1)))
    )
    if variant is Variant.TILDE:
        return 2.0 * bracket / D
    return (bracket + 0.5 * cross_k(xa + ya, xb + yb)) / D


def variance_advantage(kernel: ShiftInvariantKernel, delta) -> float:
    """Var cos(omega . delta) = 1/2 + k(2*delta)/2 - k(delta)^2.

    The paired sin/cos variant is the lower-variance choice at delta exactly
    when this is <= 1/2; for the Gaussian it equals
    (1 - exp(-||delta||^2/sigma^2))^2 / 2, which never exceeds 1/2.
    """
    kd = kernel_eval(kernel, delta)
    k2 = kernel_eval(kernel, 2.0 * np.asarray(delta, dtype=float))
    return 0.5 + 0.5 * k2 - kd * kd


def variance_profile(kernel: ShiftInvariantKernel, delta_norms) -> np.ndarray:
    """D-scaled variance curves against ||delta||, as a (len, 4) array.

    Columns: delta_norm, D*Var(tilde reconstruction), D*Var(breve
    reconstruction), kernel value.  The D scaling makes the columns
    dimension-free since both variances are exactly proportional to 1/D.
    """
    r = np.asarray(delta_norms, dtype=float)
    k1 = radial_eval(kernel, r)
    k2 = radial_eval(kernel, 2.0 * r)
    var_tilde = 1.0 + k2 - 2.0 * k1 * k1
    var_breve = 1.0 + 0.5 * k2 - k1 * k1
    return np.column_stack([r, var_tilde, var_breve, k1])

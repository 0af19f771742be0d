"""Random Fourier feature embeddings and kernel reconstruction.

Two embedding variants are implemented:

* ``TILDE`` -- D/2 frequencies, each contributing a sin/cos pair.  The
  reconstruction is shift-invariant and every embedded point has unit norm.
* ``BREVE`` -- D frequencies with random phases, one cosine each.  The
  reconstruction carries an extra zero-mean term that is not shift-invariant.

Embeddings are stored as dense D x n matrices, one column per point.
Reconstruction is a plain matrix product; the trigonometric closed forms are
kept to the test suite as oracles.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from pathlib import Path

import numpy as np

from .kernels import (
    ShiftInvariantKernel,
    SpectralDraw,
    _require_gaussian,
    sample_spectral,
)

# Binary layout: five little-endian int64 header words then float64 payload.
_MAGIC = int.from_bytes(b"RFFEMB01", "little")
_VARIANT_CODES = {"tilde": 0, "breve": 1}


class Variant(Enum):
    """Embedding variant: paired sin/cos features or random-phase cosines."""

    TILDE = "tilde"
    BREVE = "breve"


@dataclass(frozen=True)
class FeatureConfig:
    """Embedding settings: variant, target dimension D, kernel, and seed.

    The TILDE variant requires D even (it uses D/2 frequencies); the BREVE
    variant accepts any D >= 1.
    """

    variant: Variant
    D: int
    kernel: ShiftInvariantKernel
    seed: int

    def __post_init__(self) -> None:
        if self.variant is Variant.TILDE:
            if self.D < 2 or self.D % 2 != 0:
                raise ValueError(f"TILDE requires even D >= 2, got {self.D}")
        elif self.D < 1:
            raise ValueError(f"BREVE requires D >= 1, got {self.D}")

    @property
    def frequency_count(self) -> int:
        return self.D // 2 if self.variant is Variant.TILDE else self.D

    @property
    def with_phases(self) -> bool:
        return self.variant is Variant.BREVE


def spectral_draw(config: FeatureConfig) -> SpectralDraw:
    """Sample the frequencies (and phases for BREVE) that ``config`` needs."""
    return sample_spectral(
        config.kernel, config.frequency_count, config.with_phases, config.seed
    )


@dataclass(frozen=True)
class EmbeddedSet:
    """A D x n matrix of embedded points plus the config that produced it."""

    Z: np.ndarray
    config: FeatureConfig

    def __post_init__(self) -> None:
        self.Z.setflags(write=False)

    @property
    def n(self) -> int:
        return self.Z.shape[1]


def embed(config: FeatureConfig, draw: SpectralDraw, X: np.ndarray) -> EmbeddedSet:
    """Embed the rows of X (an n x d matrix) into R^D.

    TILDE rows alternate sin(w_i.x), cos(w_i.x); BREVE rows are
    cos(w_i.x + b_i).  Both carry the sqrt(2/D) scaling, so TILDE columns
    have unit norm and BREVE entries lie in [-sqrt(2/D), sqrt(2/D)].
    """
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[1] != config.kernel.dim:
        raise ValueError(f"X must be n x {config.kernel.dim}, got shape {X.shape}")
    if draw.kernel != config.kernel:
        raise ValueError("draw was sampled for a different kernel")
    if draw.count != config.frequency_count:
        raise ValueError(
            f"draw has {draw.count} frequencies, "
            f"{config.variant.value} with D={config.D} needs {config.frequency_count}"
        )
    if (draw.phases is not None) != config.with_phases:
        raise ValueError("phases must be present iff the variant is BREVE")

    n = X.shape[0]
    scale = np.sqrt(2.0 / config.D)
    Z = np.empty((config.D, n))
    # column blocks keep the transient projection matrix small relative to Z
    block = max(1, int(256 * 2**20 / 8 / max(draw.count, 1)))
    for j0 in range(0, n, block):
        j1 = min(n, j0 + block)
        proj = draw.omegas @ X[j0:j1].T  # (frequency_count, block)
        if config.variant is Variant.TILDE:
            np.sin(proj, out=Z[0::2, j0:j1])
            np.cos(proj, out=Z[1::2, j0:j1])
        else:
            proj += draw.phases[:, None]
            np.cos(proj, out=Z[:, j0:j1])
    Z *= scale
    return EmbeddedSet(Z=Z, config=config)


def reconstruct(zx: EmbeddedSet, zy: EmbeddedSet) -> np.ndarray:
    """Approximate kernel matrix with entries z(x_i).z(y_j), shape n x m."""
    if zx.config != zy.config:
        raise ValueError("embedded sets come from different configurations")
    return zx.Z.T @ zy.Z


def exact_gram(kernel: ShiftInvariantKernel, X: np.ndarray, Y: np.ndarray) -> np.ndarray:
    """Exact kernel matrix k(x_i - y_j) for row sets X (n x d) and Y (m x d)."""
    _require_gaussian(kernel)
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float)
    sq = (
        np.sum(X * X, axis=1)[:, None]
        + np.sum(Y * Y, axis=1)[None, :]
        - 2.0 * (X @ Y.T)
    )
    np.clip(sq, 0.0, None, out=sq)
    return np.exp(-sq / (2.0 * kernel.bandwidth**2))


def error_matrix(
    kernel: ShiftInvariantKernel,
    zx: EmbeddedSet,
    zy: EmbeddedSet,
    X: np.ndarray,
    Y: np.ndarray,
) -> np.ndarray:
    """Pointwise reconstruction error f = z(x).z(y) - k(x, y) over all pairs.

    |f| <= 2 for TILDE and |f| <= 3 for BREVE.
    """
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float)
    if zx.config != zy.config:
        raise ValueError("embedded sets come from different configurations")
    if kernel != zx.config.kernel:
        raise ValueError("kernel differs from the one the embeddings were built for")
    if X.shape[0] != zx.n or Y.shape[0] != zy.n:
        raise ValueError(
            f"point counts {X.shape[0]} x {Y.shape[0]} do not match "
            f"embeddings {zx.n} x {zy.n}"
        )
    return reconstruct(zx, zy) - exact_gram(kernel, X, Y)


def save_embedded(es: EmbeddedSet, path: str | Path) -> None:
    """Write an EmbeddedSet to a flat binary file.

    Header: magic, variant code, D, n, seed as little-endian int64; payload:
    the D x n matrix as little-endian float64 in column order.
    """
    header = np.array(
        [
            _MAGIC,
            _VARIANT_CODES[es.config.variant.value],
            es.config.D,
            es.n,
            es.config.seed,
        ],
        dtype="<i8",
    )
    with open(path, "wb") as fh:
        fh.write(header.tobytes())
        fh.write(es.Z.astype("<f8", copy=False).ravel(order="F").tobytes())


def load_embedded(path: str | Path, kernel: ShiftInvariantKernel) -> EmbeddedSet:
    """Read an EmbeddedSet written by :func:`save_embedded`.

    The file stores no kernel parameters, so the kernel is supplied by the
    caller.
    """
    raw = Path(path).read_bytes()
    header = np.frombuffer(raw[:40], dtype="<i8")
    if header[0] != _MAGIC:
        raise ValueError(f"{path}: bad magic {header[0]:#x}")
    codes = {v: k for k, v in _VARIANT_CODES.items()}
    variant = Variant(codes[int(header[1])])
    D, n, seed = int(header[2]), int(header[3]), int(header[4])
    payload = np.frombuffer(raw[40:], dtype="<f8")
    if payload.size != D * n:
        raise ValueError(f"{path}: payload has {payload.size} floats, expected {D * n}")
    Z = payload.reshape((D, n), order="F").copy()
    config = FeatureConfig(variant=variant, D=D, kernel=kernel, seed=seed)
    return EmbeddedSet(Z=Z, config=config)

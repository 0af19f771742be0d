"""Analytic error-bound evaluators for the feature reconstructions.

Covers the Bernstein-refined uniform (sup-norm) tail bounds and their
dimension constants, the chaining (entropy-integral) bounds on the expected
maximal error, Bousquet-style concentration about that mean, exact L2 error
expectations with McDiarmid concentration, and numerical integration of
survival bounds into expected-max estimates.

All evaluators return raw, unclamped values; display layers clamp survival
probabilities at 1.  Special functions come from scipy (``erfc`` is accurate
to well below 1e-10 absolute over the arguments used here).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from enum import Enum

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.integrate import quad
from scipy.optimize import brentq
from scipy.special import erfc

from .features import Variant
from .kernels import (
    ShiftInvariantKernel,
    kernel_eval,
    lipschitz_const,
    radial_eval,
    sigma_p,
    wimpy_variance_sup,
)

_LN2 = math.log(2.0)


class BoundForm(Enum):
    TIGHT = "tight"  # dimension-dependent constants and variance-aware rate
    LOOSE = "loose"  # dimension-free constants; valid only for eps <= sigma_p * ell


@dataclass(frozen=True)
class BoundInput:
    """Scalar bundle consumed by the bound evaluators.

    Attributes
    ----------
    d : input dimension.
    ell : diameter of the (compact) input domain, in input units.
    sigma_p : root second moment of the spectral law.
    D : embedding dimension.
    epsilon : error level the bound is evaluated at; must be positive.
    delta : failure probability target in (0, 1), used by required_D.
    variance_sup : sup over the domain of Var cos(omega . delta); drives the
        Bernstein coefficients of the tight-form bounds.
    sigma_w_sq : wimpy variance sup (defaults to 2 * variance_sup, which is
        exact since both take the sup of proportional expressions).
    ell_over_rho : diameter-to-radius ratio of the domain, in [1, 2]; only
        the random-phase expected-max bound uses it (2 = ball, 1 = sphere).
    L : Lipschitz constant of the kernel; derived for the Gaussian if None.
    R : expected maximum frequency norm; the Gaussian sub-Gaussian upper
        bound is substituted if None.
    """

    d: int
    ell: float
    sigma_p: float
    D: int
    epsilon: float
    delta: float
    variance_sup: float
    sigma_w_sq: float | None = None
    ell_over_rho: float = 2.0
    L: float | None = None
    R: float | None = None

    def __post_init__(self) -> None:
        if self.d < 1:
            raise ValueError(f"d must be >= 1, got {self.d}")
        for name in ("ell", "sigma_p", "epsilon"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)}")
        if self.D < 1:
            raise ValueError(f"D must be >= 1, got {self.D}")
        if not 0.0 < self.delta < 1.0:
            raise ValueError(f"delta must lie in (0, 1), got {self.delta}")
        if not 0.0 <= self.variance_sup <= 2.0:
            raise ValueError(f"variance_sup out of range: {self.variance_sup}")
        if not 1.0 <= self.ell_over_rho <= 2.0:
            raise ValueError(f"ell_over_rho must lie in [1, 2], got {self.ell_over_rho}")
        if self.sigma_w_sq is None:
            object.__setattr__(self, "sigma_w_sq", 2.0 * self.variance_sup)


def gaussian_bound_input(
    kernel: ShiftInvariantKernel,
    ell: float,
    D: int,
    epsilon: float,
    delta: float = 0.05,
    ell_over_rho: float = 2.0,
    grid_resolution: int = 10_001,
) -> BoundInput:
    """Assemble a BoundInput for a Gaussian kernel on a domain of diameter ell."""
    v_sup = 0.5 * wimpy_variance_sup(kernel, ell, grid_resolution)
    return BoundInput(
        d=kernel.dim,
        ell=float(ell),
        sigma_p=sigma_p(kernel),
        D=int(D),
        epsilon=float(epsilon),
        delta=float(delta),
        variance_sup=v_sup,
        ell_over_rho=float(ell_over_rho),
        L=lipschitz_const(kernel),
    )


def beta_coefficient(variant: Variant, d: int) -> float:
    """Net-radius constant of the uniform bound, from exact optimization.

    TILDE: ((d/2)^(-d/(d+2)) + (d/2)^(2/(d+2))) * 2^((6d+2)/(d+2)); peaks at
    d = 64 (rounding to 66) and tends to 64.  BREVE: the analogous constant
    with exponents in d+1 and an extra 3^(d/(d+1)); peaks at d = 48
    (rounding to 98) and tends to 96.
    """
    if d < 1:
        raise ValueError(f"d must be >= 1, got {d}")
    d = float(d)
    if variant is Variant.TILDE:
        half = d / 2.0
        return (half ** (-d / (d + 2)) + half ** (2 / (d + 2))) * 2.0 ** (
            (6 * d + 2) / (d + 2)
        )
    return (
        (d ** (-d / (d + 1)) + d ** (1 / (d + 1)))
        * 2.0 ** ((5 * d + 1) / (d + 1))
        * 3.0 ** (d / (d + 1))
    )


def _alpha_from_sup(variant: Variant, variance_sup: float, epsilon: float) -> float:
    # Bernstein/Hoeffding unification: the rate constant, clamped at the
    # Hoeffding value 1.
    if variant is Variant.TILDE:
        return min(1.0, variance_sup + epsilon / 3.0)
    return min(1.0, 0.125 + 0.25 * variance_sup + epsilon / 6.0)


def alpha_coefficient(
    variant: Variant,
    kernel: ShiftInvariantKernel,
    epsilon: float,
    domain_radius: float,
    grid_resolution: int = 10_001,
) -> float:
    """Variance-aware Bernstein coefficient, from a radial grid sup.

    ``domain_radius`` is the radius of the difference domain (the diameter of
    the input domain).  For the Gaussian the TILDE value never exceeds
    1/2 + epsilon/3 and the BREVE value never exceeds 1/4 + epsilon/6.
    """
    if not epsilon > 0:
        raise ValueError(f"epsilon must be positive, got {epsilon}")
    r = np.linspace(0.0, domain_radius, grid_resolution)
    k1 = radial_eval(kernel, r)
    k2 = radial_eval(kernel, 2.0 * r)
    v_sup = float(np.max(0.5 + 0.5 * k2 - k1 * k1))
    return _alpha_from_sup(variant, v_sup, epsilon)


def _uniform_bound_at(
    variant: Variant,
    form: BoundForm,
    epsilon: float,
    d: int,
    ell: float,
    sp: float,
    D: int,
    variance_sup: float,
) -> float:
    ratio = sp * ell / epsilon
    if variant is Variant.TILDE:
        rate = 8.0 * (d + 2)
        power = 2.0 * d / (d + 2)
        coeff = beta_coefficient(Variant.TILDE, d)
        loose_coeff = 66.0
    else:
        rate = 32.0 * (d + 1)
        power = 2.0 * d / (d + 1)
        coeff = beta_coefficient(Variant.BREVE, d)
        loose_coeff = 98.0
    if form is BoundForm.LOOSE:
        if epsilon > sp * ell:
            raise ValueError(
                f"loose form requires epsilon <= sigma_p * ell "
                f"({epsilon} > {sp * ell})"
            )
        return loose_coeff * ratio**2 * math.exp(-D * epsilon**2 / rate)
    alpha = _alpha_from_sup(variant, variance_sup, epsilon)
    return coeff * ratio**power * math.exp(-D * epsilon**2 / (rate * alpha))


def uniform_bound(variant: Variant, inp: BoundInput, form: BoundForm) -> float:
    """Tail bound on Pr(sup-norm reconstruction error >= epsilon).

    Raw value; not clamped at 1.  Diverges as epsilon -> 0 and decays
    exponentially in D.
    """
    return _uniform_bound_at(
        variant,
        form,
        inp.epsilon,
        inp.d,
        inp.ell,
        inp.sigma_p,
        inp.D,
        inp.variance_sup,
    )


def required_D(variant: Variant, inp: BoundInput) -> int:
    """Smallest embedding dimension with tight-form tail mass <= delta.

    Solves the closed-form inequality directly (no root finding); the result
    is even for TILDE.  Plugging it back into the tight uniform bound yields
    a value <= delta.
    """
    d = inp.d
    alpha = _alpha_from_sup(variant, inp.variance_sup, inp.epsilon)
    ratio = inp.sigma_p * inp.ell / inp.epsilon
    if variant is Variant.TILDE:
        rate = 8.0 * (d + 2)
        power = 2.0 * d / (d + 2)
        minimum = 2
    else:
        rate = 32.0 * (d + 1)
        power = 2.0 * d / (d + 1)
        minimum = 1
    coeff = beta_coefficient(variant, d)
    bracket = power * math.log(ratio) + math.log(coeff / inp.delta)
    d_star = rate * alpha / inp.epsilon**2 * bracket
    out = max(minimum, math.ceil(d_star))
    if variant is Variant.TILDE and out % 2 != 0:
        out += 1
    return out


def dudley_gamma() -> float:
    """Entropy-integral constant for the shift-invariant error process.

    Closed form 4*sqrt(pi)*erfc(2*sqrt(log 2)) + sqrt(log 2), about 0.964.
    """
    return float(4.0 * math.sqrt(math.pi) * erfc(2.0 * math.sqrt(_LN2)) + math.sqrt(_LN2))


def dudley_gamma_prime(ell_over_rho: float) -> float:
    """Entropy-rate coefficient for the random-phase error process.

    Parameterized by the domain's diameter-to-radius ratio in [1, 2]
    (2 for a ball, 1 for a sphere).  Decreases monotonically from about
    1.541 at ratio 1 to about 0.803 at ratio 2.
    """
    r = float(ell_over_rho)
    if not 1.0 <= r <= 2.0:
        raise ValueError(f"ell_over_rho must lie in [1, 2], got {r}")
    head = 4.0 * math.sqrt(math.pi) * erfc(
        math.sqrt(0.5 * _LN2 + math.log(4.0) * math.sqrt(2.0) * r)
    )
    tail = math.sqrt(2.5 * _LN2 + math.log(r)) / r
    return head + tail


def _gaussian_R(variant: Variant, d: int, sp: float, D: int) -> float:
    # Sub-Gaussian bound on E max ||omega_i||: (sqrt(d) + sqrt(2 log m))/sigma
    # with m the number of sampled frequencies (D/2 paired, D random-phase).
    sigma = math.sqrt(d) / sp
    m = D // 2 if variant is Variant.TILDE else D
    return (math.sqrt(d) + math.sqrt(2.0 * math.log(m))) / sigma


def expected_max_bound(variant: Variant, inp: BoundInput) -> float:
    """Chaining bound on the expected sup-norm error E ||f||_inf.

    TILDE: 24 * gamma * sqrt(d) * ell / sqrt(D) * (R + L);
    BREVE: 48 * gamma'(ell/rho) * ell * sqrt(d) / sqrt(D) * (R + L).
    When R or L is absent the Gaussian values are substituted; R then uses
    the sub-Gaussian maximum bound over the variant's frequency count.
    """
    if inp.D < 4:
        raise ValueError(f"expected_max_bound needs D >= 4, got {inp.D}")
    L = inp.L if inp.L is not None else math.e**-0.5 * inp.sigma_p / math.sqrt(inp.d)
    R = inp.R if inp.R is not None else _gaussian_R(variant, inp.d, inp.sigma_p, inp.D)
    scale = math.sqrt(inp.d) * inp.ell / math.sqrt(inp.D) * (R + L)
    if variant is Variant.TILDE:
        return 24.0 * dudley_gamma() * scale
    return 48.0 * dudley_gamma_prime(inp.ell_over_rho) * scale


def concentration_bound(
    variant: Variant, epsilon: float, D: int, expected_max: float, sigma_w_sq: float
) -> float:
    """Bousquet-style bound on Pr(sup-norm error exceeds its mean by epsilon).

    Two-sided (carries the union-bound factor 2).  Returns exactly 2 at
    epsilon = 0.
    """
    if epsilon < 0 or expected_max < 0:
        raise ValueError("epsilon and expected_max must be nonnegative")
    if epsilon == 0.0:
        return 2.0
    if variant is Variant.TILDE:
        denom = D * expected_max + 0.5 * sigma_w_sq + D * epsilon / 6.0
    else:
        denom = (
            4.0 / 9.0 * D * expected_max
            + (sigma_w_sq + 1.0) / 81.0
            + 2.0 / 27.0 * D * epsilon
        )
    return 2.0 * math.exp(-D * epsilon**2 / denom)


# ---------------------------------------------------------------------------
# L2 error: exact expectation and McDiarmid concentration
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BoxUniform:
    """Uniform measure on X^2 where X is a product of intervals.

    ``mass`` is the total measure of X^2 (1 gives a probability measure).
    """

    lows: tuple[float, ...]
    highs: tuple[float, ...]
    mass: float = 1.0

    def __post_init__(self) -> None:
        if len(self.lows) != len(self.highs) or not self.lows:
            raise ValueError("lows and highs must be nonempty and equal-length")
        if any(h <= lo for lo, h in zip(self.lows, self.highs)):
            raise ValueError("each interval must have positive width")
        if not self.mass > 0:
            raise ValueError(f"mass must be positive, got {self.mass}")


@dataclass(frozen=True)
class WeightedPairs:
    """Discrete measure on X^2: point masses at (x_i, y_i) with given weights."""

    xs: np.ndarray
    ys: np.ndarray
    weights: np.ndarray

    def __post_init__(self) -> None:
        xs = np.atleast_2d(np.asarray(self.xs, dtype=float))
        ys = np.atleast_2d(np.asarray(self.ys, dtype=float))
        w = np.atleast_1d(np.asarray(self.weights, dtype=float))
        if xs.shape != ys.shape or xs.shape[0] != w.shape[0]:
            raise ValueError("xs, ys, weights have inconsistent shapes")
        if np.any(w < 0) or not w.sum() > 0:
            raise ValueError("weights must be nonnegative with positive total")
        object.__setattr__(self, "xs", xs)
        object.__setattr__(self, "ys", ys)
        object.__setattr__(self, "weights", w)

    @property
    def mass(self) -> float:
        return float(self.weights.sum())


def _axis_pair_mean(lo: float, hi: float, fn, rtol: float = 1e-8) -> float:
    # Normalized double integral (1/w^2) * int int fn(x - y) dx dy by tensor
    # Gauss-Legendre, doubling the order until the relative change is < rtol.
    prev = None
    order = 16
    while True:
        x, w = leggauss(order)
        xm = 0.5 * (hi - lo) * x + 0.5 * (hi + lo)
        wm = 0.5 * (hi - lo) * w
        vals = fn(xm[:, None] - xm[None, :])
        cur = float(wm @ vals @ wm) / (hi - lo) ** 2
        if prev is not None and abs(cur - prev) <= rtol * max(abs(cur), 1e-300):
            return cur
        if order >= 2048:
            return cur
        prev = cur
        order *= 2


def l2_expected_error(
    variant: Variant,
    kernel: ShiftInvariantKernel,
    measure,
    D: int,
) -> float:
    """Exact E ||f||_mu^2, the expected squared L2 reconstruction error.

    TILDE: (1/D) * [mu(X^2) + int k(2x, 2y) dmu - 2 * int k(x, y)^2 dmu];
    BREVE: (1/D) * [mu(X^2) + int k(2x, 2y) dmu / 2 - int k(x, y)^2 dmu].

    The measure is either :class:`BoxUniform` (integrals by tensor
    Gauss-Legendre, separable per axis for the Gaussian) or
    :class:`WeightedPairs` (finite sums).
    """
    if D < 1:
        raise ValueError(f"D must be >= 1, got {D}")
    s = kernel.bandwidth
    if isinstance(measure, BoxUniform):
        if len(measure.lows) != kernel.dim:
            raise ValueError(
                f"box has {len(measure.lows)} axes, kernel expects {kernel.dim}"
            )
        i_k2 = 1.0
        i_ksq = 1.0
        for lo, hi in zip(measure.lows, measure.highs):
            i_k2 *= _axis_pair_mean(lo, hi, lambda t: np.exp(-2.0 * t * t / s**2))
            i_ksq *= _axis_pair_mean(lo, hi, lambda t: np.exp(-t * t / s**2))
        M = measure.mass
        i_k2 *= M
        i_ksq *= M
    elif isinstance(measure, WeightedPairs):
        deltas = measure.xs - measure.ys
        kd = np.atleast_1d(kernel_eval(kernel, deltas))
        k2 = np.atleast_1d(kernel_eval(kernel, 2.0 * deltas))
        M = measure.mass
        i_k2 = float(measure.weights @ k2)
        i_ksq = float(measure.weights @ (kd * kd))
    else:
        raise TypeError(f"unsupported measure type {type(measure).__name__}")
    if variant is Variant.TILDE:
        return (M + i_k2 - 2.0 * i_ksq) / D
    return (M + 0.5 * i_k2 - i_ksq) / D


def l2_concentration_bound(
    variant: Variant, epsilon: float, D: int, M: float, form: BoundForm
) -> float:
    """McDiarmid bound on Pr(| ||f||_mu^2 - E ||f||_mu^2 | >= epsilon).

    TIGHT uses the exact bounded-difference constants ((16D+4)/D^2 * M for
    TILDE, 32(D+1)/D^2 * M for BREVE); LOOSE replaces the denominators by
    200 M^2 and 2048 M^2.  The tight denominators approach 128 M^2 and
    512 M^2 per unit D as D grows.
    """
    if not M > 0:
        raise ValueError(f"M must be positive, got {M}")
    if epsilon < 0:
        raise ValueError(f"epsilon must be nonnegative, got {epsilon}")
    if variant is Variant.TILDE:
        if form is BoundForm.TIGHT:
            expo = D**3 * epsilon**2 / (8.0 * (4.0 * D + 1.0) ** 2 * M**2)
        else:
            expo = D * epsilon**2 / (200.0 * M**2)
    else:
        if form is BoundForm.TIGHT:
            expo = D**3 * epsilon**2 / (512.0 * (D + 1.0) ** 2 * M**2)
        else:
            expo = D * epsilon**2 / (2048.0 * M**2)
    return 2.0 * math.exp(-expo)


def integrate_survival_bound(
    variant: Variant, inp: BoundInput, form: BoundForm, eps_max: float
) -> float:
    """Integral of min(1, uniform tail bound) over epsilon in [0, eps_max].

    An upper estimate of the expected sup-norm error.  For the LOOSE form
    the integration range is clipped to sigma_p * ell, where that form is
    defined.  Absolute quadrature error stays below 1e-4: the clamp point is
    located by root finding and the smooth tail integrated adaptively.
    Requires the bound at the upper limit to be below 1e-8.
    """
    upper = float(eps_max)
    if form is BoundForm.LOOSE:
        upper = min(upper, inp.sigma_p * inp.ell)

    def bound(e: float) -> float:
        return _uniform_bound_at(
            variant, form, e, inp.d, inp.ell, inp.sigma_p, inp.D, inp.variance_sup
        )

    tail = bound(upper)
    if not tail < 1e-8:
        raise ValueError(
            f"eps_max too small: bound({upper}) = {tail:.3g} is not < 1e-8"
        )
    # The bound decreases monotonically in epsilon and blows up near 0, so
    # there is exactly one clamp point where it crosses 1.
    lo = upper
    while bound(lo) <= 1.0:
        lo /= 2.0
    eps_star = brentq(lambda e: bound(e) - 1.0, lo, upper, xtol=1e-13)

    kinks = []
    if form is BoundForm.TIGHT:
        # alpha saturates at 1 here; the integrand has a kink.
        if variant is Variant.TILDE:
            e_kink = 3.0 * (1.0 - inp.variance_sup)
        else:
            e_kink = 6.0 * (0.875 - 0.25 * inp.variance_sup)
        if eps_star < e_kink < upper:
            kinks.append(e_kink)
    val, _ = quad(bound, eps_star, upper, points=kinks or None, limit=200, epsabs=1e-7)
    return eps_star + val


def survival_bound_curve(
    variant: Variant, inp: BoundInput, form: BoundForm, eps_grid
) -> np.ndarray:
    """min(1, uniform tail bound) on a grid of epsilon values."""
    out = np.empty(len(eps_grid))
    for i, e in enumerate(eps_grid):
        if e <= 0:
            out[i] = 1.0
            continue
        out[i] = min(
            1.0, uniform_bound(variant, replace(inp, epsilon=float(e)), form)
        )
    return out

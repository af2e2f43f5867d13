"""Distributions of prior random means: transforms and scale mixtures.

The characteristic function L of theta = int x dP satisfies the transform
identity L(u) = int L0(u s) L(u (1-s)) dH(s).  Two families admit more:
Cauchy bases are a fixed point (theta is again standard Cauchy for every
H), and normal/stable bases make theta an independent scale times a
standard variate, the scale being a power sum of the stick weights.  The
squared-weight sum W = sum gamma_j^2 obeys the perpetuity
W =_d B^2 + (1-B)^2 W, which gives its exact moment sequence.
"""

from dataclasses import dataclass
from math import comb

import numpy as np

from .bases import symmetric_stable_variates
from .rng import weight_and_atom_streams

__all__ = [
    "WeightPowerSum",
    "w_moment",
    "weight_power_sum_draws",
    "sample_scale_mixture",
    "cf_identity_residual",
]


@dataclass(frozen=True)
class WeightPowerSum:
    """A realized power sum of stick weights.

    ``value`` is sum gamma_j^2 under the normal convention (alpha = 2, no
    root) and (sum gamma_j^alpha)^(1/alpha) otherwise; both lie in (0, 1]
    for alpha >= 1, with 1 reached only when a single stick carries all
    mass.
    """

    alpha: float
    value: float

    def __post_init__(self):
        if not 0.0 < self.alpha <= 2.0:
            raise ValueError("alpha must be in (0, 2]")


def w_moment(mixing, p):
    """Exact E W^p for W = sum gamma_j^2.

    From the perpetuity, E W^p = (1 - M(0, 2p))^{-1}
    sum_{j<p} C(p, j) M(2(p-j), 2j) E W^j.
    """
    p = int(p)
    if p < 1:
        raise ValueError("p must be >= 1")
    moments = [1.0]
    for q in range(1, p + 1):
        acc = sum(comb(q, j) * mixing.product_moment(2 * (q - j), 2 * j) * moments[j]
                  for j in range(q))
        moments.append(acc / mixing.one_minus_m0(2 * q))
    return moments[p]


def weight_power_sum_draws(mixing, alpha, count, epsilon=1e-12, seed=0,
                           max_sticks=10 ** 6):
    """Independent draws of sum gamma_j^alpha (no root applied).

    The truncated tail contributes at most remainder^alpha times a fresh
    power sum, so the bias is O(epsilon^alpha).
    """
    if not 0.0 < alpha <= 2.0:
        raise ValueError("alpha must be in (0, 2]")
    rng_w, _ = weight_and_atom_streams(seed)
    totals = np.zeros(count)
    remainder = np.ones(count)
    active = np.ones(count, dtype=bool)
    sticks = 0
    while active.any():
        sticks += 1
        if sticks > max_sticks:
            raise RuntimeError("stick cap reached while drawing power sums")
        n_act = int(active.sum())
        fractions = np.atleast_1d(mixing.sample(rng_w, n_act))
        totals[active] += (remainder[active] * fractions) ** alpha
        remainder[active] *= 1.0 - fractions
        active[active] = remainder[active] >= epsilon
    return totals


def sample_scale_mixture(mixing, count, alpha=2.0, normal_convention=True,
                         epsilon=1e-12, seed=0):
    """Draws of the random mean for a normal or symmetric-stable base.

    With ``normal_convention`` (alpha must be 2) each draw is
    sqrt(sum gamma_j^2) times an independent N(0, 1) variate.  Otherwise
    the scale is (sum gamma_j^alpha)^(1/alpha) and the variate is
    symmetric stable(alpha, 1) with cf exp(-|u|^alpha); note alpha = 2
    under that convention is N(0, 2), a factor sqrt(2) wider than the
    normal-convention draws.
    """
    if normal_convention and alpha != 2.0:
        raise ValueError("the normal convention is the alpha = 2 case")
    rng_w, rng_a = weight_and_atom_streams(seed)
    power_alpha = 2.0 if normal_convention else alpha
    sums = weight_power_sum_draws(mixing, power_alpha, count,
                                  epsilon=epsilon, seed=seed)
    if normal_convention:
        scale = np.sqrt(sums)
        variates = rng_a.standard_normal(count)
    else:
        scale = sums ** (1.0 / alpha)
        variates = symmetric_stable_variates(alpha, rng_a, count)
    return scale * variates


def cf_identity_residual(mixing, cf_base, cf_mean, u_grid, tol=1e-10):
    """Max residual of the transform identity over a grid of frequencies.

    For each u, compares cf_mean(u) against
    int cf_base(u s) cf_mean(u (1-s)) dH(s) by the mixing quadrature.
    Both callables must accept numpy arrays and may return complex values.
    Returns the residual per grid point and the maximum.
    """
    u_grid = np.asarray(u_grid, dtype=float)
    residuals = np.empty(u_grid.size)
    for k, u in enumerate(u_grid):
        mixed = mixing.expect(lambda s: cf_base(u * s) * cf_mean(u * (1.0 - s)),
                              tol=tol)
        residuals[k] = abs(cf_mean(u) - mixed)
    return {"u": u_grid, "residual": residuals,
            "max_residual": float(residuals.max())}

"""Exact prior moments of random means and the matched-variance analysis.

The random mean theta = int g dP satisfies theta =_d B Y + (1-B) theta
with Y = g(xi) from the base measure, which yields a closed recursion for
E (theta - x)^p in terms of the product moments M(i, j) and the base
central moments.  Everything here is analytic; the Monte Carlo
counterparts live in :mod:`gdprior.stickprior`.
"""

from math import comb

import numpy as np

from .bases import HeavyTailedBaseError

__all__ = [
    "central_moment",
    "summary_moments",
    "set_prob_moments",
    "stick_variance_factor",
    "stick_skewness_factor",
    "matched_beta_parameters",
    "beta_skewness_factor",
    "skewness_ratio_curve",
    "kurtosis_ratio_curve",
]

DEFAULT_MAX_P = 12


def _central_moments_at_mean(mixing, base, p_max):
    """E (theta - theta_0)^k for k = 0..p_max via the stochastic-equation recursion.

    E (theta-x)^p = (1 - M(0,p))^{-1} sum_{j<p} C(p,j) M(p-j, j)
                    E0 (Y-x)^{p-j} E (theta-x)^j,
    evaluated at x = theta_0 where conditioning is best.
    """
    theta0 = base.mean
    base_c = [base.central_moment(k, theta0) for k in range(p_max + 1)]
    out = [1.0, 0.0]
    for p in range(2, p_max + 1):
        acc = 0.0
        for j in range(p):
            acc += (comb(p, j) * mixing.product_moment(p - j, j)
                    * base_c[p - j] * out[j])
        out.append(acc / mixing.one_minus_m0(p))
    return theta0, out[:p_max + 1]


def central_moment(mixing, base, p, x=None, max_p=DEFAULT_MAX_P):
    """E (theta - x)^p for the prior random mean theta = int g dP.

    Parameters
    ----------
    mixing : MixingDistribution
    base : BaseMeasure
        Must have finite moments up to order p.
    p : int
    x : float, optional
        Defaults to theta_0 = E Y, giving the central moment.
    max_p : int
        Guard on the recursion depth; raise it explicitly for higher orders.
    """
    p = int(p)
    if p < 0:
        raise ValueError("p must be >= 0")
    if p > max_p:
        raise ValueError(f"p={p} exceeds max_p={max_p}; pass a larger max_p")
    if base.heavy_tailed:
        raise HeavyTailedBaseError(
            "heavy-tailed base: prior random-mean moments do not exist")
    theta0, central = _central_moments_at_mean(mixing, base, p)
    if x is None or x == theta0:
        return central[p]
    # binomial transport from theta_0 to x
    shift = theta0 - x
    return float(sum(comb(p, k) * central[k] * shift ** (p - k)
                     for k in range(p + 1)))


def summary_moments(mixing, base):
    """Mean, variance, and third/fourth central moments of the random mean.

    Defined as the p = 1..4 outputs of :func:`central_moment`, so the two
    surfaces agree exactly.
    """
    theta0 = base.mean
    return {
        "mean": theta0,
        "variance": central_moment(mixing, base, 2),
        "third_central": central_moment(mixing, base, 3),
        "fourth_central": central_moment(mixing, base, 4),
    }


def stick_variance_factor(mixing):
    """M(2,0)/(1 - M(0,2)): variance of P(A) per unit p0(1-p0)."""
    return mixing.product_moment(2, 0) / mixing.one_minus_m0(2)


def stick_skewness_factor(mixing):
    """M(3,0)/(1 - M(0,3)): third central moment factor for P(A)."""
    return mixing.product_moment(3, 0) / mixing.one_minus_m0(3)


def set_prob_moments(mixing, p0):
    """Mean, variance, and third central moment of the set probability P(A)."""
    if not 0.0 <= p0 <= 1.0:
        raise ValueError("p0 must lie in [0, 1]")
    return {
        "mean": p0,
        "variance": stick_variance_factor(mixing) * p0 * (1.0 - p0),
        "third_central": (stick_skewness_factor(mixing)
                          * p0 * (1.0 - p0) * (1.0 - 2.0 * p0)),
    }


# ---------------------------------------------------------------------------
# matched-variance flexibility analysis
# ---------------------------------------------------------------------------

def matched_beta_parameters(b0, x):
    """(a, b) = (2x - 1, b0 x), the Beta family matching a Dirichlet(b0).

    With the same base measure this matches the mean of every random mean
    automatically; this calibration also matches every variance.  Requires
    x > 1/2 so that a stays positive.
    """
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0.5):
        raise ValueError("matched parameters need x > 1/2")
    a = 2.0 * x - 1.0
    b = b0 * x
    return a, b


def beta_skewness_factor(a, b):
    """(a+1)(a+2) / (a^2 + 3a(b+1) + 3b^2 + 6b + 2) for Beta(a, b) sticks."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    return (a + 1.0) * (a + 2.0) / (a * a + 3.0 * a * (b + 1.0)
                                    + 3.0 * b * b + 6.0 * b + 2.0)


def skewness_ratio_curve(b0, x_grid):
    """Skewness of the matched Beta(2x-1, b0 x) family over the Dirichlet(b0).

    Returns the curve on ``x_grid`` together with the endpoint values
    rho_max (x -> 1/2+) and rho_min (x -> infinity); the interval straddles 1,
    which is the Dirichlet point x = 1.
    """
    if b0 <= 0:
        raise ValueError("b0 must be positive")
    x = np.asarray(x_grid, dtype=float)
    a, b = matched_beta_parameters(b0, x)
    dirichlet = 2.0 / ((b0 + 1.0) * (b0 + 2.0))
    rho = beta_skewness_factor(a, b) / dirichlet
    rho_max = (b0 + 1.0) * (b0 + 2.0) / (2.0 + 3.0 * b0 + 0.75 * b0 * b0)
    rho_min = 2.0 * (b0 + 1.0) * (b0 + 2.0) / (4.0 + 6.0 * b0 + 3.0 * b0 * b0)
    return {"x": x, "a": a, "b": b, "rho": rho,
            "rho_max": rho_max, "rho_min": rho_min}


def _beta_fourth_central(a, b, q0_fourth_standardized):
    """E (theta - theta_0)^4 for Beta(a, b) sticks and sigma_0^2 = 1."""
    from .mixing import BetaMixing
    m = BetaMixing(a, b)
    var = stick_variance_factor(m)
    return (m.product_moment(4, 0) * q0_fourth_standardized
            + 6.0 * m.product_moment(2, 2) * var) / m.one_minus_m0(4)


def kurtosis_ratio_curve(b0, q0_fourth_standardized, x_grid):
    """Fourth central moment of the matched family relative to x = 1.

    ``q0_fourth_standardized`` is E0 (Y - theta_0)^4 / sigma_0^4, which must
    be >= 1.  The sigma_0 scale cancels in the ratio.
    """
    if q0_fourth_standardized < 1.0:
        raise ValueError("standardized fourth moment must be >= 1")
    x = np.asarray(x_grid, dtype=float)
    a, b = matched_beta_parameters(b0, x)
    ref = _beta_fourth_central(1.0, b0, q0_fourth_standardized)
    ratio = np.array([_beta_fourth_central(ai, bi, q0_fourth_standardized)
                      for ai, bi in zip(np.atleast_1d(a), np.atleast_1d(b))]) / ref
    return {"x": x, "a": a, "b": b, "kurtosis_ratio": ratio}

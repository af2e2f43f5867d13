"""Stick-fraction distributions on (0, 1) and their product moments.

The law H of the stick fractions enters every closed-form result through
the product moments

    M(i, j) = E B^i (1 - B)^j = \\int s^i (1 - s)^j dH(s),

and through the derived sequences delta_j = M(1,j)/(1 - M(0,j+1)) and
w_n = (n+1) delta_n.  Two concrete families are supported: Beta(a, b),
where M(i, j) has a rising-factorial closed form, and piecewise-linear
densities tabulated on a grid inside (0, 1), where moments come from
cell-exact Gauss-Legendre quadrature.  A degenerate point mass at 1 is
provided for limit checks.

Instances are immutable after construction; the per-instance moment cache
is fill-on-demand and idempotent, so sharing across workers is safe.
"""

import math
from dataclasses import dataclass

import numpy as np

from ._quad import QuadratureError, dyadic_cells, integrate_cells

__all__ = [
    "MixingDistribution",
    "BetaMixing",
    "GridMixing",
    "UnitMass",
    "DeltaSequence",
    "QuadratureError",
    "product_moment",
    "delta_sequence",
    "update_mixing",
]

QUAD_TOL = 1e-10


def _check_counts(i, j):
    if i < 0 or j < 0 or i != int(i) or j != int(j):
        raise ValueError(f"moment orders must be nonnegative integers, got ({i}, {j})")
    return int(i), int(j)


class MixingDistribution:
    """Law of the i.i.d. stick fractions; base class for the variants.

    Parameters
    ----------
    max_order : int or None
        Optional cap on i + j for product moments (callers working with a
        sample of size n typically need orders up to 2n + 4).  None means
        uncapped.
    """

    def __init__(self, max_order=None):
        self.max_order = max_order
        self._cache = {}

    # -- variant-specific -------------------------------------------------
    def _moment(self, i, j):
        raise NotImplementedError

    def _one_minus_m0(self, k):
        raise NotImplementedError

    def sample(self, rng, size=None):
        """Draw stick fractions B ~ H."""
        raise NotImplementedError

    def tilt(self, successes, failures):
        """Distribution proportional to s^successes (1-s)^failures dH(s)."""
        raise NotImplementedError

    def expect(self, f, tol=QUAD_TOL):
        """Integrate a callable against H (used for transform identities)."""
        raise NotImplementedError

    def describe(self):
        raise NotImplementedError

    # -- shared surface ----------------------------------------------------
    def product_moment(self, i, j):
        """E B^i (1-B)^j, cached per instance."""
        i, j = _check_counts(i, j)
        if self.max_order is not None and i + j > self.max_order:
            raise ValueError(
                f"moment order {i + j} exceeds configured maximum {self.max_order}")
        key = (i, j)
        value = self._cache.get(key)
        if value is None:
            value = float(self._moment(i, j))
            self._cache[key] = value
        return value

    def one_minus_m0(self, k):
        """1 - M(0, k) computed without cancellation."""
        k = int(k)
        if k == 0:
            return 0.0
        key = ("omm", k)
        value = self._cache.get(key)
        if value is None:
            value = float(self._one_minus_m0(k))
            self._cache[key] = value
        return value

    def delta(self, j):
        """delta_j = M(1, j) / (1 - M(0, j+1))."""
        return self.product_moment(1, j) / self.one_minus_m0(j + 1)

    def prior_weight(self, n):
        """w_n = (n+1) delta_n, the posterior mass left to the prior."""
        return (n + 1) * self.delta(n)

    def delta_sequence(self, n_max):
        return delta_sequence(self, n_max)


class BetaMixing(MixingDistribution):
    """Beta(a, b) stick fractions; the a = 1 slice is the Dirichlet process.

    Product moments use the rising-factorial closed form, evaluated as an
    interleaved ratio product so that n in the hundreds neither overflows
    nor loses more than ~(i+j) ulp.
    """

    def __init__(self, a, b, max_order=None):
        if not (a > 0 and b > 0):
            raise ValueError(f"Beta parameters must be positive, got ({a}, {b})")
        super().__init__(max_order)
        self.a = float(a)
        self.b = float(b)

    def __repr__(self):
        return f"BetaMixing(a={self.a}, b={self.b})"

    def describe(self):
        return {"beta": {"a": self.a, "b": self.b}}

    def _moment(self, i, j):
        a, b = self.a, self.b
        num = [a + k for k in range(i)] + [b + k for k in range(j)]
        den = [a + b + k for k in range(i + j)]
        r = 1.0
        for x, y in zip(num, den):
            r *= x / y
        return r

    def _one_minus_m0(self, k):
        a, b = self.a, self.b
        s = math.fsum(math.log((b + t) / (a + b + t)) for t in range(k))
        return -math.expm1(s)

    def sample(self, rng, size=None):
        return rng.beta(self.a, self.b, size=size)

    def tilt(self, successes, failures):
        return BetaMixing(self.a + successes, self.b + failures,
                          max_order=self.max_order)

    def pdf(self, s):
        from scipy.special import betaln
        s = np.asarray(s, dtype=float)
        with np.errstate(divide="ignore"):
            logp = ((self.a - 1) * np.log(s) + (self.b - 1) * np.log1p(-s)
                    - betaln(self.a, self.b))
        return np.exp(logp)

    def expect(self, f, tol=QUAD_TOL):
        from scipy.special import betaincinv
        # bound the omitted endpoint mass by tol/10 scaled by a probe of |f|
        probes = np.array([1e-9, 0.5, 1.0 - 1e-9])
        fscale = max(1.0, float(np.max(np.abs(f(probes)))))
        tail = tol / (10.0 * fscale)
        left = float(betaincinv(self.a, self.b, tail))
        right = 1.0 - float(betaincinv(self.b, self.a, tail))
        left = min(max(left, 1e-300), 0.2)
        right = max(min(right, 1.0 - 1e-16), 0.8)
        cells = dyadic_cells(left, 1.0 - right)
        return integrate_cells(lambda s: f(s) * self.pdf(s), cells, tol=tol)


class GridMixing(MixingDistribution):
    """Piecewise-linear density tabulated on ordered nodes inside (0, 1).

    The density must integrate to 1 (trapezoid rule) within 1e-10; use
    :meth:`from_unnormalized` to normalize raw values.  Moments are exact:
    on each segment the integrand is a polynomial, handled by a rule of
    matching order, with an adaptive check on top.
    """

    def __init__(self, nodes, densities, max_order=None):
        super().__init__(max_order)
        nodes = np.asarray(nodes, dtype=float)
        densities = np.asarray(densities, dtype=float)
        if nodes.ndim != 1 or nodes.size < 2 or nodes.shape != densities.shape:
            raise ValueError("nodes/densities must be 1-d arrays of equal length >= 2")
        if not (np.all(np.diff(nodes) > 0) and nodes[0] > 0.0 and nodes[-1] < 1.0):
            raise ValueError("nodes must be strictly increasing inside (0, 1)")
        if np.any(densities < 0):
            raise ValueError("densities must be nonnegative")
        total = np.trapezoid(densities, nodes)
        if abs(total - 1.0) > 1e-10:
            raise ValueError(
                f"grid density integrates to {total!r}, not 1; "
                "use GridMixing.from_unnormalized")
        self.nodes = nodes
        self.densities = densities
        self._seg_mass = 0.5 * (densities[1:] + densities[:-1]) * np.diff(nodes)
        self._cum_mass = np.concatenate([[0.0], np.cumsum(self._seg_mass)])

    @classmethod
    def from_unnormalized(cls, nodes, values, max_order=None):
        values = np.asarray(values, dtype=float)
        total = np.trapezoid(values, np.asarray(nodes, dtype=float))
        if not total > 0:
            raise ValueError("grid density has no mass")
        return cls(nodes, values / total, max_order=max_order)

    def __repr__(self):
        return f"GridMixing({self.nodes.size} nodes on [{self.nodes[0]:g}, {self.nodes[-1]:g}])"

    def describe(self):
        return {"grid": {"nodes": self.nodes.tolist(),
                         "densities": self.densities.tolist()}}

    def pdf(self, s):
        return np.interp(s, self.nodes, self.densities, left=0.0, right=0.0)

    def _segments(self):
        return list(zip(self.nodes[:-1], self.nodes[1:]))

    def expect(self, f, tol=QUAD_TOL, order=24):
        return integrate_cells(lambda s: f(s) * self.pdf(s), self._segments(),
                               tol=tol, order=order)

    def _moment(self, i, j):
        # degree of s^i (1-s)^j times the linear density is i + j + 1
        order = (i + j) // 2 + 2
        return self.expect(lambda s: s ** i * (1.0 - s) ** j, order=order)

    def _one_minus_m0(self, k):
        # 1 - (1-s)^k evaluated stably; polynomial of degree k
        order = k // 2 + 2
        return self.expect(lambda s: -np.expm1(k * np.log1p(-s)), order=order)

    def sample(self, rng, size=None):
        u = rng.random(size)
        scalar = np.isscalar(u)
        u = np.atleast_1d(u)
        seg = np.clip(np.searchsorted(self._cum_mass, u, side="right") - 1,
                      0, self._seg_mass.size - 1)
        x0, x1 = self.nodes[seg], self.nodes[seg + 1]
        d0, d1 = self.densities[seg], self.densities[seg + 1]
        rem = u - self._cum_mass[seg]
        h = x1 - x0
        slope = (d1 - d0) / h
        # invert rem = d0*t + slope*t^2/2 on t in [0, h]
        with np.errstate(invalid="ignore", divide="ignore"):
            disc = np.sqrt(np.maximum(d0 * d0 + 2.0 * slope * rem, 0.0))
            t = np.where(np.abs(slope) > 1e-300 * np.maximum(d0, 1.0),
                         (disc - d0) / slope,
                         np.where(d0 > 0, rem / np.where(d0 > 0, d0, 1.0), 0.0))
        x = x0 + np.clip(t, 0.0, h)
        return x[0] if scalar else x

    def tilt(self, successes, failures):
        tilted = (self.densities
                  * self.nodes ** successes
                  * (1.0 - self.nodes) ** failures)
        total = np.trapezoid(tilted, self.nodes)
        if not total > 1e-300:
            raise ValueError("tilt annihilated all grid mass")
        return GridMixing(self.nodes, tilted / total, max_order=self.max_order)


class UnitMass(MixingDistribution):
    """Point mass at 1: the first stick takes everything."""

    def __repr__(self):
        return "UnitMass()"

    def describe(self):
        return {"unit_mass": {}}

    def _moment(self, i, j):
        return 1.0 if j == 0 else 0.0

    def _one_minus_m0(self, k):
        return 1.0

    def sample(self, rng, size=None):
        return np.ones(size) if size is not None else 1.0

    def tilt(self, successes, failures):
        if failures > 0:
            raise ValueError("tilt annihilated the point mass at 1")
        return self

    def expect(self, f, tol=QUAD_TOL):
        return float(np.asarray(f(np.array([1.0])))[0])


@dataclass(frozen=True)
class DeltaSequence:
    """The delta/epsilon/eta/w sequences derived from product moments.

    ``delta[j] = M(1,j)/(1-M(0,j+1))``, ``w[n] = (n+1) delta[n]``,
    ``eps[j] = M(3,j)/(1-M(0,j+2))`` and
    ``eta[j] = 2 M(2,j+1)(1-w[j])/(1-M(0,j+3))``, all for indexes
    0..n_max.  delta_0 = 1 for every H because 1 - M(0,1) = M(1,0).
    """

    n_max: int
    delta: np.ndarray
    eps: np.ndarray
    eta: np.ndarray
    w: np.ndarray


def product_moment(mixing, i, j):
    """E B^i (1-B)^j under the given mixing distribution."""
    return mixing.product_moment(i, j)


def delta_sequence(mixing, n_max):
    """All derived sequences for indexes 0..n_max."""
    if n_max < 0:
        raise ValueError("n_max must be >= 0")
    js = np.arange(n_max + 1)
    delta = np.array([mixing.delta(j) for j in js])
    w = (js + 1) * delta
    eps = np.array([mixing.product_moment(3, j) / mixing.one_minus_m0(j + 2)
                    for j in js])
    eta = np.array([2.0 * mixing.product_moment(2, j + 1) * (1.0 - w[j])
                    / mixing.one_minus_m0(j + 3) for j in js])
    return DeltaSequence(n_max=int(n_max), delta=delta, eps=eps, eta=eta, w=w)


def update_mixing(mixing, success_count, failure_count):
    """Tilt H by s^success (1-s)^failure and renormalize.

    For Beta(a, b) this is the conjugate map to Beta(a+success, b+failure);
    grid densities are re-tilted pointwise.
    """
    s, f = _check_counts(success_count, failure_count)
    if s == 0 and f == 0:
        return mixing
    return mixing.tilt(s, f)

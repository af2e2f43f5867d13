"""Base measures, observation transforms, and exact moment oracles.

A :class:`BaseMeasure` couples a sampling distribution for xi with a
transform g, giving the working variable Y = g(xi).  Moment-based
operations need E(Y - x)^k exactly; that oracle is closed-form for the
supported combinations (identity on normal/uniform/discrete, set
indicators on anything with an interval probability, tabulated grid
transforms by cell-exact quadrature).  Heavy-tailed bases (Cauchy,
symmetric stable with alpha < 2 under the identity transform) can be
sampled but refuse moment queries.
"""

import math
from dataclasses import dataclass

import numpy as np

from ._quad import integrate_cells

__all__ = [
    "HeavyTailedBaseError",
    "Normal",
    "Uniform",
    "Discrete",
    "Cauchy",
    "SymmetricStable",
    "Identity",
    "Indicator",
    "GridFunction",
    "BaseMeasure",
    "symmetric_stable_variates",
]


class HeavyTailedBaseError(ValueError):
    """Moment query against a base without finite moments."""


def symmetric_stable_variates(alpha, rng, size=None):
    """Symmetric stable(alpha, 1) draws, cf exp(-|u|^alpha).

    Chambers-Mallows-Stuck transform; alpha = 1 is standard Cauchy and
    alpha = 2 is N(0, 2).
    """
    if not 0.0 < alpha <= 2.0:
        raise ValueError(f"alpha must be in (0, 2], got {alpha}")
    phi = (rng.random(size) - 0.5) * np.pi
    if alpha == 1.0:
        return np.tan(phi)
    w = rng.exponential(size=size)
    if alpha == 2.0:
        return 2.0 * np.sqrt(w) * np.sin(phi)
    return (np.sin(alpha * phi) / np.cos(phi) ** (1.0 / alpha)
            * (np.cos((1.0 - alpha) * phi) / w) ** ((1.0 - alpha) / alpha))


# ---------------------------------------------------------------------------
# distributions of xi
# ---------------------------------------------------------------------------

class _Distribution:
    heavy_tailed = False
    atom_free = True

    def sample(self, rng, size=None):
        raise NotImplementedError

    def interval_prob(self, lo, hi):
        """P(lo <= xi < hi)."""
        raise NotImplementedError

    def central_moment(self, k, x):
        """E (xi - x)^k."""
        raise NotImplementedError

    def describe(self):
        raise NotImplementedError


class Normal(_Distribution):
    def __init__(self, mean=0.0, sd=1.0):
        if sd <= 0:
            raise ValueError("sd must be positive")
        self.mean = float(mean)
        self.sd = float(sd)

    def describe(self):
        return {"normal": {"mean": self.mean, "sd": self.sd}}

    def sample(self, rng, size=None):
        return self.mean + self.sd * rng.standard_normal(size)

    def cdf(self, x):
        return 0.5 * (1.0 + math.erf((x - self.mean) / (self.sd * math.sqrt(2.0))))

    def pdf(self, x):
        z = (np.asarray(x, dtype=float) - self.mean) / self.sd
        return np.exp(-0.5 * z * z) / (self.sd * math.sqrt(2.0 * math.pi))

    def interval_prob(self, lo, hi):
        return max(self.cdf(hi) - self.cdf(lo), 0.0)

    def central_moment(self, k, x):
        # m_k = mu m_{k-1} + (k-1) sd^2 m_{k-2} for xi - x ~ N(mean - x, sd^2)
        mu = self.mean - x
        m = [1.0, mu]
        for kk in range(2, k + 1):
            m.append(mu * m[kk - 1] + (kk - 1) * self.sd ** 2 * m[kk - 2])
        return m[k]

    def support_hint(self):
        return self.mean - 10 * self.sd, self.mean + 10 * self.sd


class Uniform(_Distribution):
    def __init__(self, lo=0.0, hi=1.0):
        if not hi > lo:
            raise ValueError("need hi > lo")
        self.lo = float(lo)
        self.hi = float(hi)

    def describe(self):
        return {"uniform": {"lo": self.lo, "hi": self.hi}}

    def sample(self, rng, size=None):
        return rng.uniform(self.lo, self.hi, size)

    def cdf(self, x):
        return min(max((x - self.lo) / (self.hi - self.lo), 0.0), 1.0)

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        return np.where((x >= self.lo) & (x <= self.hi),
                        1.0 / (self.hi - self.lo), 0.0)

    def interval_prob(self, lo, hi):
        return max(self.cdf(hi) - self.cdf(lo), 0.0)

    def central_moment(self, k, x):
        a, b = self.lo - x, self.hi - x
        return (b ** (k + 1) - a ** (k + 1)) / ((k + 1) * (b - a))

    def support_hint(self):
        return self.lo, self.hi


class Discrete(_Distribution):
    """Finite support; the two-point case covers Bernoulli-type checks."""

    atom_free = False

    def __init__(self, values, probs):
        values = np.asarray(values, dtype=float)
        probs = np.asarray(probs, dtype=float)
        if values.shape != probs.shape or values.ndim != 1:
            raise ValueError("values/probs must be 1-d arrays of equal length")
        if np.any(probs < 0) or abs(probs.sum() - 1.0) > 1e-12:
            raise ValueError("probs must be nonnegative and sum to 1")
        self.values = values
        self.probs = probs

    def describe(self):
        return {"discrete": {"values": self.values.tolist(),
                             "probs": self.probs.tolist()}}

    def sample(self, rng, size=None):
        return rng.choice(self.values, size=size, p=self.probs)

    def interval_prob(self, lo, hi):
        return float(self.probs[(self.values >= lo) & (self.values < hi)].sum())

    def central_moment(self, k, x):
        return float(np.dot(self.probs, (self.values - x) ** k))


class Cauchy(_Distribution):
    heavy_tailed = True

    def __init__(self, loc=0.0, scale=1.0):
        if scale <= 0:
            raise ValueError("scale must be positive")
        self.loc = float(loc)
        self.scale = float(scale)

    def describe(self):
        return {"cauchy": {"loc": self.loc, "scale": self.scale}}

    def sample(self, rng, size=None):
        return self.loc + self.scale * np.tan((rng.random(size) - 0.5) * np.pi)

    def cdf(self, x):
        return 0.5 + math.atan((x - self.loc) / self.scale) / math.pi

    def pdf(self, x):
        z = (np.asarray(x, dtype=float) - self.loc) / self.scale
        return 1.0 / (math.pi * self.scale * (1.0 + z * z))

    def interval_prob(self, lo, hi):
        return max(self.cdf(hi) - self.cdf(lo), 0.0)

    def central_moment(self, k, x):
        if k == 0:
            return 1.0
        raise HeavyTailedBaseError("Cauchy base has no finite moments")

    def support_hint(self):
        return self.loc - 50 * self.scale, self.loc + 50 * self.scale


class SymmetricStable(_Distribution):
    """Stable law with characteristic function exp(-|u|^alpha)."""

    def __init__(self, alpha):
        if not 0.0 < alpha <= 2.0:
            raise ValueError(f"alpha must be in (0, 2], got {alpha}")
        self.alpha = float(alpha)

    @property
    def heavy_tailed(self):
        return self.alpha < 2.0

    def describe(self):
        return {"stable": {"alpha": self.alpha}}

    def sample(self, rng, size=None):
        return symmetric_stable_variates(self.alpha, rng, size)

    def interval_prob(self, lo, hi):
        raise NotImplementedError("stable interval probabilities are not provided")

    def central_moment(self, k, x):
        if k == 0:
            return 1.0
        if self.alpha == 2.0:
            # N(0, 2)
            return Normal(0.0, math.sqrt(2.0)).central_moment(k, x)
        raise HeavyTailedBaseError(
            f"stable base with alpha={self.alpha} has no finite moments")


# ---------------------------------------------------------------------------
# transforms g
# ---------------------------------------------------------------------------

class Identity:
    bounded = False

    def __call__(self, x):
        return x

    def describe(self):
        return {"identity": {}}


class Indicator:
    """g = 1{lo <= x < hi}; the random mean becomes the set probability."""

    bounded = True

    def __init__(self, lo, hi):
        if not hi > lo:
            raise ValueError("need hi > lo")
        self.lo = float(lo)
        self.hi = float(hi)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        out = ((x >= self.lo) & (x < self.hi)).astype(float)
        return out if out.ndim else float(out)

    def describe(self):
        return {"indicator": {"lo": self.lo, "hi": self.hi}}


class GridFunction:
    """Piecewise-linear tabulated g, held constant beyond the grid ends."""

    bounded = True

    def __init__(self, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        if x.ndim != 1 or x.size < 2 or x.shape != y.shape:
            raise ValueError("x/y must be 1-d arrays of equal length >= 2")
        if not np.all(np.diff(x) > 0):
            raise ValueError("x must be strictly increasing")
        self.x = x
        self.y = y

    def __call__(self, v):
        return np.interp(v, self.x, self.y)

    def describe(self):
        return {"grid": {"x": self.x.tolist(), "y": self.y.tolist()}}


# ---------------------------------------------------------------------------
# the coupled base measure
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BaseMeasure:
    """Base distribution for the atoms plus the transform of interest."""

    distribution: _Distribution
    transform: object = None

    def __post_init__(self):
        if self.transform is None:
            object.__setattr__(self, "transform", Identity())

    @property
    def atom_free(self):
        return self.distribution.atom_free

    @property
    def heavy_tailed(self):
        """Whether the law of Y = g(xi) lacks finite moments."""
        return self.distribution.heavy_tailed and not self.transform.bounded

    def describe(self):
        return {"base": self.distribution.describe(),
                "transform": self.transform.describe()}

    def sample_xi(self, rng, size=None):
        return self.distribution.sample(rng, size)

    def sample_y(self, rng, size=None):
        return self.transform(self.distribution.sample(rng, size))

    def apply(self, x):
        return self.transform(x)

    def central_moment(self, k, x=0.0):
        """E (Y - x)^k, exact for every supported combination."""
        k = int(k)
        if k < 0:
            raise ValueError("k must be >= 0")
        if k == 0:
            return 1.0
        g = self.transform
        if isinstance(g, Identity):
            return self.distribution.central_moment(k, x)
        if isinstance(g, Indicator):
            p0 = self.distribution.interval_prob(g.lo, g.hi)
            return p0 * (1.0 - x) ** k + (1.0 - p0) * (-x) ** k
        if isinstance(g, GridFunction):
            return self._grid_central_moment(k, x)
        raise TypeError(f"unsupported transform {type(g).__name__}")

    def _grid_central_moment(self, k, x):
        dist = self.distribution
        if isinstance(dist, Discrete):
            return float(np.dot(dist.probs, (self.transform(dist.values) - x) ** k))
        g = self.transform
        pdf = getattr(dist, "pdf", None)
        if pdf is None:
            raise TypeError("grid transforms need a base with a density")
        cells = list(zip(g.x[:-1], g.x[1:]))
        inner = integrate_cells(lambda s: (g(s) - x) ** k * pdf(s), cells,
                                tol=1e-12, order=32)
        left_tail = dist.interval_prob(-np.inf, g.x[0])
        right_tail = 1.0 - dist.interval_prob(-np.inf, g.x[-1])
        return (inner
                + (g.y[0] - x) ** k * left_tail
                + (g.y[-1] - x) ** k * right_tail)

    @property
    def mean(self):
        """theta_0 = E Y."""
        if self.heavy_tailed:
            raise HeavyTailedBaseError("heavy-tailed base refuses moment queries")
        return self.central_moment(1, 0.0)

    @property
    def variance(self):
        return self.central_moment(2, self.mean)

    def second_raw_moment(self):
        """E Y^2 (the integral of g^2 against the base)."""
        return self.central_moment(2, 0.0)
